//! Rate-distortion coding under a perfect realism constraint.
//!
//! * [`dist`]: finite distributions, channels, couplings and information measures.
//! * [`gaussian`]: the quadratic-Gaussian rate/common-randomness/distortion tradeoff.
//! * [`region`]: numerical search and oracles for the finite-alphabet achievable region.
//! * [`synthesis`]: finite-blocklength soft-covering simulation with a likelihood encoder.
//! * [`upgrade`]: upgrading an almost-realistic decoder into an exactly realistic one.
//! * [`cli`]: the `rdp` command-line front end.

pub mod cli;
pub mod common_rate;
pub mod dist;
pub mod error;
pub mod gaussian;
pub mod region;
pub mod simplex;
pub mod streams;
pub mod synthesis;
pub mod upgrade;

pub use common_rate::CommonRate;
pub use dist::{Channel, Distribution, DistortionMeasure, JointPmf, TripleJoint};
pub use error::{Error, Result};
