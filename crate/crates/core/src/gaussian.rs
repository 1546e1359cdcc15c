//! Quadratic-Gaussian rate-distortion-perception tradeoff.
//!
//! For a unit-variance Gaussian source under squared error and perfect
//! realism, the minimum rate at distortion `0 < delta <= 2` with common
//! randomness rate `R_c` is `R = 1/2 log2(1 / (1 - rho^2))`, where `rho` is
//! the root in `[0, 1)` of
//!
//! ```text
//! 1 - delta/2 = rho * sqrt(1 - 2^(-2 R_c) (1 - rho^2))
//! ```
//!
//! Sources with variance `s^2` follow by rescaling: distortion `delta * s^2`
//! costs the rate of `delta` here.

use serde::Serialize;

use crate::common_rate::CommonRate;
use crate::error::{Error, Result};

/// Width of the final bisection bracket for `rho`.
pub const RHO_TOLERANCE: f64 = 1e-14;

const MAX_BISECTIONS: usize = 64;

/// One point of the tradeoff surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianPoint {
    pub delta: f64,
    pub common_rate: CommonRate,
    /// Correlation between the source and the auxiliary variable.
    pub rho: f64,
    /// Correlation between the auxiliary variable and the reconstruction.
    pub rho_tilde: f64,
    /// Rate in bits per sample.
    pub rate: f64,
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta <= 2.0) {
        return Err(Error::Domain(format!("distortion must lie in (0, 2], got {delta}")));
    }
    Ok(())
}

fn rho_tilde_of(rho: f64, shrink: f64) -> f64 {
    (1.0 - shrink * (1.0 - rho) * (1.0 + rho)).max(0.0).sqrt()
}

/// Root of the correlation equation by bisection on `[0, 1]`. The left side
/// is strictly increasing in `rho`, negative at 0 and positive at 1 whenever
/// `delta > 0`.
pub fn solve_rho(delta: f64, rc: CommonRate) -> Result<f64> {
    check_delta(delta)?;
    let target = 1.0 - delta / 2.0;
    if target == 0.0 {
        return Ok(0.0);
    }
    let shrink = rc.shrink_factor();
    let f = |rho: f64| rho * rho_tilde_of(rho, shrink) - target;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= RHO_TOLERANCE {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let rho = 0.5 * (lo + hi);
    Ok(if rho < 1.0 { rho } else { lo })
}

fn rate_from_rho(rho: f64) -> f64 {
    // adding 0.0 maps -0.0 to +0.0 at rho = 0
    -0.5 * ((1.0 - rho) * (1.0 + rho)).log2() + 0.0
}

/// Minimum rate in bits for distortion `delta` and common rate `rc`.
pub fn rate(delta: f64, rc: CommonRate) -> Result<f64> {
    solve_rho(delta, rc).map(rate_from_rho)
}

/// Full record for one `(delta, rc)`.
pub fn point(delta: f64, rc: CommonRate) -> Result<GaussianPoint> {
    let rho = solve_rho(delta, rc)?;
    let rho_tilde = if delta == 2.0 && rc.is_infinite() {
        // any rho_tilde works when rho = 0; report the R_c -> inf limit
        1.0
    } else {
        rho_tilde_of(rho, rc.shrink_factor())
    };
    Ok(GaussianPoint {
        delta,
        common_rate: rc,
        rho,
        rho_tilde,
        rate: rate_from_rho(rho),
    })
}

/// Closed form without common randomness: `1/2 log2(2 / delta)`.
pub fn rate_rc_zero(delta: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(0.5 * (2.0 / delta).log2())
}

/// Closed form with unlimited common randomness: `1/2 log2(1 / (delta (1 - delta/4)))`.
pub fn rate_rc_inf(delta: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok((-0.5 * (delta * (1.0 - delta / 4.0)).log2()).max(0.0))
}

/// Classical rate-distortion function without a realism constraint.
pub fn rate_classical(delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("distortion must be positive, got {delta}")));
    }
    Ok(if delta >= 1.0 { 0.0 } else { -0.5 * delta.log2() })
}

/// Tradeoff curve over a distortion grid.
pub fn curve(grid: &[f64], rc: CommonRate) -> Result<Vec<GaussianPoint>> {
    grid.iter().map(|&delta| point(delta, rc)).collect()
}

/// Classical curve in the same record layout. `rho` is the correlation of the
/// classical test channel, `sqrt(1 - delta)` clipped at zero, so that
/// `rate = 1/2 log2(1 / (1 - rho^2))` still holds; `rho_tilde` is 1 because the
/// reconstruction is the auxiliary variable itself.
pub fn classical_curve(grid: &[f64]) -> Result<Vec<GaussianPoint>> {
    grid.iter()
        .map(|&delta| {
            Ok(GaussianPoint {
                delta,
                common_rate: CommonRate::Infinite,
                rho: (1.0 - delta).max(0.0).sqrt(),
                rho_tilde: 1.0,
                rate: rate_classical(delta)?,
            })
        })
        .collect()
}

/// Default plotting grid `{0.02, 0.04, .., 2.0}`.
pub fn default_grid() -> Vec<f64> {
    (1..=100).map(|k| k as f64 / 50.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: CommonRate = CommonRate::Infinite;

    /// Independent oracle: plain bisection on the squared form
    /// `rho^2 (1 - c (1 - rho^2)) = (1 - delta/2)^2`.
    fn oracle_rho(delta: f64, shrink: f64) -> f64 {
        let t = (1.0 - delta / 2.0).powi(2);
        let g = |r: f64| r * r * (1.0 - shrink * (1.0 - r * r)) - t;
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if g(m) < 0.0 {
                lo = m
            } else {
                hi = m
            }
        }
        lo
    }

    #[test]
    fn solve_rho_examples() {
        for rc in [CommonRate::ZERO, CommonRate::Finite(0.7), INF] {
            assert_eq!(solve_rho(2.0, rc).unwrap(), 0.0);
        }
        let r0 = solve_rho(1.0, CommonRate::ZERO).unwrap();
        assert!((r0 - oracle_rho(1.0, 1.0)).abs() < 1e-13);
        assert!((r0 - 0.5_f64.sqrt()).abs() < 1e-13);
        let rinf = solve_rho(1.0, INF).unwrap();
        assert!((rinf - oracle_rho(1.0, 0.0)).abs() < 1e-13);
        assert!((rinf - 0.5).abs() < 1e-13);
        let r = solve_rho(0.3, CommonRate::Finite(0.4)).unwrap();
        assert!((r - oracle_rho(0.3, (-0.8_f64).exp2())).abs() < 1e-13);
    }

    #[test]
    fn residual_is_tiny() {
        for &delta in &[1e-6, 0.01, 0.5, 1.0, 1.9, 1.999_999] {
            for rc in [CommonRate::ZERO, CommonRate::Finite(0.25), CommonRate::Finite(3.0), INF] {
                let rho = solve_rho(delta, rc).unwrap();
                assert!((0.0..1.0).contains(&rho));
                let resid = rho * rho_tilde_of(rho, rc.shrink_factor()) - (1.0 - delta / 2.0);
                assert!(resid.abs() <= 1e-12, "delta {delta} rc {rc}: {resid}");
            }
        }
    }

    #[test]
    fn domain_errors() {
        for bad in [0.0, -1.0, 2.000_001, f64::NAN] {
            assert!(matches!(solve_rho(bad, INF), Err(Error::Domain(_))));
            assert!(rate_rc_zero(bad).is_err());
        }
        assert!(rate_classical(0.0).is_err());
        assert!(curve(&[1.0, 2.5], INF).is_err());
    }

    #[test]
    fn rate_examples() {
        assert_eq!(rate(2.0, INF).unwrap(), 0.0);
        assert!((rate(1.0, CommonRate::ZERO).unwrap() - 0.5).abs() < 1e-12);
        assert!((rate(1.0, INF).unwrap() - 0.5 * (4.0_f64 / 3.0).log2()).abs() < 1e-12);
        assert_eq!(rate_rc_zero(2.0).unwrap(), 0.0);
        assert_eq!(rate_rc_inf(2.0).unwrap(), 0.0);
        assert_eq!(rate_classical(1.0).unwrap(), 0.0);
        assert_eq!(rate_rc_zero(0.5).unwrap(), 1.0);
    }

    #[test]
    fn curve_examples() {
        let c = curve(&[2.0], CommonRate::Finite(1.0)).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].rate, 0.0);

        let p = curve(&[1.0], CommonRate::ZERO).unwrap()[0];
        assert!((p.rho - 0.5_f64.sqrt()).abs() < 1e-12);
        assert!((p.rho_tilde - 0.5_f64.sqrt()).abs() < 1e-12);
        assert!((p.rate - 0.5).abs() < 1e-12);

        let c = curve(&[0.1, 0.5, 1.0, 1.5, 2.0], INF).unwrap();
        assert!(c.windows(2).all(|w| w[1].rate <= w[0].rate));
    }

    #[test]
    fn invariant_chain() {
        for &delta in &[0.05, 0.4, 1.0, 1.7] {
            for rc in [CommonRate::ZERO, CommonRate::Finite(0.5), CommonRate::Finite(2.0)] {
                let p = point(delta, rc).unwrap();
                assert!((1.0 - delta / 2.0 - p.rho * p.rho_tilde).abs() < 1e-10);
                let via_tilde = -0.5 * (1.0 - p.rho_tilde * p.rho_tilde).log2() - rc.bits();
                assert!((via_tilde - p.rate).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn default_grid_shape() {
        let g = default_grid();
        assert_eq!(g.len(), 100);
        assert_eq!(g[0], 0.02);
        assert_eq!(*g.last().unwrap(), 2.0);
    }
}
