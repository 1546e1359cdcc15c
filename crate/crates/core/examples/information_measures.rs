//! Total variation, maximal couplings and mutual information on small alphabets.

use rdp_core::dist::{maximal_coupling, mutual_information, tv_distance, Pair};
use rdp_core::{Channel, Distribution, DistortionMeasure, TripleJoint};

fn main() -> rdp_core::Result<()> {
    let p = Distribution::new(vec![0.5, 0.3, 0.2])?;
    let q = Distribution::new(vec![0.2, 0.3, 0.5])?;
    let c = maximal_coupling(&p, &q)?;
    println!("d_TV(p, q) = {:.3}, maximal coupling disagrees with probability {:.3}", tv_distance(&p, &q)?, c.mismatch_prob());
    println!("I of the coupling: {:.4} bits", mutual_information(c.joint()));

    let t = TripleJoint::new(
        p.clone(),
        Channel::new(vec![vec![0.9, 0.1], vec![0.5, 0.5], vec![0.1, 0.9]])?,
        Channel::new(vec![vec![0.7, 0.2, 0.1], vec![0.1, 0.2, 0.7]])?,
    )?;
    for (name, pair) in [("I(X;U)", Pair::XU), ("I(U;Y)", Pair::UY), ("I(X;Y)", Pair::XY)] {
        println!("{name} = {:.4}", t.mutual_information(pair));
    }
    println!("law of Y: {:?}", t.y_marginal().mass());
    println!("E d(X,Y) under Hamming: {:.4}", t.expected_distortion(&DistortionMeasure::hamming(3))?);
    Ok(())
}
