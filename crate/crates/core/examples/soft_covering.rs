//! Total variation between the codebook's output law and the i.i.d. source
//! law as the blocklength grows, with rates above and below the thresholds.

use rdp_core::dist::Pair;
use rdp_core::synthesis::{sweep_median, SimConfig};
use rdp_core::{Channel, Distribution, TripleJoint};

fn bsc(a: f64) -> rdp_core::Result<Channel> {
    Channel::new(vec![vec![1.0 - a, a], vec![a, 1.0 - a]])
}

fn main() -> rdp_core::Result<()> {
    let triple = TripleJoint::new(Distribution::uniform(2)?, bsc(0.1)?, bsc(0.1)?)?;
    let (i_xu, i_yu) = (triple.mutual_information(Pair::XU), triple.mutual_information(Pair::UY));
    println!("I(X;U) = {i_xu:.4}, I(Y;U) = {i_yu:.4}");
    let ns: Vec<usize> = (2..=10).collect();

    let mut above = SimConfig::new(triple.clone(), 1, i_xu + 0.5, (i_yu - i_xu).max(0.0), 0.01);
    above.mc_samples = 500;
    let mut below = SimConfig::new(triple, 1, (i_yu - 0.5).max(0.05), 0.0, 0.01);
    below.mc_samples = 500;

    let high = sweep_median(&above, &ns, 20)?;
    let low = sweep_median(&below, &ns, 20)?;
    println!("{:>3} {:>12} {:>12}", "n", "above", "below");
    for (h, l) in high.iter().zip(&low) {
        println!("{:>3} {:>12.4} {:>12.4}", h.n, h.tv_gap, l.tv_gap);
    }
    Ok(())
}
