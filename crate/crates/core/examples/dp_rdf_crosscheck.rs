//! With unlimited common randomness the region search reduces to a search
//! over couplings of the source with itself. Compares the two on a ternary
//! source, with the classical rate-distortion function as a lower bound.

use rdp_core::region::{classical_rate_distortion, dp_rdf, min_rate, RegionQuery, SearchConfig};
use rdp_core::{CommonRate, Distribution, DistortionMeasure};

fn main() -> rdp_core::Result<()> {
    let source = Distribution::new(vec![0.5, 0.3, 0.2])?;
    let d = DistortionMeasure::new(vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]])?;
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "delta", "classical", "coupling", "rc=inf", "rc=0");
    for delta in [0.1, 0.3, 0.5, 0.7] {
        let classical = classical_rate_distortion(&source, &d, delta)?;
        let direct = dp_rdf(&source, &d, delta)?;
        let search = |rc| {
            let q = RegionQuery::new(source.clone(), d.clone(), delta, rc).with_aux_size(3);
            min_rate(&q, &SearchConfig::default()).map(|r| r.min_rate)
        };
        println!(
            "{delta:>6} {classical:>10.6} {:>10.6} {:>10.6} {:>10.6}",
            direct.rate,
            search(CommonRate::Infinite)?,
            search(CommonRate::ZERO)?
        );
    }
    Ok(())
}
