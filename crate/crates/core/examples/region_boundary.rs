//! Boundary of the achievable region for a binary uniform source under
//! Hamming distortion, next to the exhaustive grid oracle.

use rdp_core::region::{brute_force_oracle, min_rate, RegionQuery, SearchConfig};
use rdp_core::{CommonRate, Distribution, DistortionMeasure};

fn main() -> rdp_core::Result<()> {
    let source = Distribution::uniform(2)?;
    let hamming = DistortionMeasure::hamming(2);
    println!("{:>6} {:>5} {:>10} {:>10}", "delta", "rc", "search", "grid");
    for rc in [CommonRate::ZERO, CommonRate::Finite(0.2), CommonRate::Infinite] {
        for delta in [0.05, 0.1, 0.2, 0.3, 0.4, 0.5] {
            let q = RegionQuery::new(source.clone(), hamming.clone(), delta, rc).with_aux_size(2);
            let found = min_rate(&q, &SearchConfig::default())?;
            let grid = brute_force_oracle(delta, rc, &source, &hamming, 2, 0.005)?;
            println!("{delta:>6} {:>5} {:>10.6} {:>10.6}", rc.to_string(), found.min_rate, grid.value);
        }
    }
    Ok(())
}
