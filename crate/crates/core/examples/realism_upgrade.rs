//! A decoder whose output law is slightly off target is turned into one that
//! hits the target exactly, changing its output with probability equal to the
//! total variation gap.

use rdp_core::dist::tv_distance;
use rdp_core::upgrade::{coupling_certificate, distortion_delta_bound, upgrade, UpgradeInput};
use rdp_core::{Channel, Distribution, DistortionMeasure};

fn main() -> rdp_core::Result<()> {
    let target = Distribution::new(vec![0.5, 0.3, 0.2])?;
    let decoder = Channel::new(vec![
        vec![0.8, 0.15, 0.05],
        vec![0.3, 0.6, 0.1],
        vec![0.2, 0.2, 0.6],
        vec![0.7, 0.1, 0.2],
    ])?;
    let weights = Distribution::new(vec![0.4, 0.2, 0.1, 0.3])?;
    let input = UpgradeInput::new(target.clone(), decoder, weights.clone())?;

    let out = upgrade(&input)?;
    let cert = coupling_certificate(&input, &out)?;
    println!("induced law before: {:?}", input.decoder().push_forward(&weights)?.mass());
    println!("induced law after:  {:?}", out.upgraded.push_forward(&weights)?.mass());
    println!("overshooting symbols {:?}, scale factors {:?}", out.plus_set, out.theta);
    println!("mass moved per row {:?}", out.phi);
    for (k, row) in out.upgraded.rows().iter().enumerate() {
        println!("  row {k}: {:?}", row.mass());
    }
    println!(
        "disagreement {:.6} = d_TV {:.6}; Hamming distortion changes by at most {:.6}",
        cert.mismatch_prob,
        tv_distance(&target, &input.decoder().push_forward(&weights)?)?,
        distortion_delta_bound(&out, &DistortionMeasure::hamming(3))
    );
    Ok(())
}
