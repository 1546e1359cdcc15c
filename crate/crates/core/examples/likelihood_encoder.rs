//! One block through the random-codebook scheme: sample a codebook, encode a
//! source block with the likelihood encoder, decode, and compare the exact
//! output law with the i.i.d. source law.

use rdp_core::dist::{product_extension, tv_distance};
use rdp_core::streams::{stream, Purpose};
use rdp_core::synthesis::{SimConfig, Simulator};
use rdp_core::{Channel, Distribution, TripleJoint};

fn main() -> rdp_core::Result<()> {
    let triple = TripleJoint::new(
        Distribution::new(vec![0.3, 0.7])?,
        Channel::new(vec![vec![0.85, 0.15], vec![0.1, 0.9]])?,
        Channel::new(vec![vec![0.9, 0.1], vec![0.05, 0.95]])?,
    )?;
    let mut cfg = SimConfig::new(triple, 6, 0.9, 0.3, 0.02);
    cfg.seed = 17;
    let sim = Simulator::new(cfg)?;
    let cb = sim.codebook();
    println!("codebook: {} messages x {} common indices", cb.messages(), cb.commons());

    let x = [1, 1, 0, 1, 1, 0];
    let j = 2;
    let posterior = sim.encode_posterior(&x, j)?;
    let (best, p) = posterior
        .mass()
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    println!("x = {x:?}, j = {j}: most likely message {best} (p = {p:.3}) with codeword {:?}", cb.codeword(best, j)?);

    let mut rng = stream(17, Purpose::Encoder, 0);
    let i = posterior.sample(&mut rng);
    let y = sim.decode(i, j, &mut stream(17, Purpose::Decoder, 0))?;
    println!("sampled message {i}, reconstruction {y:?}");

    let law = sim.exact_output_law()?;
    let target = product_extension(sim.config().triple.source(), 6, 1 << 10)?;
    println!("d_TV(output law, source law) = {:.4}", tv_distance(&law, &target)?);
    Ok(())
}
