mod common;

use common::bsc;
use proptest::prelude::*;
use rdp_core::dist::{product_extension, sequence_at, tv_distance};
use rdp_core::synthesis::{
    empirical_output_law, exact_output_law, idealized_source_law, likelihood_encoder, run, sample_codebook, Codebook,
    SimConfig,
};
use rdp_core::{Channel, Distribution, TripleJoint};

fn triple(a: f64, b: f64) -> TripleJoint {
    TripleJoint::new(Distribution::new(vec![0.4, 0.6]).unwrap(), bsc(a), bsc(b)).unwrap()
}

fn config() -> impl Strategy<Value = SimConfig> {
    (1usize..=6, 0.0..1.2f64, 0.0..0.6f64, 0.01..0.1f64, 0.0..0.5f64, 0.0..0.5f64, any::<u64>()).prop_map(
        |(n, r, rc, eps, a, b, seed)| {
            let mut cfg = SimConfig::new(triple(a, b), n, r, rc, eps);
            cfg.seed = seed;
            cfg
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn output_law_is_normalized(cfg in config()) {
        let cb = sample_codebook(&cfg).unwrap();
        let law = exact_output_law(&cb, cfg.triple.synthesis(), 1 << 12).unwrap();
        prop_assert!((law.mass().iter().sum::<f64>() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn encoder_returns_a_distribution(cfg in config(), x_index in 0usize..64, j_seed in any::<u32>()) {
        let cb = sample_codebook(&cfg).unwrap();
        let reverse = cfg.triple.reverse_channel();
        let x = sequence_at(x_index % (1 << cfg.n), 2, cfg.n);
        let j = j_seed as usize % cb.commons();
        let q = likelihood_encoder(&cb, &reverse, &x, j).unwrap();
        prop_assert_eq!(q.alphabet_size(), cb.messages());
        prop_assert!((q.mass().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        if cb.messages() == 1 {
            prop_assert_eq!(q.mass(), &[1.0]);
        }
    }
}

#[test]
fn identical_configs_give_identical_reports() {
    let mut cfg = SimConfig::new(triple(0.1, 0.2), 5, 0.7, 0.2, 0.05);
    cfg.seed = 42;
    cfg.mc_samples = 3000;
    let a = serde_json::to_string(&run(&cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&run(&cfg).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn histogram_converges_to_exact_law() {
    for seed in 0..5 {
        let mut cfg = SimConfig::new(triple(0.15, 0.25), 3, 0.5, 0.3, 0.05);
        cfg.seed = seed;
        let cb = sample_codebook(&cfg).unwrap();
        let exact = exact_output_law(&cb, cfg.triple.synthesis(), 1 << 10).unwrap();
        let samples = 50_000;
        let hist = empirical_output_law(&cb, cfg.triple.synthesis(), samples, seed, 1 << 10).unwrap();
        let tv = tv_distance(&hist, &exact).unwrap();
        let bound = 3.0 * ((1usize << 3) as f64 / samples as f64).sqrt();
        assert!(tv < bound, "seed {seed}: {tv} >= {bound}");
    }
}

/// Averaged over single-codeword codebooks drawn from `P(u)^n`, the source
/// law of the idealized joint is the i.i.d. source law.
#[test]
fn idealized_joint_has_the_source_marginal() {
    let t = TripleJoint::new(
        Distribution::new(vec![0.25, 0.75]).unwrap(),
        Channel::new(vec![vec![0.6, 0.3, 0.1], vec![0.1, 0.2, 0.7]]).unwrap(),
        Channel::new(vec![vec![0.9, 0.1], vec![0.5, 0.5], vec![0.2, 0.8]]).unwrap(),
    )
    .unwrap();
    let pu = t.u_marginal();
    let reverse = t.reverse_channel();
    for n in 1..=4 {
        let mut avg = vec![0.0; 1 << n];
        for idx in 0..3usize.pow(n as u32) {
            let word = sequence_at(idx, 3, n);
            let weight: f64 = word.iter().map(|&u| pu.prob(u)).product();
            let cb = Codebook::from_entries(1, 1, n, 3, word).unwrap();
            let law = idealized_source_law(&cb, &reverse, 1 << 10).unwrap();
            avg.iter_mut().zip(law.mass()).for_each(|(a, p)| *a += weight * p);
        }
        let target = product_extension(t.source(), n, 1 << 10).unwrap();
        for (a, b) in avg.iter().zip(target.mass()) {
            assert!((a - b).abs() <= 1e-12, "n {n}");
        }
    }
}

/// Under the idealized joint, feeding its own source law through the
/// likelihood encoder recovers the uniform message law.
#[test]
fn encoder_is_the_idealized_posterior() {
    let t = triple(0.2, 0.1);
    let mut cfg = SimConfig::new(t.clone(), 4, 0.6, 0.25, 0.05);
    cfg.seed = 5;
    let cb = sample_codebook(&cfg).unwrap();
    let reverse = t.reverse_channel();
    for j in 0..cb.commons() {
        let single_j = Codebook::from_entries(
            cb.messages(),
            1,
            4,
            2,
            (0..cb.messages()).flat_map(|i| cb.codeword(i, j).unwrap().to_vec()).collect(),
        )
        .unwrap();
        let q_x = idealized_source_law(&single_j, &reverse, 1 << 8).unwrap();
        let mut msg = vec![0.0; cb.messages()];
        for (xi, &px) in q_x.mass().iter().enumerate() {
            if px == 0.0 {
                continue;
            }
            let post = likelihood_encoder(&cb, &reverse, &sequence_at(xi, 2, 4), j).unwrap();
            msg.iter_mut().zip(post.mass()).for_each(|(m, p)| *m += px * p);
        }
        for m in msg {
            assert!((m - 1.0 / cb.messages() as f64).abs() <= 1e-12);
        }
    }
}

/// With a wide rate margin the chosen codeword behaves like a draw from
/// `P(u|x)`, so the end-to-end distortion is the single-letter value.
#[test]
fn distortion_is_unbiased_with_a_wide_margin() {
    let t = TripleJoint::new(Distribution::uniform(2).unwrap(), bsc(0.1), bsc(0.1)).unwrap();
    let rate = t.mutual_information(rdp_core::dist::Pair::XU) + 1.5;
    let mut cfg = SimConfig::new(t, 6, rate, 0.0, 0.01);
    cfg.seed = 7;
    cfg.mc_samples = 100_000;
    let r = run(&cfg).unwrap();
    let z = (r.distortion - r.expected_distortion) / r.distortion_se;
    assert!(z.abs() <= 3.0, "z = {z}");
}
