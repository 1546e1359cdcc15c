#![allow(dead_code)]

use proptest::prelude::*;
use rdp_core::{Channel, Distribution};

/// Weights in [0, 1) with roughly one in five forced to zero, normalized.
pub fn mass(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec((0.0..1.0f64, 0..5u8), k).prop_map(|v| {
        let mut w: Vec<f64> = v.into_iter().map(|(x, z)| if z == 0 { 0.0 } else { x }).collect();
        if w.iter().sum::<f64>() <= 1e-9 {
            w[0] = 1.0;
        }
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect()
    })
}

pub fn distribution(k: usize) -> impl Strategy<Value = Distribution> {
    mass(k).prop_map(|m| Distribution::new(m).unwrap())
}

pub fn channel(inputs: usize, outputs: usize) -> impl Strategy<Value = Channel> {
    prop::collection::vec(mass(outputs), inputs).prop_map(|rows| Channel::new(rows).unwrap())
}

pub fn bsc(a: f64) -> Channel {
    Channel::new(vec![vec![1.0 - a, a], vec![a, 1.0 - a]]).unwrap()
}

/// Binary entropy in bits.
pub fn h2(p: f64) -> f64 {
    let t = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    t(p) + t(1.0 - p)
}
