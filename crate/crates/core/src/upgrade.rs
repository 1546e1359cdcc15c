//! Decoder upgrade from near-perfect to perfect realism.
//!
//! Given a decoder `W(y | i, j)` and the law of the index pair `(i, j)`, the
//! reconstruction has marginal `PW`. The upgraded decoder scales `W` down by
//! `theta_y = P(y) / PW(y)` on the symbols where `PW` overshoots the target
//! `P`, and re-injects the removed mass `phi_{i,j}` according to the residual
//! law `Q ∝ (P - PW)^+`. The result reproduces `P` exactly, and each row moves
//! by at most `phi_{i,j}` in total variation, so the two decoders can be
//! coupled to disagree with probability `d_TV(P, PW)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dist::{maximal_coupling, tv_distance, Channel, DistortionMeasure, Distribution};
use crate::error::{Error, Result};

/// Target law, decoder rows indexed by flattened `(i, j)`, and the joint law
/// of `(i, j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InputRepr", into = "InputRepr")]
pub struct UpgradeInput {
    target: Distribution,
    decoder: Channel,
    weights: Distribution,
}

#[derive(Serialize, Deserialize)]
struct InputRepr {
    target: Distribution,
    decoder: Channel,
    weights: Distribution,
}

impl TryFrom<InputRepr> for UpgradeInput {
    type Error = Error;

    fn try_from(r: InputRepr) -> Result<Self> {
        UpgradeInput::new(r.target, r.decoder, r.weights)
    }
}

impl From<UpgradeInput> for InputRepr {
    fn from(u: UpgradeInput) -> Self {
        InputRepr {
            target: u.target,
            decoder: u.decoder,
            weights: u.weights,
        }
    }
}

impl UpgradeInput {
    pub fn new(target: Distribution, decoder: Channel, weights: Distribution) -> Result<Self> {
        if decoder.output_size() != target.alphabet_size() {
            return Err(Error::Dimension(format!(
                "decoder emits {} symbols but the target has {}",
                decoder.output_size(),
                target.alphabet_size()
            )));
        }
        if decoder.input_size() != weights.alphabet_size() {
            return Err(Error::Dimension(format!(
                "decoder has {} rows but there are {} index weights",
                decoder.input_size(),
                weights.alphabet_size()
            )));
        }
        Ok(Self {
            target,
            decoder,
            weights,
        })
    }

    pub fn target(&self) -> &Distribution {
        &self.target
    }

    pub fn decoder(&self) -> &Channel {
        &self.decoder
    }

    pub fn weights(&self) -> &Distribution {
        &self.weights
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UpgradeOutput {
    pub upgraded: Channel,
    /// Symbols where the induced marginal exceeds the target.
    pub plus_set: Vec<usize>,
    pub theta: BTreeMap<usize, f64>,
    /// Mass removed from each decoder row.
    pub phi: Vec<f64>,
    /// Law used to re-inject the removed mass; `None` when nothing moves.
    pub residual: Option<Distribution>,
    pub tv_before: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CouplingCertificate {
    /// `Pr(Y != Y~)` under per-row maximal couplings of `W` and `W~`.
    pub mismatch_prob: f64,
    pub tv_before: f64,
}

impl CouplingCertificate {
    pub fn gap(&self) -> f64 {
        (self.mismatch_prob - self.tv_before).abs()
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.gap() <= tol
    }
}

/// `PW(y) = sum_{i,j} weight(i,j) W(y | i,j)`.
pub fn induced_marginal(input: &UpgradeInput) -> Result<Distribution> {
    input.decoder.push_forward(&input.weights)
}

pub fn upgrade(input: &UpgradeInput) -> Result<UpgradeOutput> {
    let pw = induced_marginal(input)?;
    let target = &input.target;
    let tv_before = tv_distance(target, &pw)?;
    let pairs = input.decoder.input_size();

    let plus_set: Vec<usize> = (0..target.alphabet_size())
        .filter(|&y| pw.prob(y) > target.prob(y))
        .collect();
    let deficit: Vec<f64> = target
        .mass()
        .iter()
        .zip(pw.mass())
        .map(|(&p, &q)| (p - q).max(0.0))
        .collect();
    let normalizer: f64 = deficit.iter().sum();

    if plus_set.is_empty() || normalizer <= 0.0 {
        return Ok(UpgradeOutput {
            upgraded: input.decoder.clone(),
            plus_set: Vec::new(),
            theta: BTreeMap::new(),
            phi: vec![0.0; pairs],
            residual: None,
            tv_before,
        });
    }

    let theta: BTreeMap<usize, f64> = plus_set
        .iter()
        .map(|&y| (y, target.prob(y) / pw.prob(y)))
        .collect();
    let residual = Distribution::new(deficit.iter().map(|&v| v / normalizer).collect())?;

    let mut phi = Vec::with_capacity(pairs);
    let mut rows = Vec::with_capacity(pairs);
    for row in input.decoder.rows() {
        let leak: f64 = theta.iter().map(|(&y, &t)| (1.0 - t) * row.prob(y)).sum();
        let mass = row
            .mass()
            .iter()
            .enumerate()
            .map(|(y, &w)| match theta.get(&y) {
                Some(&t) => t * w,
                None => w + leak * residual.prob(y),
            })
            .collect();
        phi.push(leak);
        rows.push(Distribution::new(mass)?);
    }

    Ok(UpgradeOutput {
        upgraded: Channel::from_rows(rows)?,
        plus_set,
        theta,
        phi,
        residual: Some(residual),
        tv_before,
    })
}

fn check_pair(input: &UpgradeInput, output: &UpgradeOutput) -> Result<()> {
    let up = &output.upgraded;
    if up.input_size() != input.decoder.input_size() || up.output_size() != input.decoder.output_size() {
        return Err(Error::Dimension("upgraded decoder does not match the input decoder".into()));
    }
    if output.phi.len() != up.input_size() {
        return Err(Error::Dimension("phi has the wrong length".into()));
    }
    Ok(())
}

/// Weighted disagreement probability of the per-row maximal couplings of the
/// original and upgraded decoders, alongside `d_TV(P, PW)`.
pub fn coupling_certificate(input: &UpgradeInput, output: &UpgradeOutput) -> Result<CouplingCertificate> {
    check_pair(input, output)?;
    let mut mismatch = 0.0;
    for (k, (w, w_up)) in input.decoder.rows().iter().zip(output.upgraded.rows()).enumerate() {
        mismatch += input.weights.prob(k) * maximal_coupling(w, w_up)?.mismatch_prob();
    }
    let tv_before = tv_distance(&input.target, &induced_marginal(input)?)?;
    if (tv_before - output.tv_before).abs() > 1e-12 {
        return Err(Error::Invalid("output was not produced from this input".into()));
    }
    Ok(CouplingCertificate {
        mismatch_prob: mismatch,
        tv_before,
    })
}

/// Upper bound `max d * d_TV(P, PW)` on the distortion added by the upgrade.
pub fn distortion_delta_bound(output: &UpgradeOutput, d: &DistortionMeasure) -> f64 {
    d.max_entry() * output.tv_before
}

/// Expected distortion `(before, after)` when `X` given the index pair has law
/// `source_given_pair` and the reconstruction is conditionally independent of
/// `X` given the pair.
pub fn distortion_shift(
    input: &UpgradeInput,
    output: &UpgradeOutput,
    source_given_pair: &Channel,
    d: &DistortionMeasure,
) -> Result<(f64, f64)> {
    check_pair(input, output)?;
    if source_given_pair.input_size() != input.weights.alphabet_size()
        || d.shape() != (source_given_pair.output_size(), input.target.alphabet_size())
    {
        return Err(Error::Dimension("source law or distortion table has the wrong shape".into()));
    }
    let expect = |dec: &Channel| {
        let mut total = 0.0;
        for (k, &w) in input.weights.mass().iter().enumerate() {
            for (x, &px) in source_given_pair.row(k).mass().iter().enumerate() {
                for (y, &py) in dec.row(k).mass().iter().enumerate() {
                    total += w * px * py * d.get(x, y);
                }
            }
        }
        total
    };
    Ok((expect(&input.decoder), expect(&output.upgraded)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(v: &[f64]) -> Distribution {
        Distribution::new(v.to_vec()).unwrap()
    }

    fn single(target: &[f64], row: &[f64]) -> UpgradeInput {
        UpgradeInput::new(dist(target), Channel::new(vec![row.to_vec()]).unwrap(), dist(&[1.0])).unwrap()
    }

    #[test]
    fn induced_marginal_examples() {
        assert_eq!(induced_marginal(&single(&[0.5, 0.5], &[0.7, 0.3])).unwrap(), dist(&[0.7, 0.3]));
        let t = dist(&[0.2, 0.3, 0.5]);
        let inp = UpgradeInput::new(t.clone(), Channel::constant(4, &t).unwrap(), Distribution::uniform(4).unwrap()).unwrap();
        assert_eq!(induced_marginal(&inp).unwrap(), t);
        let inp = UpgradeInput::new(dist(&[0.5, 0.5]), Channel::identity(2).unwrap(), dist(&[0.5, 0.5])).unwrap();
        assert_eq!(induced_marginal(&inp).unwrap(), dist(&[0.5, 0.5]));
    }

    #[test]
    fn upgrade_single_row() {
        let inp = single(&[0.5, 0.5], &[0.7, 0.3]);
        let out = upgrade(&inp).unwrap();
        assert_eq!(out.plus_set, vec![0]);
        assert!((out.theta[&0] - 5.0 / 7.0).abs() < 1e-15);
        assert_eq!(out.residual.as_ref().unwrap().mass(), &[0.0, 1.0]);
        assert!((out.phi[0] - 0.2).abs() < 1e-15);
        let row = out.upgraded.row(0).mass();
        assert!((row[0] - 0.5).abs() < 1e-15 && (row[1] - 0.5).abs() < 1e-15);

        let cert = coupling_certificate(&inp, &out).unwrap();
        assert!((cert.mismatch_prob - 0.2).abs() < 1e-15);
        assert!(cert.holds(1e-12));

        let h = DistortionMeasure::hamming(2);
        assert!((distortion_delta_bound(&out, &h) - 0.2).abs() < 1e-15);
        // X uniform and independent of the single index: before 0.5, after 0.5
        let (before, after) = distortion_shift(&inp, &out, &Channel::new(vec![vec![0.5, 0.5]]).unwrap(), &h).unwrap();
        assert!(after - before <= distortion_delta_bound(&out, &h) + 1e-15);
        // X = 0 surely: before 0.3, after 0.5, shift 0.2 meets the bound
        let (before, after) = distortion_shift(&inp, &out, &Channel::new(vec![vec![1.0, 0.0]]).unwrap(), &h).unwrap();
        assert!((before - 0.3).abs() < 1e-15 && (after - 0.5).abs() < 1e-15);
        assert!(after - before <= distortion_delta_bound(&out, &h) + 1e-15);
    }

    #[test]
    fn upgrade_matching_decoder_is_identity() {
        let inp = UpgradeInput::new(
            dist(&[0.5, 0.5]),
            Channel::new(vec![vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap(),
            dist(&[0.5, 0.5]),
        )
        .unwrap();
        let out = upgrade(&inp).unwrap();
        assert_eq!(out.upgraded, *inp.decoder());
        assert_eq!(out.phi, vec![0.0, 0.0]);
        assert!(out.plus_set.is_empty() && out.residual.is_none());
        assert_eq!(coupling_certificate(&inp, &out).unwrap().mismatch_prob, 0.0);
        assert_eq!(upgrade(&UpgradeInput::new(dist(&[0.5, 0.5]), out.upgraded.clone(), dist(&[0.5, 0.5])).unwrap()).unwrap(), out);
    }

    #[test]
    fn upgrade_onto_point_mass() {
        let inp = UpgradeInput::new(
            dist(&[1.0, 0.0]),
            Channel::new(vec![vec![1.0, 0.0], vec![0.8, 0.2]]).unwrap(),
            dist(&[0.5, 0.5]),
        )
        .unwrap();
        assert_eq!(induced_marginal(&inp).unwrap(), dist(&[0.9, 0.1]));
        let out = upgrade(&inp).unwrap();
        assert_eq!(out.plus_set, vec![1]);
        assert_eq!(out.residual.as_ref().unwrap().mass(), &[1.0, 0.0]);
        assert_eq!(out.phi, vec![0.0, 0.2]);
        let pw = out.upgraded.push_forward(inp.weights()).unwrap();
        assert!(tv_distance(&pw, inp.target()).unwrap() < 1e-15);
        assert!((coupling_certificate(&inp, &out).unwrap().mismatch_prob - 0.1).abs() < 1e-15);
    }

    #[test]
    fn certificate_rejects_foreign_output() {
        let a = single(&[0.5, 0.5], &[0.7, 0.3]);
        let b = single(&[0.5, 0.5], &[0.9, 0.1]);
        let out = upgrade(&b).unwrap();
        assert!(coupling_certificate(&a, &out).is_err());
    }

    #[test]
    fn shape_errors() {
        assert!(UpgradeInput::new(dist(&[0.5, 0.5]), Channel::identity(3).unwrap(), dist(&[0.2, 0.3, 0.5])).is_err());
        assert!(UpgradeInput::new(dist(&[0.5, 0.5]), Channel::identity(2).unwrap(), dist(&[1.0])).is_err());
    }
}
