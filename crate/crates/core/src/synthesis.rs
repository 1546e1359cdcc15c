//! Finite-blocklength simulation of the random-codebook scheme.
//!
//! A codebook `u^n(i, j)` of `floor(2^{n(R+eps)}) x floor(2^{n(R_c+eps)})`
//! i.i.d. `P(u)` sequences is drawn. The encoder sees `x^n` and the common
//! index `j` and picks `i` with probability proportional to the likelihood
//! `prod_t P(x_t | u_t(i, j))`. The decoder passes `u^n(i, j)` through the
//! memoryless synthesis channel `P(y|u)`.
//!
//! For small `|X|^n` the output law is computed exactly as the uniform
//! mixture of the per-codeword product channels.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{
    product_extension, tv_distance, Channel, DistortionMeasure, Distribution, Pair, TripleJoint, DEFAULT_MAX_OUTCOMES,
};
use crate::error::{Error, Result};
use crate::streams::{derive_seed, stream, Purpose};

/// Default cap on stored codebook symbols (`messages * commons * n`).
pub const DEFAULT_MAX_CODEBOOK: usize = 1 << 26;

const BOOTSTRAP_RESAMPLES: usize = 400;

fn default_max_codebook() -> usize {
    DEFAULT_MAX_CODEBOOK
}

fn default_max_outcomes() -> usize {
    DEFAULT_MAX_OUTCOMES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub rate: f64,
    #[serde(rename = "rc", alias = "common_rate")]
    pub common_rate: f64,
    pub epsilon: f64,
    pub triple: TripleJoint,
    pub seed: u64,
    pub mc_samples: usize,
    /// Per-letter distortion; Hamming when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distortion: Option<DistortionMeasure>,
    #[serde(default = "default_max_codebook")]
    pub max_codebook: usize,
    /// Largest `|X|^n` handled by exact enumeration.
    #[serde(default = "default_max_outcomes")]
    pub max_outcomes: usize,
}

impl SimConfig {
    pub fn new(triple: TripleJoint, n: usize, rate: f64, common_rate: f64, epsilon: f64) -> Self {
        Self {
            n,
            rate,
            common_rate,
            epsilon,
            triple,
            seed: 0,
            mc_samples: 10_000,
            distortion: None,
            max_codebook: DEFAULT_MAX_CODEBOOK,
            max_outcomes: DEFAULT_MAX_OUTCOMES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Invalid("blocklength must be positive".into()));
        }
        for (name, v) in [("rate", self.rate), ("rc", self.common_rate)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Domain(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.mc_samples == 0 {
            return Err(Error::Invalid("mc_samples must be positive".into()));
        }
        let k = self.triple.source().alphabet_size();
        if let Some(d) = &self.distortion {
            if d.shape() != (k, k) {
                return Err(Error::Dimension(format!("distortion table is {:?}, expected {k}x{k}", d.shape())));
            }
        }
        self.codebook_shape().map(|_| ())
    }

    /// `(messages, commons)` with the floors applied as written.
    pub fn codebook_shape(&self) -> Result<(usize, usize)> {
        let size = |r: f64| (self.n as f64 * (r + self.epsilon)).exp2().floor();
        let (m, c) = (size(self.rate), size(self.common_rate));
        let needed = m * c * self.n as f64;
        if !(needed <= self.max_codebook as f64) {
            return Err(Error::Capacity {
                what: "codebook symbols",
                needed: if needed.is_finite() { needed as u128 } else { u128::MAX },
                cap: self.max_codebook as u128,
            });
        }
        Ok((m as usize, c as usize))
    }

    pub fn distortion_measure(&self) -> DistortionMeasure {
        self.distortion
            .clone()
            .unwrap_or_else(|| DistortionMeasure::hamming(self.triple.source().alphabet_size()))
    }
}

/// Codewords stored row-major by `(i, j)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Codebook {
    messages: usize,
    commons: usize,
    n: usize,
    aux_size: usize,
    entries: Vec<usize>,
}

impl Codebook {
    pub fn from_entries(messages: usize, commons: usize, n: usize, aux_size: usize, entries: Vec<usize>) -> Result<Self> {
        if messages == 0 || commons == 0 || n == 0 {
            return Err(Error::Invalid("codebook dimensions must be positive".into()));
        }
        if entries.len() != messages * commons * n {
            return Err(Error::Dimension(format!(
                "{} symbols for a {messages}x{commons} codebook of length {n}",
                entries.len()
            )));
        }
        if let Some(&bad) = entries.iter().find(|&&u| u >= aux_size) {
            return Err(Error::IndexOutOfRange(format!("codeword symbol {bad} with |U| = {aux_size}")));
        }
        Ok(Self {
            messages,
            commons,
            n,
            aux_size,
            entries,
        })
    }

    pub fn messages(&self) -> usize {
        self.messages
    }

    pub fn commons(&self) -> usize {
        self.commons
    }

    pub fn blocklength(&self) -> usize {
        self.n
    }

    pub fn aux_size(&self) -> usize {
        self.aux_size
    }

    pub fn codeword(&self, i: usize, j: usize) -> Result<&[usize]> {
        if i >= self.messages || j >= self.commons {
            return Err(Error::IndexOutOfRange(format!(
                "codeword ({i}, {j}) in a {}x{} codebook",
                self.messages, self.commons
            )));
        }
        let start = (i * self.commons + j) * self.n;
        Ok(&self.entries[start..start + self.n])
    }

    /// Distinct codewords with multiplicities, in lexicographic order.
    pub fn distinct(&self) -> BTreeMap<&[usize], usize> {
        let mut m = BTreeMap::new();
        for w in self.entries.chunks(self.n) {
            *m.entry(w).or_insert(0) += 1;
        }
        m
    }
}

pub fn sample_codebook(cfg: &SimConfig) -> Result<Codebook> {
    cfg.validate()?;
    let (messages, commons) = cfg.codebook_shape()?;
    let pu = cfg.triple.u_marginal();
    let mut rng = stream(cfg.seed, Purpose::Codebook, 0);
    let entries = (0..messages * commons * cfg.n).map(|_| pu.sample(&mut rng)).collect();
    Codebook::from_entries(messages, commons, cfg.n, pu.alphabet_size(), entries)
}

/// `ln P(x|u)` laid out by `u`.
fn log_table(reverse: &Channel) -> Vec<Vec<f64>> {
    reverse.rows().iter().map(|r| r.mass().iter().map(|p| p.ln()).collect()).collect()
}

fn posterior_from_logs(logs: &[f64]) -> Vec<f64> {
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return vec![1.0 / logs.len() as f64; logs.len()];
    }
    let w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|v| v / z).collect()
}

fn check_sequence(x: &[usize], n: usize, k: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::Dimension(format!("sequence of length {} for blocklength {n}", x.len())));
    }
    if let Some(&bad) = x.iter().find(|&&s| s >= k) {
        return Err(Error::IndexOutOfRange(format!("symbol {bad} with alphabet size {k}")));
    }
    Ok(())
}

fn encoder_logs(codebook: &Codebook, logs: &[Vec<f64>], x: &[usize], j: usize) -> Vec<f64> {
    (0..codebook.messages)
        .map(|i| {
            let start = (i * codebook.commons + j) * codebook.n;
            codebook.entries[start..start + codebook.n]
                .iter()
                .zip(x)
                .map(|(&u, &xt)| logs[u][xt])
                .sum()
        })
        .collect()
}

/// Posterior `Q(i | x^n, j)` under the reverse channel `P(x|u)`, uniform when
/// every likelihood vanishes.
pub fn likelihood_encoder(codebook: &Codebook, reverse: &Channel, x: &[usize], j: usize) -> Result<Distribution> {
    if reverse.input_size() != codebook.aux_size {
        return Err(Error::Dimension("reverse channel input does not match the codebook alphabet".into()));
    }
    check_sequence(x, codebook.n, reverse.output_size())?;
    if j >= codebook.commons {
        return Err(Error::IndexOutOfRange(format!("common index {j} of {}", codebook.commons)));
    }
    let logs = log_table(reverse);
    Distribution::new(posterior_from_logs(&encoder_logs(codebook, &logs, x, j)))
}

pub fn decode<R: Rng + ?Sized>(codebook: &Codebook, synthesis: &Channel, i: usize, j: usize, rng: &mut R) -> Result<Vec<usize>> {
    if synthesis.input_size() != codebook.aux_size {
        return Err(Error::Dimension("synthesis channel input does not match the codebook alphabet".into()));
    }
    Ok(codebook.codeword(i, j)?.iter().map(|&u| synthesis.row(u).sample(rng)).collect())
}

/// Law of `prod_t W(. | u_t)` over all sequences, first symbol most significant.
fn product_law(codeword: &[usize], w: &Channel) -> Vec<f64> {
    let k = w.output_size();
    let mut law = vec![1.0];
    for &u in codeword {
        let row = w.row(u).mass();
        law = law.iter().flat_map(|&p| row.iter().map(move |&q| p * q)).collect();
    }
    debug_assert_eq!(law.len(), k.pow(codeword.len() as u32));
    law
}

fn mixture(codebook: &Codebook, w: &Channel, cap: usize) -> Result<Distribution> {
    crate::dist::product_size(w.output_size(), codebook.n, cap)?;
    let total = (codebook.messages * codebook.commons) as f64;
    let mut law: Option<Vec<f64>> = None;
    for (word, count) in codebook.distinct() {
        let part = product_law(word, w);
        let weight = count as f64 / total;
        match &mut law {
            None => law = Some(part.into_iter().map(|p| p * weight).collect()),
            Some(acc) => acc.iter_mut().zip(part).for_each(|(a, p)| *a += p * weight),
        }
    }
    Distribution::new(law.expect("codebook is nonempty"))
}

/// Exact output law: the uniform mixture over codewords of the product
/// synthesis channel.
pub fn exact_output_law(codebook: &Codebook, synthesis: &Channel, cap: usize) -> Result<Distribution> {
    mixture(codebook, synthesis, cap)
}

/// Source law of the idealized joint in which `(i, j)` is uniform and `x^n`
/// is produced from the codeword through the reverse channel.
pub fn idealized_source_law(codebook: &Codebook, reverse: &Channel, cap: usize) -> Result<Distribution> {
    mixture(codebook, reverse, cap)
}

/// Histogram of `samples` outputs with `(i, j)` uniform, as a law over `|X|^n`.
pub fn empirical_output_law(codebook: &Codebook, synthesis: &Channel, samples: usize, seed: u64, cap: usize) -> Result<Distribution> {
    let k = synthesis.output_size();
    let size = crate::dist::product_size(k, codebook.n, cap)?;
    let draws: Vec<usize> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream(seed, Purpose::Histogram, s as u64);
            let i = rng.random_range(0..codebook.messages);
            let j = rng.random_range(0..codebook.commons);
            let y = decode(codebook, synthesis, i, j, &mut rng).expect("indices drawn in range");
            crate::dist::sequence_index(&y, k)
        })
        .collect();
    let mut counts = vec![0.0; size];
    for d in draws {
        counts[d] += 1.0;
    }
    Distribution::new(counts.into_iter().map(|c| c / samples as f64).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TvMode {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub n: usize,
    pub tv_gap: f64,
    /// Confidence radius; zero for exact values.
    pub tv_ci: f64,
    pub distortion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub n: usize,
    pub seed: u64,
    pub messages: usize,
    pub commons: usize,
    pub i_xu: f64,
    pub i_yu: f64,
    pub tv_mode: TvMode,
    pub tv_gap: f64,
    pub tv_ci: f64,
    /// Empirical mean of the per-letter distortion over `mc_samples` passes.
    pub distortion: f64,
    pub distortion_se: f64,
    /// Single-letter `E d(X, Y)` of the triple.
    pub expected_distortion: f64,
    pub mc_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_n_trace: Option<Vec<TraceRow>>,
}

/// A sampled codebook together with the channels the scheme needs.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: SimConfig,
    codebook: Codebook,
    reverse: Channel,
    log_reverse: Vec<Vec<f64>>,
}

impl Simulator {
    pub fn new(cfg: SimConfig) -> Result<Self> {
        let codebook = sample_codebook(&cfg)?;
        Self::with_codebook(cfg, codebook)
    }

    pub fn with_codebook(cfg: SimConfig, codebook: Codebook) -> Result<Self> {
        cfg.validate()?;
        if codebook.n != cfg.n || codebook.aux_size != cfg.triple.aux_size() {
            return Err(Error::Dimension("codebook does not match the configuration".into()));
        }
        let reverse = cfg.triple.reverse_channel();
        let log_reverse = log_table(&reverse);
        Ok(Self {
            cfg,
            codebook,
            reverse,
            log_reverse,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn reverse_channel(&self) -> &Channel {
        &self.reverse
    }

    pub fn encode_posterior(&self, x: &[usize], j: usize) -> Result<Distribution> {
        likelihood_encoder(&self.codebook, &self.reverse, x, j)
    }

    pub fn decode<R: Rng + ?Sized>(&self, i: usize, j: usize, rng: &mut R) -> Result<Vec<usize>> {
        decode(&self.codebook, self.cfg.triple.synthesis(), i, j, rng)
    }

    pub fn exact_output_law(&self) -> Result<Distribution> {
        exact_output_law(&self.codebook, self.cfg.triple.synthesis(), self.cfg.max_outcomes)
    }

    fn enumerable(&self) -> bool {
        crate::dist::product_size(self.cfg.triple.source().alphabet_size(), self.cfg.n, self.cfg.max_outcomes).is_ok()
    }

    /// One end-to-end pass: per-letter distortion of `(x^n, y^n)`.
    fn pass(&self, index: u64, d: &DistortionMeasure) -> f64 {
        let n = self.cfg.n;
        let src = self.cfg.triple.source();
        let mut rng = stream(self.cfg.seed, Purpose::SourceDraw, index);
        let x: Vec<usize> = (0..n).map(|_| src.sample(&mut rng)).collect();
        let j = rng.random_range(0..self.codebook.commons);
        let post = posterior_from_logs(&encoder_logs(&self.codebook, &self.log_reverse, &x, j));
        let i = Distribution::new(post)
            .expect("posterior is normalized")
            .sample(&mut stream(self.cfg.seed, Purpose::Encoder, index));
        let y = self
            .decode(i, j, &mut stream(self.cfg.seed, Purpose::Decoder, index))
            .expect("encoder output is in range");
        x.iter().zip(&y).map(|(&a, &b)| d.get(a, b)).sum::<f64>() / n as f64
    }

    /// `E_{Y~Q}[(1 - P(Y)/Q(Y))^+]` from output draws, with a bootstrap
    /// radius (95% percentile interval half-width).
    fn tv_monte_carlo(&self) -> (f64, f64) {
        let syn = self.cfg.triple.synthesis();
        let src = self.cfg.triple.source();
        let log_syn = log_table(syn);
        let words: Vec<&[usize]> = self.codebook.entries.chunks(self.cfg.n).collect();
        let ln_total = (words.len() as f64).ln();
        let terms: Vec<f64> = (0..self.cfg.mc_samples as u64)
            .into_par_iter()
            .map(|s| {
                let mut rng = stream(self.cfg.seed, Purpose::TvEstimate, s);
                let i = rng.random_range(0..self.codebook.messages);
                let j = rng.random_range(0..self.codebook.commons);
                let y = self.decode(i, j, &mut rng).expect("indices drawn in range");
                let logs: Vec<f64> = words
                    .iter()
                    .map(|w| w.iter().zip(&y).map(|(&u, &yt)| log_syn[u][yt]).sum())
                    .collect();
                let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let ln_q = top + logs.iter().map(|l| (l - top).exp()).sum::<f64>().ln() - ln_total;
                let ln_p: f64 = y.iter().map(|&v| src.prob(v).ln()).sum();
                (1.0 - (ln_p - ln_q).exp()).max(0.0)
            })
            .collect();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let estimate = mean(&terms);
        let mut rng = stream(self.cfg.seed, Purpose::Bootstrap, 0);
        let mut boots: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
            .map(|_| {
                let resample: Vec<f64> = (0..terms.len()).map(|_| terms[rng.random_range(0..terms.len())]).collect();
                mean(&resample)
            })
            .collect();
        boots.sort_by(f64::total_cmp);
        let lo = boots[BOOTSTRAP_RESAMPLES / 40];
        let hi = boots[BOOTSTRAP_RESAMPLES - 1 - BOOTSTRAP_RESAMPLES / 40];
        (estimate.clamp(0.0, 1.0), 0.5 * (hi - lo))
    }

    /// Total variation between the output law and the i.i.d. source law.
    pub fn tv_gap(&self) -> Result<(f64, f64, TvMode)> {
        if self.enumerable() {
            let target = product_extension(self.cfg.triple.source(), self.cfg.n, self.cfg.max_outcomes)?;
            Ok((tv_distance(&target, &self.exact_output_law()?)?, 0.0, TvMode::Exact))
        } else {
            let (tv, ci) = self.tv_monte_carlo();
            Ok((tv, ci, TvMode::MonteCarlo))
        }
    }

    /// Mean per-letter distortion over `mc_samples` passes and its standard error.
    pub fn end_to_end_distortion(&self) -> (f64, f64) {
        let d = self.cfg.distortion_measure();
        let m = self.cfg.mc_samples;
        let values: Vec<f64> = (0..m as u64).into_par_iter().map(|s| self.pass(s, &d)).collect();
        let mean = values.iter().sum::<f64>() / m as f64;
        let var = if m > 1 {
            values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64
        } else {
            0.0
        };
        (mean, (var / m as f64).sqrt())
    }

    pub fn run(&self) -> Result<SimReport> {
        let (tv_gap, tv_ci, tv_mode) = self.tv_gap()?;
        let (distortion, distortion_se) = self.end_to_end_distortion();
        let t = &self.cfg.triple;
        Ok(SimReport {
            n: self.cfg.n,
            seed: self.cfg.seed,
            messages: self.codebook.messages,
            commons: self.codebook.commons,
            i_xu: t.mutual_information(Pair::XU),
            i_yu: t.mutual_information(Pair::UY),
            tv_mode,
            tv_gap,
            tv_ci,
            distortion,
            distortion_se,
            expected_distortion: t.expected_distortion(&self.cfg.distortion_measure())?,
            mc_samples: self.cfg.mc_samples,
            per_n_trace: None,
        })
    }
}

pub fn run(cfg: &SimConfig) -> Result<SimReport> {
    Simulator::new(cfg.clone())?.run()
}

fn at_blocklength(cfg: &SimConfig, n: usize, draw: u64) -> SimConfig {
    SimConfig {
        n,
        seed: derive_seed(cfg.seed, Purpose::SweepSeed, ((n as u64) << 32) | draw),
        ..cfg.clone()
    }
}

/// One run per blocklength, each with its own derived seed.
pub fn sweep(cfg: &SimConfig, n_list: &[usize]) -> Result<Vec<TraceRow>> {
    sweep_median(cfg, n_list, 1)
}

/// Per blocklength, the median over `draws` independent codebooks of the
/// tv gap and of the empirical distortion.
pub fn sweep_median(cfg: &SimConfig, n_list: &[usize], draws: usize) -> Result<Vec<TraceRow>> {
    if draws == 0 {
        return Err(Error::Invalid("at least one codebook draw is needed".into()));
    }
    let cells: Vec<(usize, u64)> = n_list.iter().flat_map(|&n| (0..draws as u64).map(move |d| (n, d))).collect();
    let reports: Vec<SimReport> = cells
        .par_iter()
        .map(|&(n, d)| run(&at_blocklength(cfg, n, d)))
        .collect::<Result<_>>()?;
    let median = |mut v: Vec<f64>| {
        v.sort_by(f64::total_cmp);
        let m = v.len();
        if m % 2 == 1 {
            v[m / 2]
        } else {
            0.5 * (v[m / 2 - 1] + v[m / 2])
        }
    };
    Ok(reports
        .chunks(draws)
        .zip(n_list)
        .map(|(group, &n)| TraceRow {
            n,
            tv_gap: median(group.iter().map(|r| r.tv_gap).collect()),
            tv_ci: median(group.iter().map(|r| r.tv_ci).collect()),
            distortion: median(group.iter().map(|r| r.distortion).collect()),
        })
        .collect())
}
