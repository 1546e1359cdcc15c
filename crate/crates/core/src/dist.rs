//! Finite-alphabet probability primitives.
//!
//! Everything here is an immutable value type: a [`Distribution`] is a
//! validated probability mass function, a [`Channel`] is a row-stochastic
//! table, and a [`TripleJoint`] stores the law of `(X, U, Y)` in factored
//! form `P(x) P(u|x) P(y|u)` so that `X - U - Y` is Markov by construction.
//!
//! Logarithms are base 2 and `0 log 0 = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance for all probability validity checks.
pub const PROB_TOL: f64 = 1e-12;

/// Largest total-mass drift that is silently renormalized at construction.
pub const RENORM_TOL: f64 = 1e-9;

/// Default cap on the number of outcomes of an enumerated product alphabet.
pub const DEFAULT_MAX_OUTCOMES: usize = 1 << 24;

fn validate_mass(mut mass: Vec<f64>, what: &str) -> Result<Vec<f64>> {
    if mass.is_empty() {
        return Err(Error::Invalid(format!("{what}: empty probability vector")));
    }
    for (k, p) in mass.iter_mut().enumerate() {
        if !p.is_finite() {
            return Err(Error::Invalid(format!("{what}: entry {k} is not finite")));
        }
        if *p < 0.0 {
            if *p < -PROB_TOL {
                return Err(Error::Invalid(format!("{what}: entry {k} is negative ({p})")));
            }
            *p = 0.0;
        }
    }
    let total: f64 = mass.iter().sum();
    let drift = (total - 1.0).abs();
    if drift > RENORM_TOL {
        return Err(Error::Invalid(format!("{what}: entries sum to {total}, expected 1")));
    }
    if drift > PROB_TOL {
        mass.iter_mut().for_each(|p| *p /= total);
    }
    Ok(mass)
}

/// `p log2(p / q)` with the `0 log 0 = 0` convention.
#[inline]
pub(crate) fn plogp_ratio(p: f64, q: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        p * (p / q).log2()
    }
}

/// Probability mass function over `{0, .., k-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionRepr", into = "DistributionRepr")]
pub struct Distribution {
    mass: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct DistributionRepr {
    alphabet: usize,
    mass: Vec<f64>,
}

impl TryFrom<DistributionRepr> for Distribution {
    type Error = Error;

    fn try_from(repr: DistributionRepr) -> Result<Self> {
        if repr.alphabet != repr.mass.len() {
            return Err(Error::Dimension(format!(
                "alphabet is {} but mass has {} entries",
                repr.alphabet,
                repr.mass.len()
            )));
        }
        Distribution::new(repr.mass)
    }
}

impl From<Distribution> for DistributionRepr {
    fn from(d: Distribution) -> Self {
        DistributionRepr {
            alphabet: d.mass.len(),
            mass: d.mass,
        }
    }
}

impl Distribution {
    pub fn new(mass: Vec<f64>) -> Result<Self> {
        Ok(Self {
            mass: validate_mass(mass, "distribution")?,
        })
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Invalid("uniform distribution over an empty alphabet".into()));
        }
        Ok(Self {
            mass: vec![1.0 / k as f64; k],
        })
    }

    pub fn point_mass(k: usize, at: usize) -> Result<Self> {
        if at >= k {
            return Err(Error::IndexOutOfRange(format!("point mass at {at} in alphabet of size {k}")));
        }
        let mut mass = vec![0.0; k];
        mass[at] = 1.0;
        Ok(Self { mass })
    }

    pub fn alphabet_size(&self) -> usize {
        self.mass.len()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn prob(&self, symbol: usize) -> f64 {
        self.mass[symbol]
    }

    /// Shannon entropy in bits.
    pub fn entropy(&self) -> f64 {
        -self.mass.iter().map(|&p| plogp_ratio(p, 1.0)).sum::<f64>()
    }

    /// Index of the symbol with the smallest cumulative mass exceeding `u`.
    pub fn sample_with(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (k, &p) in self.mass.iter().enumerate() {
            acc += p;
            if u < acc {
                return k;
            }
        }
        // u landed in the rounding gap at the top; return the last symbol with mass
        self.mass.iter().rposition(|&p| p > 0.0).unwrap_or(0)
    }

    pub fn sample<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.sample_with(rng.random::<f64>())
    }
}

/// Row-stochastic conditional probability table `W(out | in)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RowsRepr", into = "RowsRepr")]
pub struct Channel {
    rows: Vec<Distribution>,
}

#[derive(Serialize, Deserialize)]
struct RowsRepr {
    rows: Vec<Vec<f64>>,
}

impl TryFrom<RowsRepr> for Channel {
    type Error = Error;

    fn try_from(repr: RowsRepr) -> Result<Self> {
        Channel::new(repr.rows)
    }
}

impl From<Channel> for RowsRepr {
    fn from(c: Channel) -> Self {
        RowsRepr {
            rows: c.rows.into_iter().map(|r| r.mass).collect(),
        }
    }
}

impl Channel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Invalid("channel has no rows".into()));
        }
        let width = rows[0].len();
        let mut out = Vec::with_capacity(rows.len());
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != width {
                return Err(Error::Dimension(format!(
                    "channel row {i} has {} entries, expected {width}",
                    row.len()
                )));
            }
            out.push(Distribution {
                mass: validate_mass(row, &format!("channel row {i}"))?,
            });
        }
        Ok(Self { rows: out })
    }

    pub fn from_rows(rows: Vec<Distribution>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::Invalid("channel has no rows".into()));
        };
        let width = first.alphabet_size();
        if rows.iter().any(|r| r.alphabet_size() != width) {
            return Err(Error::Dimension("channel rows differ in length".into()));
        }
        Ok(Self { rows })
    }

    pub fn identity(k: usize) -> Result<Self> {
        (0..k)
            .map(|i| Distribution::point_mass(k, i))
            .collect::<Result<Vec<_>>>()
            .and_then(Self::from_rows)
    }

    /// Every input maps to the same output law.
    pub fn constant(inputs: usize, output: &Distribution) -> Result<Self> {
        Self::from_rows(vec![output.clone(); inputs])
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.rows[0].alphabet_size()
    }

    pub fn row(&self, input: usize) -> &Distribution {
        &self.rows[input]
    }

    pub fn rows(&self) -> &[Distribution] {
        &self.rows
    }

    pub fn prob(&self, input: usize, output: usize) -> f64 {
        self.rows[input].mass[output]
    }

    /// Output law when the input is drawn from `input`.
    pub fn push_forward(&self, input: &Distribution) -> Result<Distribution> {
        if input.alphabet_size() != self.input_size() {
            return Err(Error::Dimension(format!(
                "input law has {} symbols, channel expects {}",
                input.alphabet_size(),
                self.input_size()
            )));
        }
        let mut out = vec![0.0; self.output_size()];
        for (row, &w) in self.rows.iter().zip(input.mass()) {
            for (o, &p) in out.iter_mut().zip(row.mass()) {
                *o += w * p;
            }
        }
        Distribution::new(out)
    }

    /// Joint law `P(in) W(out|in)` as a table indexed `(in, out)`.
    pub fn joint_with(&self, input: &Distribution) -> Result<JointPmf> {
        if input.alphabet_size() != self.input_size() {
            return Err(Error::Dimension("input law does not match channel input size".into()));
        }
        let cols = self.output_size();
        let mut data = Vec::with_capacity(self.input_size() * cols);
        for (row, &w) in self.rows.iter().zip(input.mass()) {
            data.extend(row.mass().iter().map(|&p| w * p));
        }
        JointPmf::new(self.input_size(), cols, data)
    }

    /// Cascade `self` followed by `next`.
    pub fn compose(&self, next: &Channel) -> Result<Channel> {
        if self.output_size() != next.input_size() {
            return Err(Error::Dimension(format!(
                "cannot compose channel with {} outputs into one with {} inputs",
                self.output_size(),
                next.input_size()
            )));
        }
        let rows = self
            .rows
            .iter()
            .map(|row| next.push_forward(row))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }

    /// Bayes reversal: the channel `P(in | out)` given the input law.
    /// Outputs with zero probability get the input law as their row.
    pub fn reverse(&self, input: &Distribution) -> Result<Channel> {
        let output = self.push_forward(input)?;
        let rows = (0..self.output_size())
            .map(|o| {
                let po = output.prob(o);
                if po <= 0.0 {
                    return Ok(input.clone());
                }
                let mass = (0..self.input_size())
                    .map(|i| input.prob(i) * self.prob(i, o) / po)
                    .collect();
                Distribution::new(mass)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }
}

/// Bivariate probability mass function stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl JointPmf {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "joint table of {rows}x{cols} cannot hold {} entries",
                data.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            data: validate_mass(data, "joint")?,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged joint table".into()));
        }
        Self::new(r, c, rows.concat())
    }

    /// Independent coupling `p(a) q(b)`.
    pub fn product(p: &Distribution, q: &Distribution) -> Self {
        let data = p
            .mass()
            .iter()
            .flat_map(|&a| q.mass().iter().map(move |&b| a * b))
            .collect();
        Self {
            rows: p.alphabet_size(),
            cols: q.alphabet_size(),
            data,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        self.data[a * self.cols + b]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row_marginal(&self) -> Distribution {
        let mass = self.data.chunks(self.cols).map(|r| r.iter().sum()).collect();
        Distribution { mass }
    }

    pub fn col_marginal(&self) -> Distribution {
        let mut mass = vec![0.0; self.cols];
        for r in self.data.chunks(self.cols) {
            for (m, &p) in mass.iter_mut().zip(r) {
                *m += p;
            }
        }
        Distribution { mass }
    }

    pub fn transpose(&self) -> Self {
        let mut data = vec![0.0; self.data.len()];
        for a in 0..self.rows {
            for b in 0..self.cols {
                data[b * self.rows + a] = self.get(a, b);
            }
        }
        Self {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }
}

/// Nonnegative per-letter distortion `d(source symbol, reconstruction symbol)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RowsRepr", into = "RowsRepr")]
pub struct DistortionMeasure {
    rows: usize,
    cols: usize,
    table: Vec<f64>,
}

impl TryFrom<RowsRepr> for DistortionMeasure {
    type Error = Error;

    fn try_from(repr: RowsRepr) -> Result<Self> {
        DistortionMeasure::new(repr.rows)
    }
}

impl From<DistortionMeasure> for RowsRepr {
    fn from(d: DistortionMeasure) -> Self {
        RowsRepr {
            rows: d.table.chunks(d.cols).map(<[f64]>::to_vec).collect(),
        }
    }
}

impl DistortionMeasure {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 || rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("distortion table must be a nonempty rectangle".into()));
        }
        let table = rows.concat();
        if let Some(bad) = table.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Invalid(format!("distortion entry {bad} is not a finite nonnegative number")));
        }
        Ok(Self { rows: r, cols: c, table })
    }

    pub fn hamming(k: usize) -> Self {
        let table = (0..k * k)
            .map(|idx| if idx / k == idx % k { 0.0 } else { 1.0 })
            .collect();
        Self { rows: k, cols: k, table }
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.table[x * self.cols + y]
    }

    pub fn max_entry(&self) -> f64 {
        self.table.iter().copied().fold(0.0, f64::max)
    }
}

/// Joint law of two random variables with prescribed marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    joint: JointPmf,
}

impl Coupling {
    pub fn joint(&self) -> &JointPmf {
        &self.joint
    }

    /// `Pr(first != second)` on a common alphabet.
    pub fn mismatch_prob(&self) -> f64 {
        // summing off-diagonal mass keeps identical marginals at exactly 0
        let (r, c) = self.joint.shape();
        (0..r)
            .flat_map(|a| (0..c).filter(move |&b| b != a).map(move |b| (a, b)))
            .map(|(a, b)| self.joint.get(a, b))
            .sum()
    }
}

/// Law of `(X, U, Y)` stored as `P(x) P(u|x) P(y|u)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TripleRepr", into = "TripleRepr")]
pub struct TripleJoint {
    source: Distribution,
    forward: Channel,
    synthesis: Channel,
}

#[derive(Serialize, Deserialize)]
struct TripleRepr {
    source: Distribution,
    forward: Channel,
    synthesis: Channel,
}

impl TryFrom<TripleRepr> for TripleJoint {
    type Error = Error;

    fn try_from(r: TripleRepr) -> Result<Self> {
        TripleJoint::new(r.source, r.forward, r.synthesis)
    }
}

impl From<TripleJoint> for TripleRepr {
    fn from(t: TripleJoint) -> Self {
        TripleRepr {
            source: t.source,
            forward: t.forward,
            synthesis: t.synthesis,
        }
    }
}

/// A pair of coordinates of a [`TripleJoint`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pair {
    XU,
    UY,
    XY,
}

impl TripleJoint {
    pub fn new(source: Distribution, forward: Channel, synthesis: Channel) -> Result<Self> {
        if forward.input_size() != source.alphabet_size() {
            return Err(Error::Dimension(format!(
                "P(u|x) has {} rows but the source has {} symbols",
                forward.input_size(),
                source.alphabet_size()
            )));
        }
        if synthesis.input_size() != forward.output_size() {
            return Err(Error::Dimension(format!(
                "P(y|u) has {} rows but U has {} symbols",
                synthesis.input_size(),
                forward.output_size()
            )));
        }
        Ok(Self {
            source,
            forward,
            synthesis,
        })
    }

    pub fn source(&self) -> &Distribution {
        &self.source
    }

    pub fn forward(&self) -> &Channel {
        &self.forward
    }

    pub fn synthesis(&self) -> &Channel {
        &self.synthesis
    }

    pub fn aux_size(&self) -> usize {
        self.forward.output_size()
    }

    pub fn u_marginal(&self) -> Distribution {
        self.forward
            .push_forward(&self.source)
            .expect("shapes checked at construction")
    }

    pub fn y_marginal(&self) -> Distribution {
        self.synthesis
            .push_forward(&self.u_marginal())
            .expect("shapes checked at construction")
    }

    /// Reverse channel `P(x|u)`.
    pub fn reverse_channel(&self) -> Channel {
        self.forward
            .reverse(&self.source)
            .expect("shapes checked at construction")
    }

    pub fn marginal(&self, pair: Pair) -> JointPmf {
        let joint = match pair {
            Pair::XU => self.forward.joint_with(&self.source),
            Pair::UY => self.synthesis.joint_with(&self.u_marginal()),
            Pair::XY => self
                .forward
                .compose(&self.synthesis)
                .and_then(|c| c.joint_with(&self.source)),
        };
        joint.expect("shapes checked at construction")
    }

    pub fn mutual_information(&self, pair: Pair) -> f64 {
        mutual_information(&self.marginal(pair))
    }

    /// `E[d(X, Y)]`.
    pub fn expected_distortion(&self, d: &DistortionMeasure) -> Result<f64> {
        expected_distortion(&self.marginal(Pair::XY), d)
    }
}

fn check_same_alphabet(p: &Distribution, q: &Distribution) -> Result<()> {
    if p.alphabet_size() != q.alphabet_size() {
        return Err(Error::Dimension(format!(
            "alphabets differ: {} vs {}",
            p.alphabet_size(),
            q.alphabet_size()
        )));
    }
    Ok(())
}

/// Total variation distance, `sup_A |P(A) - Q(A)|`, which on a finite
/// alphabet is half the L1 distance between the mass vectors.
pub fn tv_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    check_same_alphabet(p, q)?;
    Ok(tv_slices(p.mass(), q.mass()))
}

/// Half-L1 distance between two equally long mass vectors.
pub(crate) fn tv_slices(p: &[f64], q: &[f64]) -> f64 {
    // summing only the positive part avoids cancellation in the half-sum
    let pos: f64 = p.iter().zip(q).map(|(a, b)| (a - b).max(0.0)).sum();
    let neg: f64 = p.iter().zip(q).map(|(a, b)| (b - a).max(0.0)).sum();
    (0.5 * (pos + neg)).clamp(0.0, 1.0)
}

/// Coupling of `p` and `q` with `Pr(first != second) = d_TV(p, q)`.
///
/// The diagonal carries `min(p_k, q_k)`; the residuals `(p - q)^+` and
/// `(q - p)^+` are paired proportionally off the diagonal.
pub fn maximal_coupling(p: &Distribution, q: &Distribution) -> Result<Coupling> {
    check_same_alphabet(p, q)?;
    let k = p.alphabet_size();
    let tv = tv_slices(p.mass(), q.mass());
    let mut data = vec![0.0; k * k];
    for a in 0..k {
        data[a * k + a] = p.prob(a).min(q.prob(a));
    }
    if tv > 0.0 {
        for a in 0..k {
            let excess = (p.prob(a) - q.prob(a)).max(0.0);
            if excess == 0.0 {
                continue;
            }
            for b in 0..k {
                let deficit = (q.prob(b) - p.prob(b)).max(0.0);
                data[a * k + b] += excess * deficit / tv;
            }
        }
    }
    Ok(Coupling {
        joint: JointPmf::new(k, k, data)?,
    })
}

/// `I(A;B)` in bits for a bivariate pmf.
pub fn mutual_information(joint: &JointPmf) -> f64 {
    let pa = joint.row_marginal();
    let pb = joint.col_marginal();
    let (r, c) = joint.shape();
    let mut total = 0.0;
    for a in 0..r {
        for b in 0..c {
            total += plogp_ratio(joint.get(a, b), pa.prob(a) * pb.prob(b));
        }
    }
    total.max(0.0)
}

/// `sum p(x, y) d(x, y)`.
pub fn expected_distortion(joint: &JointPmf, d: &DistortionMeasure) -> Result<f64> {
    if joint.shape() != d.shape() {
        return Err(Error::Dimension(format!(
            "joint is {:?} but distortion table is {:?}",
            joint.shape(),
            d.shape()
        )));
    }
    let (r, c) = joint.shape();
    Ok((0..r)
        .flat_map(|x| (0..c).map(move |y| (x, y)))
        .map(|(x, y)| joint.get(x, y) * d.get(x, y))
        .sum())
}

/// Number of outcomes of the `n`-fold product of a `k`-letter alphabet, or a
/// capacity error if it exceeds `cap`.
pub fn product_size(k: usize, n: usize, cap: usize) -> Result<usize> {
    let needed = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > cap as u128 {
        return Err(Error::Capacity {
            what: "product alphabet",
            needed,
            cap: cap as u128,
        });
    }
    Ok(needed as usize)
}

/// I.i.d. extension of `p` to length-`n` sequences. Sequence `(x_1, .., x_n)`
/// is stored at index `sum x_t k^(n-t)`, first symbol most significant.
pub fn product_extension(p: &Distribution, n: usize, cap: usize) -> Result<Distribution> {
    let size = product_size(p.alphabet_size(), n, cap)?;
    let mut mass = Vec::with_capacity(size);
    mass.push(1.0);
    for _ in 0..n {
        mass = mass
            .iter()
            .flat_map(|&m| p.mass().iter().map(move |&q| m * q))
            .collect();
    }
    Ok(Distribution { mass })
}

/// Symbols of the sequence stored at `index` (inverse of the product layout).
pub fn sequence_at(index: usize, k: usize, n: usize) -> Vec<usize> {
    let mut seq = vec![0; n];
    let mut rest = index;
    for slot in seq.iter_mut().rev() {
        *slot = rest % k;
        rest /= k;
    }
    seq
}

/// Index of `seq` in the product layout.
pub fn sequence_index(seq: &[usize], k: usize) -> usize {
    seq.iter().fold(0, |acc, &s| acc * k + s)
}
