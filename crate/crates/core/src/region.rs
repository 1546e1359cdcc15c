//! Achievable region with perfect realism over finite alphabets.
//!
//! A triple `(R, R_c, delta)` is in the region when some `(U, Y)` with
//! `X - U - Y`, `Y ~ P_X`, `R >= I(X;U)`, `R + R_c >= I(Y;U)` and
//! `E d(X,Y) <= delta` exists. The boundary is the minimum over such `(U, Y)`
//! of `max(I(X;U), I(Y;U) - R_c)`.
//!
//! The search is over `P(u|x)` and `P(y|u)` with a fixed cardinality for `U`
//! (`aux_size`), so every reported value is an upper bound on the boundary
//! tagged with the cardinality used. The realism constraint is eliminated by
//! solving the last row of `P(y|u)`; leftover negativity and the distortion
//! constraint are handled by an exact penalty whose weight is escalated until
//! the violation is below tolerance.

use std::cmp::Ordering;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::common_rate::CommonRate;
use crate::dist::{
    mutual_information, tv_distance, Channel, DistortionMeasure, Distribution, JointPmf, Pair, TripleJoint,
};
use crate::error::{Error, Result};
use crate::simplex::NelderMead;
use crate::streams::{stream, Purpose};

/// Default grid cap for [`brute_force_oracle`], in evaluated grid points.
pub const ORACLE_MAX_POINTS: u64 = 4_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionQuery {
    /// Rate to test for membership; optional when only the boundary is wanted.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<f64>,
    #[serde(rename = "rc", alias = "common_rate")]
    pub common_rate: CommonRate,
    pub delta: f64,
    pub source: Distribution,
    pub distortion: DistortionMeasure,
    /// Cardinality of `U`; defaults to `|X| + 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux_size: Option<usize>,
}

impl RegionQuery {
    pub fn new(source: Distribution, distortion: DistortionMeasure, delta: f64, common_rate: CommonRate) -> Self {
        Self {
            rate: None,
            common_rate,
            delta,
            source,
            distortion,
            aux_size: None,
        }
    }

    pub fn with_rate(mut self, rate: f64) -> Self {
        self.rate = Some(rate);
        self
    }

    pub fn with_aux_size(mut self, aux_size: usize) -> Self {
        self.aux_size = Some(aux_size);
        self
    }

    pub fn aux_size(&self) -> usize {
        self.aux_size.unwrap_or(self.source.alphabet_size() + 1)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.source.alphabet_size();
        if self.distortion.shape() != (k, k) {
            return Err(Error::Dimension(format!(
                "distortion table is {:?}, expected {k}x{k}",
                self.distortion.shape()
            )));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::Domain(format!("distortion budget must be finite and nonnegative, got {}", self.delta)));
        }
        if let Some(r) = self.rate {
            if !(r >= 0.0) {
                return Err(Error::Domain(format!("rate must be nonnegative, got {r}")));
            }
        }
        if self.aux_size() == 0 {
            return Err(Error::Domain("aux_size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Knobs of the multi-start search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub seed: u64,
    /// Random parameter vectors screened before local search.
    pub candidates: usize,
    /// Screened candidates refined by local search.
    pub starts: usize,
    /// Evaluation budget per local search pass, per free parameter.
    pub evals_per_dim: usize,
    /// Nelder-Mead restarts per penalty level.
    pub restarts: usize,
    pub constraint_tol: f64,
    pub objective_tol: f64,
    pub penalty_start: f64,
    pub penalty_max: f64,
    /// Grid points allowed for the coarse oracle seed (binary sources only).
    pub seed_grid_points: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            candidates: 2000,
            starts: 12,
            evals_per_dim: 1000,
            restarts: 8,
            constraint_tol: 1e-9,
            objective_tol: 1e-10,
            penalty_start: 10.0,
            penalty_max: 1e12,
            seed_grid_points: 20_000,
        }
    }
}

/// Information quantities of a candidate, recomputed from the triple alone.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Achieved {
    pub i_xu: f64,
    pub i_yu: f64,
    pub distortion: f64,
    /// `d_TV(law of Y, source)`.
    pub realism_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionWitness {
    pub triple: TripleJoint,
    pub achieved: Achieved,
}

impl RegionWitness {
    pub fn from_triple(triple: TripleJoint, d: &DistortionMeasure) -> Result<Self> {
        let achieved = Achieved {
            i_xu: triple.mutual_information(Pair::XU),
            i_yu: triple.mutual_information(Pair::UY),
            distortion: triple.expected_distortion(d)?,
            realism_gap: tv_distance(&triple.y_marginal(), triple.source())?,
        };
        Ok(Self { triple, achieved })
    }

    /// Smallest rate this witness supports at common rate `rc`.
    pub fn rate_needed(&self, rc: CommonRate) -> f64 {
        let a = &self.achieved;
        match rc {
            CommonRate::Infinite => a.i_xu,
            CommonRate::Finite(r) => a.i_xu.max(a.i_yu - r),
        }
    }

    pub fn certifies(&self, rate: f64, rc: CommonRate, delta: f64, tol: f64) -> bool {
        let a = &self.achieved;
        a.realism_gap <= tol
            && a.i_xu <= rate + tol
            && a.i_yu <= rate + rc.bits() + tol
            && a.distortion <= delta + tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinRateReport {
    pub min_rate: f64,
    pub delta: f64,
    pub common_rate: CommonRate,
    pub aux_size: usize,
    pub witness: RegionWitness,
    /// Local searches run.
    pub starts: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Membership {
    Member {
        witness: RegionWitness,
    },
    /// The search found no witness. This does not prove non-membership.
    NotFound {
        best_rate: Option<f64>,
        aux_size: usize,
        starts: usize,
    },
}

/// Search problem with the realism constraint eliminated through the last
/// row of `P(y|u)`. Parameters are unnormalized square roots of probabilities:
/// `|X|` rows of `P(u|x)` followed by the first `|U| - 1` rows of `P(y|u)`.
struct Problem<'a> {
    src: &'a [f64],
    d: &'a DistortionMeasure,
    nx: usize,
    nu: usize,
    delta: f64,
    rc: f64,
}

#[derive(Debug, Clone, Copy)]
struct Eval {
    objective: f64,
    violation: f64,
}

fn row_from_roots(z: &[f64], out: &mut [f64]) {
    let s: f64 = z.iter().map(|v| v * v).sum();
    if s > 0.0 && s.is_finite() {
        out.iter_mut().zip(z).for_each(|(o, v)| *o = v * v / s);
    } else {
        out.fill(1.0 / out.len() as f64);
    }
}

impl<'a> Problem<'a> {
    fn new(q: &'a RegionQuery) -> Self {
        Self {
            src: q.source.mass(),
            d: &q.distortion,
            nx: q.source.alphabet_size(),
            nu: q.aux_size(),
            delta: q.delta,
            rc: q.common_rate.bits(),
        }
    }

    fn dims(&self) -> usize {
        self.nx * self.nu + (self.nu - 1) * self.nx
    }

    /// `(P(u|x), P(y|u))` row-major.
    fn decode(&self, params: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (nx, nu) = (self.nx, self.nu);
        let mut fwd = vec![0.0; nx * nu];
        for x in 0..nx {
            row_from_roots(&params[x * nu..(x + 1) * nu], &mut fwd[x * nu..(x + 1) * nu]);
        }
        let mut pu = vec![0.0; nu];
        for x in 0..nx {
            for u in 0..nu {
                pu[u] += self.src[x] * fwd[x * nu + u];
            }
        }
        let mut syn = vec![0.0; nu * nx];
        let base = nx * nu;
        for u in 0..nu - 1 {
            row_from_roots(&params[base + u * nx..base + (u + 1) * nx], &mut syn[u * nx..(u + 1) * nx]);
        }
        let last = nu - 1;
        let pivot = &mut vec![0.0; nx];
        if pu[last] > 1e-15 {
            for y in 0..nx {
                let covered: f64 = (0..last).map(|u| pu[u] * syn[u * nx + y]).sum();
                pivot[y] = ((self.src[y] - covered) / pu[last]).max(0.0);
            }
            let s: f64 = pivot.iter().sum();
            if s > 0.0 {
                pivot.iter_mut().for_each(|v| *v /= s);
            } else {
                pivot.copy_from_slice(self.src);
            }
        } else {
            pivot.copy_from_slice(self.src);
        }
        syn[last * nx..].copy_from_slice(pivot);
        (fwd, syn)
    }

    fn encode(&self, fwd: &[f64], syn: &[f64]) -> Vec<f64> {
        let mut p: Vec<f64> = fwd.iter().map(|v| v.max(0.0).sqrt()).collect();
        p.extend(syn[..(self.nu - 1) * self.nx].iter().map(|v| v.max(0.0).sqrt()));
        p
    }

    fn evaluate(&self, params: &[f64]) -> Eval {
        let (fwd, syn) = self.decode(params);
        let (nx, nu) = (self.nx, self.nu);
        let mut pu = vec![0.0; nu];
        for x in 0..nx {
            for u in 0..nu {
                pu[u] += self.src[x] * fwd[x * nu + u];
            }
        }
        let mut py = vec![0.0; nx];
        for u in 0..nu {
            for y in 0..nx {
                py[y] += pu[u] * syn[u * nx + y];
            }
        }
        let mut i_xu = 0.0;
        let mut dist = 0.0;
        for x in 0..nx {
            for u in 0..nu {
                let j = self.src[x] * fwd[x * nu + u];
                if j > 0.0 {
                    i_xu += j * (fwd[x * nu + u] / pu[u]).log2();
                    for y in 0..nx {
                        dist += j * syn[u * nx + y] * self.d.get(x, y);
                    }
                }
            }
        }
        let mut i_yu = 0.0;
        for u in 0..nu {
            for y in 0..nx {
                let w = syn[u * nx + y];
                if pu[u] > 0.0 && w > 0.0 {
                    i_yu += pu[u] * w * (w / py[y]).log2();
                }
            }
        }
        let realism: f64 = py.iter().zip(self.src).map(|(a, b)| (a - b).abs()).sum();
        let objective = if self.rc.is_infinite() {
            i_xu
        } else {
            i_xu.max(i_yu - self.rc)
        };
        Eval {
            objective: objective.max(0.0),
            violation: realism + (dist - self.delta).max(0.0),
        }
    }

    fn witness(&self, q: &RegionQuery, params: &[f64]) -> Result<RegionWitness> {
        let (fwd, syn) = self.decode(params);
        let forward = Channel::new(fwd.chunks(self.nu).map(<[f64]>::to_vec).collect())?;
        let synthesis = Channel::new(syn.chunks(self.nx).map(<[f64]>::to_vec).collect())?;
        RegionWitness::from_triple(TripleJoint::new(q.source.clone(), forward, synthesis)?, &q.distortion)
    }
}

#[derive(Debug, Clone)]
struct Best {
    objective: f64,
    params: Vec<f64>,
}

impl Best {
    /// Lower objective wins; ties go to the lexicographically smaller vector.
    fn better_than(&self, other: &Best) -> bool {
        match self.objective.total_cmp(&other.objective) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => self
                .params
                .iter()
                .zip(&other.params)
                .map(|(a, b)| a.total_cmp(b))
                .find(|o| o.is_ne())
                == Some(Ordering::Less),
        }
    }
}

fn keep_better(slot: &mut Option<Best>, cand: Best) {
    if slot.as_ref().is_none_or(|b| cand.better_than(b)) {
        *slot = Some(cand);
    }
}

struct LocalOutcome {
    best_feasible: Option<Best>,
    evals: usize,
}

fn local_search(problem: &Problem, x0: Vec<f64>, cfg: &SearchConfig) -> LocalOutcome {
    let nm = NelderMead {
        max_evals: cfg.evals_per_dim * x0.len(),
        ftol: cfg.objective_tol,
        xtol: 1e-12,
        initial_step: 0.1,
    };
    let mut best_feasible: Option<Best> = None;
    let mut evals = 0;
    let mut x = x0;
    let mut penalty = cfg.penalty_start;
    loop {
        let mut previous = f64::INFINITY;
        for _ in 0..cfg.restarts.max(1) {
            let m = nm.minimize(
                |p| {
                    let e = problem.evaluate(p);
                    if e.violation <= cfg.constraint_tol {
                        keep_better(
                            &mut best_feasible,
                            Best {
                                objective: e.objective,
                                params: p.to_vec(),
                            },
                        );
                    }
                    e.objective + penalty * e.violation
                },
                &x,
            );
            evals += m.evals;
            x = m.x;
            if previous - m.value <= cfg.objective_tol {
                break;
            }
            previous = m.value;
        }
        let e = problem.evaluate(&x);
        if e.violation <= cfg.constraint_tol || penalty >= cfg.penalty_max {
            break;
        }
        penalty *= 10.0;
    }
    LocalOutcome { best_feasible, evals }
}

fn independence_distortion(q: &RegionQuery) -> f64 {
    let prod = JointPmf::product(&q.source, &q.source);
    crate::dist::expected_distortion(&prod, &q.distortion).expect("shape validated")
}

/// `U` constant, `Y` drawn from the source independently of `X`.
fn independent_witness(q: &RegionQuery) -> Result<RegionWitness> {
    let nu = q.aux_size();
    let forward = Channel::constant(q.source.alphabet_size(), &Distribution::point_mass(nu, 0)?)?;
    let synthesis = Channel::constant(nu, &q.source)?;
    RegionWitness::from_triple(TripleJoint::new(q.source.clone(), forward, synthesis)?, &q.distortion)
}

fn structured_starts(problem: &Problem) -> Vec<Vec<f64>> {
    let (nx, nu) = (problem.nx, problem.nu);
    let mut starts = Vec::new();

    // U constant on the pivot symbol, so the solved row is the source itself
    let mut fwd = vec![0.0; nx * nu];
    for x in 0..nx {
        fwd[x * nu + nu - 1] = 1.0;
    }
    let syn: Vec<f64> = (0..nu).flat_map(|_| problem.src.iter().copied()).collect();
    starts.push(problem.encode(&fwd, &syn));

    if nu >= nx {
        // U = X = Y placed on the top symbols of U
        let offset = nu - nx;
        let mut fwd = vec![0.0; nx * nu];
        let mut syn: Vec<f64> = (0..nu).flat_map(|_| problem.src.iter().copied()).collect();
        for x in 0..nx {
            fwd[x * nu + offset + x] = 1.0;
            let row = &mut syn[(offset + x) * nx..(offset + x + 1) * nx];
            row.fill(0.0);
            row[x] = 1.0;
        }
        starts.push(problem.encode(&fwd, &syn));
    }
    starts
}

fn random_params<R: Rng>(rng: &mut R, dims: usize) -> Vec<f64> {
    // square roots of Dirichlet(1) rows; row scale is irrelevant after normalization
    (0..dims).map(|_| (-(1.0 - rng.random::<f64>()).ln()).sqrt()).collect()
}

/// Coarse oracle seed, when the oracle applies.
fn oracle_seed(q: &RegionQuery, problem: &Problem, cfg: &SearchConfig) -> Option<Vec<f64>> {
    if problem.nx != 2 || problem.nu > 3 {
        return None;
    }
    let step = [0.01, 0.02, 0.05, 0.1, 0.2, 0.25, 0.5]
        .into_iter()
        .find(|&s| oracle_grid_points(problem.nu, s).is_some_and(|n| n <= cfg.seed_grid_points))?;
    let found = brute_force_oracle(q.delta, q.common_rate, &q.source, &q.distortion, problem.nu, step).ok()?;
    let fwd: Vec<f64> = found.forward.rows().iter().flat_map(|r| r.mass().to_vec()).collect();
    let syn: Vec<f64> = found.synthesis.rows().iter().flat_map(|r| r.mass().to_vec()).collect();
    Some(problem.encode(&fwd, &syn))
}

/// Minimum of `max(I(X;U), I(Y;U) - R_c)` over the search family.
pub fn min_rate(q: &RegionQuery, cfg: &SearchConfig) -> Result<MinRateReport> {
    q.validate()?;
    let aux_size = q.aux_size();
    let report = |witness: RegionWitness, min_rate: f64, starts: usize, evaluations: usize| MinRateReport {
        min_rate,
        delta: q.delta,
        common_rate: q.common_rate,
        aux_size,
        witness,
        starts,
        evaluations,
    };

    if independence_distortion(q) <= q.delta {
        return Ok(report(independent_witness(q)?, 0.0, 0, 0));
    }
    if aux_size == 1 {
        return Err(Error::Infeasible(format!(
            "with |U| = 1 the reconstruction is independent of the source and needs distortion {}",
            independence_distortion(q)
        )));
    }

    let problem = Problem::new(q);
    let dims = problem.dims();

    let mut starts = structured_starts(&problem);
    starts.extend(oracle_seed(q, &problem, cfg));
    let mut screened: Vec<(f64, usize, Vec<f64>)> = (0..cfg.candidates)
        .into_par_iter()
        .map(|c| {
            let p = random_params(&mut stream(cfg.seed, Purpose::SearchStart, c as u64), dims);
            let e = problem.evaluate(&p);
            (e.objective + cfg.penalty_start * e.violation, c, p)
        })
        .collect();
    screened.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    starts.extend(screened.into_iter().take(cfg.starts).map(|(_, _, p)| p));

    let outcomes: Vec<LocalOutcome> = starts.par_iter().map(|x0| local_search(&problem, x0.clone(), cfg)).collect();
    let evaluations = outcomes.iter().map(|o| o.evals).sum::<usize>() + cfg.candidates;
    let mut best: Option<Best> = None;
    for o in outcomes {
        if let Some(b) = o.best_feasible {
            keep_better(&mut best, b);
        }
    }
    let Some(best) = best else {
        return Err(Error::Infeasible(format!(
            "no point within tolerance {} of the constraints was found for delta = {} with |U| = {aux_size}",
            cfg.constraint_tol, q.delta
        )));
    };

    let witness = problem.witness(q, &best.params)?;
    let rate = witness.rate_needed(q.common_rate);
    if !witness.certifies(rate, q.common_rate, q.delta, cfg.constraint_tol) {
        return Err(Error::Infeasible(format!(
            "best candidate failed the independent constraint re-check: {:?}",
            witness.achieved
        )));
    }
    Ok(report(witness, rate, starts.len(), evaluations))
}

/// Search for a witness that `(q.rate, q.common_rate, q.delta)` is achievable.
pub fn check_membership(q: &RegionQuery, cfg: &SearchConfig) -> Result<Membership> {
    let rate = q
        .rate
        .ok_or_else(|| Error::Invalid("membership query needs a rate".into()))?;
    q.validate()?;
    let starts = cfg.starts + cfg.candidates.min(1);
    match min_rate(q, cfg) {
        Ok(r) if r.witness.certifies(rate, q.common_rate, q.delta, cfg.constraint_tol) => {
            Ok(Membership::Member { witness: r.witness })
        }
        Ok(r) => Ok(Membership::NotFound {
            best_rate: Some(r.min_rate),
            aux_size: r.aux_size,
            starts: r.starts,
        }),
        Err(Error::Infeasible(_)) => Ok(Membership::NotFound {
            best_rate: None,
            aux_size: q.aux_size(),
            starts,
        }),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub delta: f64,
    pub rc: CommonRate,
    pub min_rate: f64,
    pub aux_size: usize,
}

/// [`min_rate`] over a list of distortion budgets.
pub fn boundary_curve(base: &RegionQuery, deltas: &[f64], cfg: &SearchConfig) -> Result<Vec<BoundaryPoint>> {
    deltas
        .iter()
        .map(|&delta| {
            let q = RegionQuery {
                delta,
                ..base.clone()
            };
            min_rate(&q, cfg).map(|r| BoundaryPoint {
                delta,
                rc: q.common_rate,
                min_rate: r.min_rate,
                aux_size: r.aux_size,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Brute-force grid oracle (binary source)

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleReport {
    pub value: f64,
    pub forward: Channel,
    pub synthesis: Channel,
    pub grid_points: u64,
}

fn binomial(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

fn grid_resolution(step: f64) -> Option<u64> {
    if !(step > 0.0 && step <= 1.0) {
        return None;
    }
    let m = (1.0 / step).round();
    ((m * step - 1.0).abs() < 1e-9).then_some(m as u64)
}

/// Number of `(P(u|x=0), P(u|x=1))` grid pairs at resolution `step`.
fn oracle_grid_points(aux_size: usize, step: f64) -> Option<u64> {
    let m = grid_resolution(step)?;
    let per_row = binomial(m + aux_size as u64 - 1, aux_size as u64 - 1)?;
    per_row.checked_mul(per_row)
}

/// All integer vectors of length `parts` summing to `total`, in lexicographic order.
fn compositions(total: u64, parts: usize) -> Vec<Vec<u64>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|first| {
            compositions(total - first, parts - 1).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

fn binary_kl(b: f64, p: f64) -> f64 {
    let term = |a: f64, q: f64| if a <= 0.0 { 0.0 } else { a * (a / q).log2() };
    term(b, p) + term(1.0 - b, 1.0 - p)
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Minimum of `I(Y;U) = sum_u p(u) KL(b_u || p1)` over `b_u = P(y=1|u)` subject
/// to `sum_u p(u) b_u = p1` and `base + sum_u g_u b_u <= delta`. Returns the
/// minimizer, or `None` if the constraints cannot be met.
fn binary_synthesis(pu: &[f64], g: &[f64], base: f64, p1: f64, delta: f64, want_value: bool) -> Option<Vec<f64>> {
    let budget = delta - base;
    let indep = vec![p1; pu.len()];
    let dist_of = |b: &[f64]| g.iter().zip(b).map(|(gi, bi)| gi * bi).sum::<f64>();
    if dist_of(&indep) <= budget {
        return Some(indep);
    }
    let active: Vec<usize> = (0..pu.len()).filter(|&u| pu[u] > 0.0).collect();

    // smallest reachable distortion: fill the mass p1 on the cheapest symbols
    let mut order = active.clone();
    order.sort_by(|&a, &b| (g[a] / pu[a]).total_cmp(&(g[b] / pu[b])).then(a.cmp(&b)));
    let mut greedy = indep.clone();
    let mut left = p1;
    for &u in &order {
        let take = (left / pu[u]).min(1.0);
        greedy[u] = take;
        left = (left - take * pu[u]).max(0.0);
    }
    if dist_of(&greedy) > budget + 1e-12 {
        return None;
    }
    if !want_value || p1 <= 0.0 || p1 >= 1.0 {
        return Some(greedy);
    }

    if active.len() == 2 {
        // one free coordinate; the objective is convex along the constraint
        // line with its minimum at the independent point, so clamp to the
        // feasible interval
        let (a, c) = (active[0], active[1]);
        let (pa, pc) = (pu[a], pu[c]);
        let mut lo = ((p1 - pc) / pa).max(0.0);
        let mut hi = (p1 / pa).min(1.0);
        let slope = g[a] - g[c] * pa / pc;
        let offset = g[c] * p1 / pc;
        if slope > 0.0 {
            hi = hi.min((budget - offset) / slope);
        } else if slope < 0.0 {
            lo = lo.max((budget - offset) / slope);
        }
        if lo > hi {
            return Some(greedy);
        }
        let t = p1.clamp(lo, hi);
        let mut b = indep;
        b[a] = t;
        b[c] = ((p1 - pa * t) / pc).clamp(0.0, 1.0);
        return Some(b);
    }

    // Lagrangian: b_u = sigmoid(logit p1 - mu - lambda g_u / p(u)), with mu
    // fixing the marginal and lambda the distortion
    let logit = (p1 / (1.0 - p1)).ln();
    let slopes: Vec<f64> = active.iter().map(|&u| g[u] / pu[u]).collect();
    let max_slope = slopes.iter().fold(0.0_f64, |m, s| m.max(s.abs()));
    let fill = |lambda: f64| -> Vec<f64> {
        let bound = 60.0 + logit.abs() + lambda * max_slope;
        let (mut lo, mut hi) = (-bound, bound);
        let mut b = indep.clone();
        for _ in 0..200 {
            let mu = 0.5 * (lo + hi);
            let mass: f64 = active
                .iter()
                .zip(&slopes)
                .map(|(&u, s)| pu[u] * sigmoid(logit - mu - lambda * s))
                .sum();
            if mass > p1 {
                lo = mu;
            } else {
                hi = mu;
            }
            if hi - lo < 1e-14 {
                break;
            }
        }
        let mu = 0.5 * (lo + hi);
        for (&u, s) in active.iter().zip(&slopes) {
            b[u] = sigmoid(logit - mu - lambda * s);
        }
        b
    };
    let mut hi = 1.0;
    while dist_of(&fill(hi)) > budget {
        hi *= 2.0;
        if hi > 1e8 {
            return Some(greedy);
        }
    }
    let mut lo = 0.0;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if dist_of(&fill(mid)) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi.max(1.0) {
            break;
        }
    }
    Some(fill(hi))
}

/// Exhaustive grid search for the boundary of a binary source with
/// `aux_size <= 3`.
///
/// Every pair of rows of `P(u|x)` on the `aux_size`-simplex grid of spacing
/// `step` is enumerated. For each one, the best `P(y|u)` under the realism and
/// distortion constraints is found exactly: the remaining problem is convex
/// and separable in `P(y=1|u)`.
pub fn brute_force_oracle(
    delta: f64,
    rc: CommonRate,
    source: &Distribution,
    d: &DistortionMeasure,
    aux_size: usize,
    step: f64,
) -> Result<OracleReport> {
    brute_force_oracle_capped(delta, rc, source, d, aux_size, step, ORACLE_MAX_POINTS)
}

pub fn brute_force_oracle_capped(
    delta: f64,
    rc: CommonRate,
    source: &Distribution,
    d: &DistortionMeasure,
    aux_size: usize,
    step: f64,
    cap: u64,
) -> Result<OracleReport> {
    if source.alphabet_size() != 2 || d.shape() != (2, 2) || !(1..=3).contains(&aux_size) {
        return Err(Error::Domain(
            "the grid oracle supports binary sources with aux_size between 1 and 3".into(),
        ));
    }
    let m = grid_resolution(step).ok_or_else(|| Error::Domain(format!("grid step {step} does not divide 1")))?;
    let points = oracle_grid_points(aux_size, step).unwrap_or(u64::MAX);
    if points > cap {
        return Err(Error::Capacity {
            what: "oracle grid",
            needed: points as u128,
            cap: cap as u128,
        });
    }
    let p = source.mass();
    let p1 = p[1];
    let rows: Vec<Vec<f64>> = compositions(m, aux_size)
        .into_iter()
        .map(|c| c.into_iter().map(|k| k as f64 / m as f64).collect())
        .collect();

    let evaluate = |r0: &[f64], r1: &[f64]| -> Option<(f64, Vec<f64>)> {
        let pu: Vec<f64> = (0..aux_size).map(|u| p[0] * r0[u] + p[1] * r1[u]).collect();
        let mut i_xu = 0.0;
        for (px, row) in [(p[0], r0), (p[1], r1)] {
            for u in 0..aux_size {
                if px * row[u] > 0.0 {
                    i_xu += px * row[u] * (row[u] / pu[u]).log2();
                }
            }
        }
        // per-u cost of emitting y = 0 and y = 1
        let cost = |u: usize, y: usize| p[0] * r0[u] * d.get(0, y) + p[1] * r1[u] * d.get(1, y);
        let base: f64 = (0..aux_size).map(|u| cost(u, 0)).sum();
        let g: Vec<f64> = (0..aux_size).map(|u| cost(u, 1) - cost(u, 0)).collect();
        let b = binary_synthesis(&pu, &g, base, p1, delta, !rc.is_infinite())?;
        let value = match rc {
            CommonRate::Infinite => i_xu,
            CommonRate::Finite(r) => {
                let i_yu: f64 = pu.iter().zip(&b).map(|(&w, &bu)| if w > 0.0 { w * binary_kl(bu, p1) } else { 0.0 }).sum();
                i_xu.max(i_yu - r)
            }
        };
        Some((value.max(0.0), b))
    };

    let best = rows
        .par_iter()
        .enumerate()
        .filter_map(|(a, r0)| {
            let mut best: Option<(f64, usize, usize, Vec<f64>)> = None;
            for (c, r1) in rows.iter().enumerate() {
                if let Some((v, b)) = evaluate(r0, r1) {
                    if best.as_ref().is_none_or(|bb| v < bb.0) {
                        best = Some((v, a, c, b));
                    }
                }
            }
            best
        })
        .reduce_with(|x, y| match x.0.total_cmp(&y.0) {
            Ordering::Less => x,
            Ordering::Greater => y,
            Ordering::Equal => {
                if (x.1, x.2) <= (y.1, y.2) {
                    x
                } else {
                    y
                }
            }
        });
    let Some((value, a, c, b)) = best else {
        return Err(Error::Infeasible(format!("no grid point meets distortion {delta}")));
    };
    let forward = Channel::new(vec![rows[a].clone(), rows[c].clone()])?;
    let synthesis = Channel::new(b.iter().map(|&bu| vec![1.0 - bu, bu]).collect())?;
    Ok(OracleReport {
        value,
        forward,
        synthesis,
        grid_points: points,
    })
}

// ---------------------------------------------------------------------------
// Baselines

/// Classical rate-distortion function `R(delta)` by Blahut-Arimoto, with the
/// slope parameter located by bisection.
pub fn classical_rate_distortion(source: &Distribution, d: &DistortionMeasure, delta: f64) -> Result<f64> {
    let (nx, ny) = d.shape();
    if nx != source.alphabet_size() {
        return Err(Error::Dimension("distortion rows do not match the source".into()));
    }
    let p = source.mass();
    let d_max = (0..ny)
        .map(|y| (0..nx).map(|x| p[x] * d.get(x, y)).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    if delta >= d_max {
        return Ok(0.0);
    }
    let d_min: f64 = (0..nx)
        .map(|x| p[x] * (0..ny).map(|y| d.get(x, y)).fold(f64::INFINITY, f64::min))
        .sum();
    if delta < d_min - 1e-12 {
        return Err(Error::Infeasible(format!("distortion {delta} is below the minimum {d_min}")));
    }

    let at_slope = |s: f64| -> (f64, f64) {
        let mut q = vec![1.0 / ny as f64; ny];
        let mut cond = vec![0.0; nx * ny];
        for _ in 0..50_000 {
            for x in 0..nx {
                let floor = (0..ny).map(|y| d.get(x, y)).fold(f64::INFINITY, f64::min);
                let row = &mut cond[x * ny..(x + 1) * ny];
                for y in 0..ny {
                    row[y] = q[y] * (-s * (d.get(x, y) - floor)).exp();
                }
                let z: f64 = row.iter().sum();
                row.iter_mut().for_each(|v| *v /= z);
            }
            let mut next = vec![0.0; ny];
            for x in 0..nx {
                for y in 0..ny {
                    next[y] += p[x] * cond[x * ny + y];
                }
            }
            let moved = next.iter().zip(&q).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            q = next;
            if moved < 1e-14 {
                break;
            }
        }
        let mut rate = 0.0;
        let mut dist = 0.0;
        for x in 0..nx {
            for y in 0..ny {
                let c = cond[x * ny + y];
                if c > 0.0 && q[y] > 0.0 {
                    rate += p[x] * c * (c / q[y]).log2();
                }
                dist += p[x] * c * d.get(x, y);
            }
        }
        (rate.max(0.0), dist)
    };

    let mut hi = 1.0;
    while at_slope(hi).1 > delta {
        hi *= 2.0;
        if hi > 4096.0 {
            break;
        }
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if at_slope(mid).1 > delta {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(at_slope(hi).0)
}

/// Minimum `I(X;Y)` over reconstructions `Y ~ P_X` with `E d(X,Y) <= delta`
/// (unlimited common randomness, `U = Y`).
#[derive(Debug, Clone, PartialEq)]
pub struct DpRdf {
    pub rate: f64,
    pub coupling: JointPmf,
}

/// Solves the distribution-preserving problem directly over couplings of the
/// source with itself. With both marginals fixed, `I(X;Y)` is the relative
/// entropy of the coupling to the product law, so the optimum is an
/// entropically regularized transport plan; the multiplier of the distortion
/// constraint is found by bisection and each plan by log-domain Sinkhorn
/// scaling.
pub fn dp_rdf(source: &Distribution, d: &DistortionMeasure, delta: f64) -> Result<DpRdf> {
    let k = source.alphabet_size();
    if d.shape() != (k, k) {
        return Err(Error::Dimension("distortion table must be square over the source alphabet".into()));
    }
    let p = source.mass();
    let support: Vec<usize> = (0..k).filter(|&x| p[x] > 0.0).collect();
    let lp: Vec<f64> = p.iter().map(|v| v.ln()).collect();

    let plan = |lambda: f64| -> Vec<f64> {
        let mut f = vec![0.0; k];
        let mut g = vec![0.0; k];
        let lse = |vals: &mut dyn Iterator<Item = f64>| -> f64 {
            let v: Vec<f64> = vals.collect();
            let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            m + v.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
        };
        let mut joint = vec![0.0; k * k];
        for _ in 0..200_000 {
            for &x in &support {
                f[x] = -lse(&mut support.iter().map(|&y| lp[y] + g[y] - lambda * d.get(x, y)));
            }
            for &y in &support {
                g[y] = -lse(&mut support.iter().map(|&x| lp[x] + f[x] - lambda * d.get(x, y)));
            }
            let mut err = 0.0;
            for &x in &support {
                let mut row = 0.0;
                for &y in &support {
                    let v = (lp[x] + lp[y] + f[x] + g[y] - lambda * d.get(x, y)).exp();
                    joint[x * k + y] = v;
                    row += v;
                }
                err += (row - p[x]).abs();
            }
            if err < 1e-14 {
                break;
            }
        }
        joint
    };
    let cost = |j: &[f64]| (0..k * k).map(|i| j[i] * d.get(i / k, i % k)).sum::<f64>();

    let mut hi = 1.0;
    let mut joint = plan(0.0);
    if cost(&joint) > delta {
        while cost(&plan(hi)) > delta {
            hi *= 2.0;
            if hi > 1e4 {
                return Err(Error::Infeasible(format!(
                    "distortion {delta} is at or below the smallest distortion reachable under the marginal constraint"
                )));
            }
        }
        let mut lo = 0.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if cost(&plan(mid)) > delta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        joint = plan(hi);
    }
    let coupling = JointPmf::new(k, k, joint)?;
    Ok(DpRdf {
        rate: mutual_information(&coupling),
        coupling,
    })
}
