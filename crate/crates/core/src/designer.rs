//! Reduced-complexity design of piecewise-linear detectors.
//!
//! A desired curve `d(β)` is approximated on uniform partitions with
//! `k = 2..p` segments. For every `(k, i)` only `ε_i` is moved, so that the
//! false-alarm probability meets the target exactly, and the candidate with
//! the smallest detection-profile cost wins.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{segment_bounds, Boundary, PiecewiseLinearBoundary, TabulatedBoundary};
use crate::error::{Error, Result};
use crate::performance::{eps_floor, invert_exceed_h0, line_exceed, pfa_closed_form, prob_exceed, segment_exceed_h0, EPS_CAP};
use crate::solver::{bisect, brent};
use crate::stats::{ProblemDims, SignalCondition};

/// Points per segment used by [`fit_segment`].
pub const FIT_POINTS: usize = 64;

/// Largest `|Pfa − target|` accepted for a design.
pub const PFA_TOL: f64 = 1e-9;

/// A desired detection probability `psi` at SNR `gamma_db` and mismatch `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Specification {
    pub gamma_db: f64,
    pub lambda: f64,
    pub psi: f64,
}

impl Specification {
    pub fn new(gamma_db: f64, lambda: f64, psi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) || !(0.0..=1.0).contains(&psi) || gamma_db.is_nan() {
            return Err(Error::InvalidParameter(format!("bad specification ({gamma_db} dB, {lambda}, {psi})")));
        }
        Ok(Self { gamma_db, lambda, psi })
    }

    pub fn condition(&self) -> Result<SignalCondition> {
        SignalCondition::from_db(self.gamma_db, self.lambda)
    }
}

/// How the per-specification squared errors are combined.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weighting {
    /// `Σ e_k · sqrt(Σ (e_i − ē)²)`.
    #[default]
    Spread,
    /// `(1/S) σ_e Σ e_k` with the sample standard deviation `σ_e`.
    SpreadNormalized,
    /// `Σ e_i`.
    Uniform,
    /// `Σ e_i / ψ_i²`.
    Relative,
    /// `Σ λ_i^a e_i`.
    Mismatch { a: f64 },
}

impl fmt::Display for Weighting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Spread => f.write_str("spread"),
            Self::SpreadNormalized => f.write_str("spread_normalized"),
            Self::Uniform => f.write_str("uniform"),
            Self::Relative => f.write_str("relative"),
            Self::Mismatch { a } => write!(f, "mismatch:{a}"),
        }
    }
}

impl FromStr for Weighting {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spread" => Ok(Self::Spread),
            "spread_normalized" => Ok(Self::SpreadNormalized),
            "uniform" => Ok(Self::Uniform),
            "relative" => Ok(Self::Relative),
            other => match other.strip_prefix("mismatch:") {
                Some(a) => {
                    let a = a.parse().map_err(|e| Error::Parse(format!("mismatch exponent '{a}': {e}")))?;
                    Ok(Self::Mismatch { a })
                }
                None => Err(Error::Parse(format!("unknown weighting '{other}'"))),
            },
        }
    }
}

/// One examined `(k, i)` candidate of the design sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub k: usize,
    pub i: usize,
    pub eps_i: Option<f64>,
    pub feasible: bool,
    pub cost: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignResult {
    pub boundary: PiecewiseLinearBoundary,
    pub k_star: usize,
    /// Segment whose intercept was retargeted (one-based).
    pub i_star: usize,
    pub cost: f64,
    pub pfa_target: f64,
    /// `pfa_closed_form(boundary) − pfa_target`.
    pub pfa_residual: f64,
    pub specs: Vec<Specification>,
    pub weighting: Weighting,
    pub continuous: bool,
    pub log: Vec<CandidateRecord>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    k_star: usize,
    pfa_target: f64,
    cost: f64,
    specs: &'a [Specification],
    continuous: bool,
}

impl DesignResult {
    /// `{"k_star", "pfa_target", "cost", "specs", "continuous"}`.
    pub fn sidecar_json(&self) -> String {
        let s = Sidecar {
            k_star: self.k_star,
            pfa_target: self.pfa_target,
            cost: self.cost,
            specs: &self.specs,
            continuous: self.continuous,
        };
        serde_json::to_string_pretty(&s).expect("sidecar serializes")
    }

    pub fn log_csv(&self) -> String {
        candidate_log_csv(&self.log)
    }
}

pub fn candidate_log_csv(log: &[CandidateRecord]) -> String {
    let mut out = String::from("k,i,eps_i,feasible,cost\n");
    let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
    for r in log {
        let _ = writeln!(out, "{},{},{},{},{}", r.k, r.i, opt(r.eps_i), r.feasible, opt(r.cost));
    }
    out
}

/// `ψ_i = prob_exceed(d, (γ_i, λ_i))` over the grid product, γ outermost.
pub fn sample_specifications(
    d: &Boundary,
    gamma_db: &[f64],
    lambda: &[f64],
    dims: ProblemDims,
) -> Result<Vec<Specification>> {
    if gamma_db.is_empty() || lambda.is_empty() {
        return Err(Error::InvalidParameter("specification grids must be nonempty".into()));
    }
    let pairs: Vec<(f64, f64)> = gamma_db.iter().flat_map(|&g| lambda.iter().map(move |&l| (g, l))).collect();
    pairs
        .par_iter()
        .map(|&(g, l)| {
            let psi = prob_exceed(d, SignalCondition::from_db(g, l)?, dims)?;
            Specification::new(g, l, psi)
        })
        .collect()
}

/// Least-squares line through `d` sampled at [`FIT_POINTS`] uniform points
/// of `[lo, hi]`. Where `d` may jump at `hi`, its left limit is used.
pub fn fit_segment(d: &Boundary, lo: f64, hi: f64) -> (f64, f64) {
    let n = FIT_POINTS;
    let h = (hi - lo) / (n - 1) as f64;
    let jump_at_hi = hi < 1.0 && d.breakpoints().iter().any(|&b| (b - hi).abs() < 1e-12);
    let xs: Vec<f64> = (0..n).map(|j| lo + h * j as f64).collect();
    let ys: Vec<f64> = xs
        .iter()
        .enumerate()
        .map(|(j, &x)| d.value(if j == n - 1 && jump_at_hi { hi - h * 1e-9 } else { x }))
        .collect();
    let xm = xs.iter().sum::<f64>() / n as f64;
    let ym = ys.iter().sum::<f64>() / n as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    let m = sxy / sxx;
    (m, ym - m * xm)
}

/// Combines detection errors `P_i − ψ_i` into the design cost.
pub fn cost_from_errors(pd: &[f64], specs: &[Specification], weighting: Weighting) -> Result<f64> {
    if specs.is_empty() {
        return Err(Error::InvalidParameter("cost needs at least one specification".into()));
    }
    if pd.len() != specs.len() {
        return Err(Error::DimensionMismatch { expected: specs.len(), found: pd.len() });
    }
    let e: Vec<f64> = pd.iter().zip(specs).map(|(p, s)| (p - s.psi).powi(2)).collect();
    let s = e.len() as f64;
    let mut weighting = weighting;
    if e.len() == 1 && matches!(weighting, Weighting::Spread | Weighting::SpreadNormalized) {
        log::warn!("a single specification has zero spread; using uniform weighting");
        weighting = Weighting::Uniform;
    }
    let total: f64 = e.iter().sum();
    let mean = total / s;
    let ss: f64 = e.iter().map(|x| (x - mean).powi(2)).sum();
    Ok(match weighting {
        Weighting::Spread => total * ss.sqrt(),
        Weighting::SpreadNormalized => total * (ss / (s - 1.0)).sqrt() / s,
        Weighting::Uniform => total,
        Weighting::Relative => e.iter().zip(specs).map(|(x, sp)| x / sp.psi.max(1e-12).powi(2)).sum(),
        Weighting::Mismatch { a } => e.iter().zip(specs).map(|(x, sp)| sp.lambda.powf(a) * x).sum(),
    })
}

pub fn cost_c1(
    b: &PiecewiseLinearBoundary,
    specs: &[Specification],
    dims: ProblemDims,
    weighting: Weighting,
) -> Result<f64> {
    let bb = Boundary::PiecewiseLinear(b.clone());
    let pd = specs
        .par_iter()
        .map(|s| prob_exceed(&bb, s.condition()?, dims))
        .collect::<Result<Vec<_>>>()?;
    cost_from_errors(&pd, specs, weighting)
}

/// The fitted `k`-segment starting point with per-segment H0 exceedances and
/// per-specification detection contributions.
struct Stage {
    m: Vec<f64>,
    eps: Vec<f64>,
    exceed_h0: Vec<f64>,
    /// `pd[j][s]`: contribution of segment `j` under specification `s`.
    pd: Vec<Vec<f64>>,
}

fn fit_stage(d: &Boundary, k: usize, specs: &[Specification], dims: ProblemDims) -> Result<Stage> {
    let mut m = Vec::with_capacity(k);
    let mut eps = Vec::with_capacity(k);
    for j in 0..k {
        let (lo, hi) = segment_bounds(j, k);
        let (mj, ej) = fit_segment(d, lo, hi);
        // a fitted line dipping below zero is lifted until it touches zero
        m.push(mj);
        eps.push(ej.max(eps_floor(j + 1, mj, k)));
    }
    let exceed_h0 = (0..k).map(|j| segment_exceed_h0(j + 1, eps[j], m[j], dims, k)).collect::<Result<Vec<_>>>()?;
    let pd = (0..k)
        .map(|j| segment_pd(m[j], eps[j], j, k, specs, dims))
        .collect::<Result<Vec<_>>>()?;
    Ok(Stage { m, eps, exceed_h0, pd })
}

fn segment_pd(m: f64, eps: f64, j: usize, k: usize, specs: &[Specification], dims: ProblemDims) -> Result<Vec<f64>> {
    let (lo, hi) = segment_bounds(j, k);
    specs.iter().map(|s| line_exceed(m, eps, lo, hi, s.condition()?, dims)).collect()
}

struct Candidate {
    record: CandidateRecord,
    boundary: Option<PiecewiseLinearBoundary>,
}

fn evaluate_candidate(
    stage: &Stage,
    k: usize,
    i: usize,
    pfa_target: f64,
    specs: &[Specification],
    dims: ProblemDims,
    weighting: Weighting,
) -> Result<Candidate> {
    let j = i - 1;
    let mut others = crate::specfun::Neumaier::default();
    for (l, e) in stage.exceed_h0.iter().enumerate() {
        if l != j {
            others.add(*e);
        }
    }
    let target = pfa_target - others.sum();
    let infeasible = |eps_i| Candidate { record: CandidateRecord { k, i, eps_i, feasible: false, cost: None }, boundary: None };
    if target < 0.0 {
        return Ok(infeasible(None));
    }
    let eps_i = match invert_exceed_h0(i, stage.m[j], dims, k, target) {
        Ok(e) => e,
        Err(Error::Infeasible { .. }) => return Ok(infeasible(None)),
        Err(e) => return Err(e),
    };
    let mut eps = stage.eps.clone();
    eps[j] = eps_i;
    let boundary = PiecewiseLinearBoundary::new(stage.m.clone(), eps)?;
    let new_pd = segment_pd(stage.m[j], eps_i, j, k, specs, dims)?;
    let pd: Vec<f64> = (0..specs.len())
        .map(|s| {
            let mut acc = crate::specfun::Neumaier::default();
            for (l, seg) in stage.pd.iter().enumerate() {
                acc.add(if l == j { new_pd[s] } else { seg[s] });
            }
            acc.sum().clamp(0.0, 1.0)
        })
        .collect();
    let cost = cost_from_errors(&pd, specs, weighting)?;
    Ok(Candidate {
        record: CandidateRecord { k, i, eps_i: Some(eps_i), feasible: true, cost: Some(cost) },
        boundary: Some(boundary),
    })
}

/// The reduced-complexity design sweep over `k = 2..=p` and `i = 1..=k`.
///
/// Candidates are evaluated in parallel; the winner is the feasible one of
/// least cost, ties going to smaller `k`, then smaller `i`.
pub fn algorithm1(
    d: &Boundary,
    p: usize,
    pfa_target: f64,
    specs: &[Specification],
    dims: ProblemDims,
    weighting: Weighting,
) -> Result<DesignResult> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!("need p >= 2, got {p}")));
    }
    if !(pfa_target > 0.0 && pfa_target < 1.0) {
        return Err(Error::InvalidParameter(format!("target Pfa {pfa_target} outside (0, 1)")));
    }
    if specs.is_empty() {
        return Err(Error::InvalidParameter("design needs at least one specification".into()));
    }
    let stages = (2..=p)
        .into_par_iter()
        .map(|k| fit_stage(d, k, specs, dims))
        .collect::<Result<Vec<_>>>()?;
    let pairs: Vec<(usize, usize)> = (2..=p).flat_map(|k| (1..=k).map(move |i| (k, i))).collect();
    let candidates = pairs
        .par_iter()
        .map(|&(k, i)| evaluate_candidate(&stages[k - 2], k, i, pfa_target, specs, dims, weighting))
        .collect::<Result<Vec<_>>>()?;

    let mut best: Option<usize> = None;
    for (idx, c) in candidates.iter().enumerate() {
        if let Some(cost) = c.record.cost {
            // strict comparison keeps the earliest (smallest k, then i) on ties
            if best.is_none_or(|b| cost < candidates[b].record.cost.expect("feasible")) {
                best = Some(idx);
            }
        }
    }
    let log: Vec<CandidateRecord> = candidates.iter().map(|c| c.record.clone()).collect();
    let Some(best) = best else {
        return Err(Error::DesignInfeasible { log });
    };
    let chosen = &candidates[best];
    let boundary = chosen.boundary.clone().expect("feasible candidate has a boundary");
    let pfa_residual = pfa_closed_form(&boundary, dims)? - pfa_target;
    if pfa_residual.abs() > PFA_TOL {
        return Err(Error::Divergence(format!("design misses the Pfa target by {pfa_residual:e}")));
    }
    log::info!(
        "design: k* = {}, i* = {}, cost = {:e}, {} candidates",
        chosen.record.k,
        chosen.record.i,
        chosen.record.cost.unwrap_or(f64::NAN),
        log.len()
    );
    Ok(DesignResult {
        boundary,
        k_star: chosen.record.k,
        i_star: chosen.record.i,
        cost: chosen.record.cost.expect("feasible"),
        pfa_target,
        pfa_residual,
        specs: specs.to_vec(),
        weighting,
        continuous: false,
        log,
    })
}

/// Joins adjacent segments at the midpoints of their junction values, then
/// shifts the whole curve to restore the Pfa target.
pub fn make_continuous(b: &PiecewiseLinearBoundary) -> Result<PiecewiseLinearBoundary> {
    let k = b.k();
    let kf = k as f64;
    let mut a = vec![0.0; k + 1];
    a[0] = b.intercepts()[0];
    a[k] = b.slopes()[k - 1] + b.intercepts()[k - 1];
    for (i, ai) in a.iter_mut().enumerate().take(k).skip(1) {
        let x = i as f64 / kf;
        *ai = 0.5 * (b.line(i - 1, x) + b.line(i, x));
    }
    let m = (1..=k).map(|i| kf * (a[i] - a[i - 1])).collect();
    let eps = (1..=k).map(|i| i as f64 * (a[i - 1] - a[i]) + a[i]).collect();
    Ok(PiecewiseLinearBoundary::new(m, eps)?.snap_junctions())
}

pub fn algorithm2_continuity(r: &DesignResult, pfa_target: f64, dims: ProblemDims) -> Result<DesignResult> {
    let joined = make_continuous(&r.boundary)?;
    let shift = restoring_shift(&joined, pfa_target, dims)?;
    let boundary = joined.shifted(shift).snap_junctions();
    let pfa_residual = pfa_closed_form(&boundary, dims)? - pfa_target;
    if pfa_residual.abs() > PFA_TOL {
        return Err(Error::Divergence(format!("continuity shift misses the Pfa target by {pfa_residual:e}")));
    }
    let cost = cost_c1(&boundary, &r.specs, dims, r.weighting)?;
    Ok(DesignResult { boundary, cost, pfa_target, pfa_residual, continuous: true, ..r.clone() })
}

/// Uniform intercept shift giving `b` the closed-form Pfa `pfa_target`.
pub fn restoring_shift(b: &PiecewiseLinearBoundary, pfa_target: f64, dims: ProblemDims) -> Result<f64> {
    const FTOL: f64 = 1e-14;
    let g = |s: f64| Ok(pfa_closed_form(&b.shifted(s), dims)? - pfa_target);
    if g(0.0)?.abs() <= FTOL {
        return Ok(0.0);
    }
    let lowest = (0..b.k())
        .map(|i| {
            let (lo, hi) = b.segment_bounds(i);
            b.line(i, lo).min(b.line(i, hi))
        })
        .fold(f64::INFINITY, f64::min);
    let s_lo = -lowest;
    let mut s_hi = s_lo.max(0.0) + 1.0;
    while g(s_hi)? > 0.0 {
        s_hi *= 2.0;
        if s_hi > EPS_CAP {
            return Err(Error::BracketFailure(format!("no shift below {EPS_CAP} reaches Pfa {pfa_target:e}")));
        }
    }
    brent(g, s_lo, s_hi, FTOL)
}

/// The naive competitor: `d + c` with `c` chosen so the tabulated curve has
/// the target Pfa.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftedBaseline {
    pub boundary: TabulatedBoundary,
    pub offset: f64,
}

pub fn shifted_baseline(d: &Boundary, pfa_target: f64, dims: ProblemDims) -> Result<ShiftedBaseline> {
    if !(pfa_target > 0.0 && pfa_target < 1.0) {
        return Err(Error::InvalidParameter(format!("target Pfa {pfa_target} outside (0, 1)")));
    }
    let pfa_at = |c: f64| -> Result<f64> {
        let t: Boundary = d.tabulate(c)?.into();
        prob_exceed(&t, SignalCondition::h0(), dims)
    };
    let g = |c: f64| Ok(pfa_at(c)? - pfa_target);
    let offset = if g(0.0)?.abs() <= 1e-12 {
        0.0
    } else {
        let top = d.tabulate(0.0)?.values().iter().copied().fold(0.0, f64::max);
        let c_lo = -top;
        let mut c_hi = 1.0;
        while g(c_hi)? > 0.0 {
            c_hi *= 2.0;
            if c_hi > EPS_CAP {
                return Err(Error::BracketFailure(format!("no offset below {EPS_CAP} reaches Pfa {pfa_target:e}")));
            }
        }
        bisect(g, c_lo, c_hi, 1e-12)?
    };
    Ok(ShiftedBaseline { boundary: d.tabulate(offset)?, offset })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{BaselineDetector, BaselineKind, SplineBoundary};

    fn dims() -> ProblemDims {
        ProblemDims::new(4, 8).unwrap()
    }

    fn spec(psi: f64) -> Specification {
        Specification::new(10.0, 1.0, psi).unwrap()
    }

    #[test]
    fn fit_recovers_lines() {
        let d: Boundary = PiecewiseLinearBoundary::new(vec![1.7], vec![0.3]).unwrap().into();
        let (m, e) = fit_segment(&d, 0.25, 0.5);
        assert!((m - 1.7).abs() < 1e-12 && (e - 0.3).abs() < 1e-12);
        let c: Boundary = PiecewiseLinearBoundary::constant(2.5).unwrap().into();
        let (m, e) = fit_segment(&c, 0.0, 1.0);
        assert!(m.abs() < 1e-12 && (e - 2.5).abs() < 1e-12);
    }

    #[test]
    fn fit_residual_shrinks_with_interval() {
        let d: Boundary = SplineBoundary::interpolating(
            vec![[0.0, 3.0], [0.25, 1.0], [0.5, 2.0], [0.75, 0.8], [1.0, 1.5]],
            4,
        )
        .unwrap()
        .into();
        let rms = |lo: f64, hi: f64| {
            let (m, e) = fit_segment(&d, lo, hi);
            let n = 200;
            let s: f64 = (0..=n)
                .map(|j| {
                    let x = lo + (hi - lo) * j as f64 / n as f64;
                    (d.value(x) - m * x - e).powi(2)
                })
                .sum();
            (s / (n + 1) as f64).sqrt()
        };
        assert!(rms(0.0, 0.25) < rms(0.0, 0.5));
    }

    #[test]
    fn cost_modes() {
        let specs = vec![spec(0.5), spec(0.6), spec(0.7)];
        assert_eq!(cost_from_errors(&[0.5, 0.6, 0.7], &specs, Weighting::Spread).unwrap(), 0.0);
        // equal errors: zero spread, uniform sums them
        let pd = [0.6, 0.7, 0.8];
        assert!(cost_from_errors(&pd, &specs, Weighting::Spread).unwrap().abs() < 1e-18);
        assert!((cost_from_errors(&pd, &specs, Weighting::Uniform).unwrap() - 0.03).abs() < 1e-15);
        let pd = [0.6, 0.6, 0.7];
        let e = [0.01, 0.0, 0.0];
        let mean = 0.01 / 3.0;
        let ss: f64 = e.iter().map(|x| (x - mean) * (x - mean)).sum();
        let spread = cost_from_errors(&pd, &specs, Weighting::Spread).unwrap();
        assert!((spread - 0.01 * ss.sqrt()).abs() < 1e-15);
        let norm = cost_from_errors(&pd, &specs, Weighting::SpreadNormalized).unwrap();
        assert!((norm - 0.01 * (ss / 2.0).sqrt() / 3.0).abs() < 1e-15);
        let rel = cost_from_errors(&pd, &specs, Weighting::Relative).unwrap();
        assert!((rel - 0.01 / 0.25).abs() < 1e-12);
        // single spec falls back to uniform
        let one = cost_from_errors(&[0.7], &[spec(0.5)], Weighting::Spread).unwrap();
        assert!((one - 0.04).abs() < 1e-15);
        assert!(cost_from_errors(&[], &[], Weighting::Uniform).is_err());
    }

    #[test]
    fn mismatch_weighting() {
        let specs = vec![Specification::new(10.0, 0.5, 0.5).unwrap(), Specification::new(10.0, 1.0, 0.5).unwrap()];
        let c = cost_from_errors(&[0.6, 0.6], &specs, Weighting::Mismatch { a: 2.0 }).unwrap();
        assert!((c - 0.01 * 1.25).abs() < 1e-15);
    }

    #[test]
    fn weighting_parses() {
        for w in [Weighting::Spread, Weighting::SpreadNormalized, Weighting::Uniform, Weighting::Relative, Weighting::Mismatch { a: 1.5 }] {
            assert_eq!(w.to_string().parse::<Weighting>().unwrap(), w);
        }
        assert!("cubic".parse::<Weighting>().is_err());
    }

    #[test]
    fn midpoint_join() {
        let b = PiecewiseLinearBoundary::new(vec![0.0, 0.0], vec![1.0, 1.4]).unwrap();
        let c = make_continuous(&b).unwrap();
        assert_eq!(c.max_junction_gap(), 0.0);
        assert!((c.line(0, 0.5) - 1.2).abs() < 1e-15);
        assert!((c.line(0, 0.0) - 1.0).abs() < 1e-15);
        assert!((c.line(1, 1.0) - 1.4).abs() < 1e-15);
        let already = PiecewiseLinearBoundary::new(vec![2.0, -1.0], vec![0.5, 2.0]).unwrap();
        let same = make_continuous(&already).unwrap();
        for i in 0..2 {
            assert!((same.slopes()[i] - already.slopes()[i]).abs() < 1e-14);
            assert!((same.intercepts()[i] - already.intercepts()[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn design_meets_target_and_is_minimal() {
        let dims = dims();
        let d: Boundary = SplineBoundary::interpolating(vec![[0.0, 1.5], [0.5, 0.9], [1.0, 1.2]], 2).unwrap().into();
        let specs = sample_specifications(&d, &[8.0, 15.0], &[1.0, 0.5], dims).unwrap();
        let r = algorithm1(&d, 5, 1e-2, &specs, dims, Weighting::Spread).unwrap();
        assert_eq!(r.log.len(), 5 * 6 / 2 - 1);
        assert!(r.pfa_residual.abs() < 1e-9);
        assert!((2..=5).contains(&r.k_star));
        let min = r.log.iter().filter_map(|c| c.cost).fold(f64::INFINITY, f64::min);
        assert_eq!(r.cost, min);
        // every feasible candidate meets the target and only touches ε_i
        for c in r.log.iter().filter(|c| c.feasible) {
            let stage = fit_stage(&d, c.k, &specs, dims).unwrap();
            let mut eps = stage.eps.clone();
            eps[c.i - 1] = c.eps_i.unwrap();
            let b = PiecewiseLinearBoundary::new(stage.m.clone(), eps).unwrap();
            assert!((pfa_closed_form(&b, dims).unwrap() - 1e-2).abs() < 1e-9);
        }
        let cost = cost_c1(&r.boundary, &specs, dims, Weighting::Spread).unwrap();
        assert!((cost - r.cost).abs() <= 1e-9 * r.cost.max(1e-12));

        let refined = algorithm2_continuity(&r, 1e-2, dims).unwrap();
        assert!(refined.continuous);
        assert_eq!(refined.boundary.max_junction_gap(), 0.0);
        assert!(refined.pfa_residual.abs() < 1e-9);
        assert_eq!(refined.log, r.log);
    }

    #[test]
    fn design_is_deterministic() {
        let dims = dims();
        let d: Boundary = BaselineDetector::new(BaselineKind::Amf, 8.0).unwrap().into();
        let specs = sample_specifications(&d, &[10.0], &[1.0, 0.5], dims).unwrap();
        let a = algorithm1(&d, 4, 1e-3, &specs, dims, Weighting::Spread).unwrap();
        let b = algorithm1(&d, 4, 1e-3, &specs, dims, Weighting::Spread).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.log_csv(), b.log_csv());
    }

    #[test]
    fn infeasible_everywhere() {
        let dims = dims();
        let d: Boundary = PiecewiseLinearBoundary::constant(1e-6).unwrap().into();
        let specs = vec![spec(0.5)];
        // all but one segment near zero: the rest already exceed the target
        match algorithm1(&d, 3, 1e-6, &specs, dims, Weighting::Uniform) {
            Err(Error::DesignInfeasible { log }) => {
                assert_eq!(log.len(), 5);
                assert!(log.iter().all(|c| !c.feasible));
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn shifted_baseline_moves_up_for_smaller_pfa() {
        let dims = dims();
        let kelly = BaselineDetector::new(BaselineKind::Kelly, 0.5).unwrap();
        let d: Boundary = kelly.into();
        let native = pfa_closed_form(&kelly.boundary(), dims).unwrap();
        let s = shifted_baseline(&d, native / 10.0, dims).unwrap();
        assert!(s.offset > 0.0);
        let t: Boundary = s.boundary.clone().into();
        let pfa = prob_exceed(&t, SignalCondition::h0(), dims).unwrap();
        assert!((pfa - native / 10.0).abs() < 1e-9);
        let same = shifted_baseline(&d, native, dims).unwrap();
        assert!(same.offset.abs() < 1e-9);
    }

    #[test]
    fn sidecar_fields() {
        let dims = dims();
        let d: Boundary = BaselineDetector::new(BaselineKind::Amf, 8.0).unwrap().into();
        let specs = sample_specifications(&d, &[10.0], &[1.0], dims).unwrap();
        let r = algorithm1(&d, 2, 1e-3, &specs, dims, Weighting::Uniform).unwrap();
        let v: serde_json::Value = serde_json::from_str(&r.sidecar_json()).unwrap();
        for key in ["k_star", "pfa_target", "cost", "specs", "continuous"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(r.log_csv().lines().count(), 3);
    }
}
