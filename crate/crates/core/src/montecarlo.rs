//! Monte Carlo simulation of the adaptive detection problem.
//!
//! Every trial draws its own ChaCha8 stream keyed by `(seed, trial_index)`,
//! so results do not depend on how trials are scheduled across threads.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{raw_statistic, Boundary, BaselineKind, Decision};
use crate::error::{Error, Result};
use crate::linalg::{accumulate_outer, cholesky, CholeskyFactor, ComplexVec, HermitianMatrix};
use crate::solver::bisect;
use crate::stats::{cos_sq_theta, FeaturePoint, ProblemDims, QuadForms, SignalCondition};

/// Gaussian-shaped clutter plus white noise:
/// `C[m1, m2] = exp(−2π²σ_f²(m1−m2)²) + σ_n² δ[m1 − m2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClutterModel {
    pub sigma_f: f64,
    pub noise_power: f64,
}

impl ClutterModel {
    pub fn new(sigma_f: f64, noise_power: f64) -> Result<Self> {
        if !(sigma_f > 0.0) || !(noise_power > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "clutter needs sigma_f > 0 and noise_power > 0, got {sigma_f}, {noise_power}"
            )));
        }
        Ok(Self { sigma_f, noise_power })
    }

    /// Spread giving a one-lag clutter correlation `rho`.
    pub fn sigma_f_for_correlation(rho: f64) -> f64 {
        (-rho.ln() / (2.0 * PI * PI)).sqrt()
    }

    /// One-lag correlation 0.95, thermal noise 10 dB below the clutter.
    pub fn reference() -> Self {
        Self { sigma_f: Self::sigma_f_for_correlation(0.95), noise_power: 0.1 }
    }
}

impl Default for ClutterModel {
    fn default() -> Self {
        Self::reference()
    }
}

pub fn gen_covariance(cm: &ClutterModel, n: usize) -> HermitianMatrix {
    let s2 = cm.sigma_f * cm.sigma_f;
    HermitianMatrix::from_lower_fn(n, |i, j| {
        let d = (i - j) as f64;
        let mut v = (-2.0 * PI * PI * s2 * d * d).exp();
        if i == j {
            v += cm.noise_power;
        }
        Complex64::new(v, 0.0)
    })
}

/// Temporal steering `[1, e^{j2πf}, …, e^{j2π(n−1)f}]`.
pub fn steering(n: usize, f: f64) -> ComplexVec {
    ComplexVec::from_vec_unchecked((0..n).map(|m| Complex64::from_polar(1.0, 2.0 * PI * f * m as f64)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteeringModel {
    pub n: usize,
    pub f_d: f64,
    pub delta_f: f64,
}

impl SteeringModel {
    pub fn new(n: usize, f_d: f64, delta_f: f64) -> Result<Self> {
        if f_d.abs() >= 0.5 || (f_d + delta_f).abs() >= 0.5 {
            return Err(Error::InvalidParameter(format!("normalized Doppler outside (-0.5, 0.5): {f_d} + {delta_f}")));
        }
        Ok(Self { n, f_d, delta_f })
    }

    pub fn nominal(&self) -> ComplexVec {
        steering(self.n, self.f_d)
    }

    pub fn actual(&self) -> ComplexVec {
        steering(self.n, self.f_d + self.delta_f)
    }
}

/// Default nominal Doppler.
pub const DEFAULT_F_D: f64 = 0.08;

/// Smallest `δ_f ≥ 0` with `cos²θ(p(δ_f), v; C) = target`, searched before
/// the first local minimum of `cos²θ`.
pub fn solve_mismatch_for_cos2(sm: &SteeringModel, c: &HermitianMatrix, target: f64) -> Result<f64> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::InvalidParameter(format!("cos^2 theta target {target} outside (0, 1]")));
    }
    if target == 1.0 {
        return Ok(0.0);
    }
    let v = sm.nominal();
    let cos2 = |d: f64| cos_sq_theta(&steering(sm.n, sm.f_d + d), &v, c);
    let limit = 0.5 - sm.f_d.abs() - 1e-9;
    let step = 1e-3;
    let (mut prev_d, mut prev) = (0.0, 1.0);
    let mut d = step;
    while d <= limit {
        let cur = cos2(d)?;
        if cur <= target {
            return bisect(|x| Ok(cos2(x)? - target), prev_d, d, 1e-13);
        }
        if cur > prev {
            return Err(Error::Infeasible { target, lo: prev, hi: 1.0 });
        }
        prev_d = d;
        prev = cur;
        d += step;
    }
    Err(Error::Infeasible { target, lo: prev, hi: 1.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialPlan {
    pub seed: u64,
    pub trials: u64,
    pub dims: ProblemDims,
}

impl TrialPlan {
    pub fn new(seed: u64, trials: u64, dims: ProblemDims) -> Result<Self> {
        if trials == 0 {
            return Err(Error::InvalidParameter("need at least one trial".into()));
        }
        Ok(Self { seed, trials, dims })
    }

    /// The random stream of one trial.
    pub fn rng(&self, trial_index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial_index);
        rng
    }
}

/// Disturbance covariance and steering shared by all trials of a run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub dims: ProblemDims,
    pub covariance: HermitianMatrix,
    color: Option<CholeskyFactor>,
    pub f_d: f64,
    nominal: ComplexVec,
}

impl Scenario {
    /// `C = I`.
    pub fn white(dims: ProblemDims, f_d: f64) -> Result<Self> {
        SteeringModel::new(dims.n, f_d, 0.0)?;
        Ok(Self { dims, covariance: HermitianMatrix::identity(dims.n), color: None, f_d, nominal: steering(dims.n, f_d) })
    }

    pub fn clutter(dims: ProblemDims, cm: &ClutterModel, f_d: f64) -> Result<Self> {
        SteeringModel::new(dims.n, f_d, 0.0)?;
        let covariance = gen_covariance(cm, dims.n);
        let color = Some(cholesky(&covariance)?);
        Ok(Self { dims, covariance, color, f_d, nominal: steering(dims.n, f_d) })
    }

    pub fn nominal(&self) -> &ComplexVec {
        &self.nominal
    }

    /// Actual steering and amplitude `|α|` realizing `cond`.
    pub fn signal(&self, cond: SignalCondition) -> Result<Signal> {
        if cond.gamma == 0.0 {
            return Ok(Signal { p: self.nominal.clone(), amplitude: 0.0, delta_f: 0.0 });
        }
        let base = SteeringModel::new(self.dims.n, self.f_d, 0.0)?;
        let delta_f = solve_mismatch_for_cos2(&base, &self.covariance, cond.lambda)?;
        let p = steering(self.dims.n, self.f_d + delta_f);
        let ppc = match &self.color {
            Some(l) => l.quad_form(&p, &p)?.re,
            None => p.norm_sqr(),
        };
        Ok(Signal { p, amplitude: (cond.gamma / ppc).sqrt(), delta_f })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        let n = self.dims.n;
        let w: Vec<Complex64> = (0..n)
            .map(|_| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            })
            .collect();
        match &self.color {
            Some(l) => l.color(&w),
            None => w,
        }
    }

    /// Quadratic forms of one trial; a pure function of `(plan.seed, trial_index)`.
    pub fn trial_forms(&self, plan: &TrialPlan, signal: &Signal, trial_index: u64) -> Result<QuadForms> {
        let mut rng = plan.rng(trial_index);
        let n = self.dims.n;
        let mut s = HermitianMatrix::zeros(n);
        for _ in 0..self.dims.k {
            accumulate_outer(&mut s, &self.draw(&mut rng));
        }
        let mut z = self.draw(&mut rng);
        if signal.amplitude > 0.0 {
            let phase: f64 = rng.random::<f64>() * 2.0 * PI;
            let alpha = Complex64::from_polar(signal.amplitude, phase);
            for (zi, pi) in z.iter_mut().zip(signal.p.as_slice()) {
                *zi += alpha * pi;
            }
        }
        let l = cholesky(&s)?;
        Ok(QuadForms::from_whitened(&l.whiten(&z), &l.whiten(self.nominal.as_slice())))
    }

    pub fn gen_trial(&self, plan: &TrialPlan, signal: &Signal, trial_index: u64) -> Result<FeaturePoint> {
        Ok(self.trial_forms(plan, signal, trial_index)?.feature())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    pub p: ComplexVec,
    pub amplitude: f64,
    pub delta_f: f64,
}

/// A binomial proportion with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub hits: u64,
    pub trials: u64,
}

impl Estimate {
    pub fn from_counts(hits: u64, trials: u64) -> Self {
        let p = hits as f64 / trials as f64;
        Self { value: p, std_error: (p * (1.0 - p) / trials as f64).sqrt(), hits, trials }
    }

    /// `|value − p| / sqrt(p(1−p)/trials)`: distance from `p` in standard
    /// errors computed at `p` itself.
    pub fn z_score(&self, p: f64) -> f64 {
        (self.value - p).abs() / (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Fraction of trials whose feature point lands above `b`.
pub fn exceedance(b: &Boundary, plan: &TrialPlan, scenario: &Scenario, cond: SignalCondition) -> Result<Estimate> {
    if plan.dims != scenario.dims {
        return Err(Error::InvalidParameter("trial plan and scenario disagree on dimensions".into()));
    }
    let signal = scenario.signal(cond)?;
    let hits = (0..plan.trials)
        .into_par_iter()
        .map(|t| -> Result<u64> { Ok(u64::from(b.decide(scenario.gen_trial(plan, &signal, t)?) == Decision::H1)) })
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    Ok(Estimate::from_counts(hits, plan.trials))
}

/// Empirical Pfa under white noise, which suffices for a CFAR detector.
pub fn estimate_pfa(b: &Boundary, plan: &TrialPlan) -> Result<Estimate> {
    exceedance(b, plan, &Scenario::white(plan.dims, DEFAULT_F_D)?, SignalCondition::h0())
}

pub fn estimate_pd(b: &Boundary, plan: &TrialPlan, scenario: &Scenario, cond: SignalCondition) -> Result<Estimate> {
    exceedance(b, plan, scenario, cond)
}

/// A Monte Carlo threshold for a classical detector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub detector: String,
    pub pfa: f64,
    pub eta: f64,
    pub trials: u64,
    pub seed: u64,
}

impl Calibration {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("calibration serializes")
    }
}

/// Threshold at the `⌈trials · pfa⌉`-th largest raw statistic over H0 trials.
pub fn calibrate_threshold(kind: BaselineKind, kappa: f64, pfa_target: f64, plan: &TrialPlan) -> Result<Calibration> {
    if !(pfa_target > 0.0 && pfa_target <= 1.0) {
        return Err(Error::InvalidParameter(format!("target Pfa {pfa_target} outside (0, 1]")));
    }
    if (plan.trials as f64) < 10.0 / pfa_target {
        log::warn!("{} trials are few for Pfa {pfa_target:e}; expect a noisy threshold", plan.trials);
    }
    let scenario = Scenario::white(plan.dims, DEFAULT_F_D)?;
    let signal = scenario.signal(SignalCondition::h0())?;
    let mut stats = (0..plan.trials)
        .into_par_iter()
        .map(|t| Ok(raw_statistic(kind, kappa, scenario.trial_forms(plan, &signal, t)?)))
        .collect::<Result<Vec<f64>>>()?;
    stats.sort_by(|a, b| b.total_cmp(a));
    let rank = ((plan.trials as f64 * pfa_target).ceil() as usize).clamp(1, stats.len());
    let detector = if kind == BaselineKind::Kalson { format!("kalson:{kappa}") } else { kind.to_string() };
    Ok(Calibration { detector, pfa: pfa_target, eta: stats[rank - 1], trials: plan.trials, seed: plan.seed })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub label: String,
    pub points: Vec<FeaturePoint>,
}

/// Feature points of `plan.trials` draws for each labelled condition.
pub fn cluster_scatter(plan: &TrialPlan, scenario: &Scenario, conditions: &[(String, SignalCondition)]) -> Result<Vec<Cluster>> {
    conditions
        .iter()
        .map(|(label, cond)| {
            let signal = scenario.signal(*cond)?;
            let points = (0..plan.trials)
                .into_par_iter()
                .map(|t| scenario.gen_trial(plan, &signal, t))
                .collect::<Result<Vec<_>>>()?;
            Ok(Cluster { label: label.clone(), points })
        })
        .collect()
}

/// Columns `condition_label,beta,t_tilde`.
pub fn scatter_csv(clusters: &[Cluster]) -> String {
    let mut out = String::from("condition_label,beta,t_tilde\n");
    for c in clusters {
        for p in &c.points {
            let _ = writeln!(out, "{},{:e},{:e}", c.label, p.beta, p.t_tilde);
        }
    }
    out
}
