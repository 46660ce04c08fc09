//! The maximal invariant `(β, t̃)` and its laws.
//!
//! Given the primary snapshot `z`, the sample covariance `S` of the secondary
//! data and the nominal steering vector `v`:
//!
//! ```text
//! a = z†S⁻¹z,  q = |z†S⁻¹v|² / (v†S⁻¹v),  d = 1 + a − q,
//! β = 1/d,     t̃ = q/d.
//! ```
//!
//! Conditionally on β, t̃ is complex noncentral F with 1 and `K−N+1`
//! degrees of freedom and noncentrality `γβλ`; β is complex noncentral Beta
//! with `K−N+2` and `N−1` degrees of freedom and noncentrality `γ(1−λ)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cholesky, CholeskyFactor, ComplexVec, HermitianMatrix};
use crate::specfun::{
    binomial, kummer_1f1_neg_int, laguerre_gen, ln_binomial, ln_factorial, lower_gamma_regularized_all,
    reg_incomplete_beta_int, upper_gamma_regularized_all,
};

/// One realization of the maximal invariant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeaturePoint {
    pub beta: f64,
    pub t_tilde: f64,
}

impl FeaturePoint {
    pub fn new(beta: f64, t_tilde: f64) -> Result<Self> {
        if !(beta > 0.0 && beta <= 1.0) || !(t_tilde >= 0.0) || !t_tilde.is_finite() {
            return Err(Error::InvalidParameter(format!("feature point ({beta}, {t_tilde}) outside (0,1] x [0,inf)")));
        }
        Ok(Self { beta, t_tilde })
    }

    /// Kelly's statistic `t̃ / (1 + t̃)`.
    pub fn kelly(&self) -> f64 {
        self.t_tilde / (1.0 + self.t_tilde)
    }
}

/// Linear SNR `γ` and mismatch `λ = cos²θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignalCondition {
    pub gamma: f64,
    pub lambda: f64,
}

impl SignalCondition {
    pub fn new(gamma: f64, lambda: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("SNR must be finite and nonnegative, got {gamma}")));
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!("cos^2 theta must lie in [0, 1], got {lambda}")));
        }
        Ok(Self { gamma, lambda })
    }

    pub fn from_db(gamma_db: f64, lambda: f64) -> Result<Self> {
        Self::new(db_to_linear(gamma_db), lambda)
    }

    /// The null hypothesis (no signal).
    pub fn h0() -> Self {
        Self { gamma: 0.0, lambda: 1.0 }
    }

    /// Noncentrality of t̃ given β: `γβλ`.
    pub fn delta2_f(&self, beta: f64) -> f64 {
        self.gamma * beta * self.lambda
    }

    /// Noncentrality of β: `γ(1 − λ)`.
    pub fn delta2_beta(&self) -> f64 {
        self.gamma * (1.0 - self.lambda)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    if db == f64::NEG_INFINITY {
        0.0
    } else {
        10f64.powf(db / 10.0)
    }
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Space-time dimension `N` and number of secondary snapshots `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProblemDims {
    pub n: usize,
    pub k: usize,
}

impl ProblemDims {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!("N must be at least 2, got {n}")));
        }
        if k < n {
            return Err(Error::InvalidParameter(format!("K = {k} must be at least N = {n}")));
        }
        Ok(Self { n, k })
    }

    /// `K − N + 1`, the second degrees-of-freedom parameter of t̃ | β.
    pub fn l(&self) -> u32 {
        (self.k - self.n + 1) as u32
    }

    /// Beta parameters `(K−N+2, N−1)` of β.
    pub fn beta_params(&self) -> (u32, u32) {
        ((self.k - self.n + 2) as u32, (self.n - 1) as u32)
    }
}

/// Raw quadratic forms `a = z†S⁻¹z` and `q = |z†S⁻¹v|²/(v†S⁻¹v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadForms {
    pub a: f64,
    pub q: f64,
}

impl QuadForms {
    /// From a whitened primary `L⁻¹z` and whitened steering `L⁻¹v`.
    pub fn from_whitened(wz: &[Complex64], wv: &[Complex64]) -> Self {
        let a: f64 = wz.iter().map(|x| x.norm_sqr()).sum();
        let vv: f64 = wv.iter().map(|x| x.norm_sqr()).sum();
        let zv: Complex64 = wz.iter().zip(wv).map(|(x, y)| x.conj() * y).sum();
        let q = (zv.norm_sqr() / vv).min(a);
        Self { a, q }
    }

    pub fn feature(&self) -> FeaturePoint {
        let d = 1.0 + self.a - self.q;
        FeaturePoint { beta: 1.0 / d, t_tilde: self.q / d }
    }

    pub fn from_feature(fp: FeaturePoint) -> Self {
        Self { a: (1.0 - fp.beta + fp.t_tilde) / fp.beta, q: fp.t_tilde / fp.beta }
    }
}

pub fn quad_forms(z: &ComplexVec, s: &CholeskyFactor, v: &ComplexVec) -> Result<QuadForms> {
    if z.len() != s.dim() || v.len() != s.dim() {
        return Err(Error::DimensionMismatch { expected: s.dim(), found: if z.len() != s.dim() { z.len() } else { v.len() } });
    }
    if v.is_zero() {
        return Err(Error::InvalidParameter("steering vector is zero".into()));
    }
    Ok(QuadForms::from_whitened(&s.whiten(z.as_slice()), &s.whiten(v.as_slice())))
}

/// `(β, t̃)` from the primary snapshot, the sample covariance and the steering.
pub fn feature_map(z: &ComplexVec, s: &HermitianMatrix, v: &ComplexVec) -> Result<FeaturePoint> {
    Ok(quad_forms(z, &cholesky(s)?, v)?.feature())
}

/// `|p†C⁻¹v|² / (p†C⁻¹p · v†C⁻¹v)`.
pub fn cos_sq_theta(p: &ComplexVec, v: &ComplexVec, c: &HermitianMatrix) -> Result<f64> {
    if p.is_zero() || v.is_zero() {
        return Err(Error::InvalidParameter("cos^2 theta of a zero vector".into()));
    }
    let l = cholesky(c)?;
    let pv = l.quad_form(p, v)?;
    let pp = l.quad_form(p, p)?.re;
    let vv = l.quad_form(v, v)?.re;
    Ok((pv.norm_sqr() / (pp * vv)).clamp(0.0, 1.0))
}

/// `|α|² p†C⁻¹p`.
pub fn snr(alpha: Complex64, p: &ComplexVec, c: &HermitianMatrix) -> Result<f64> {
    Ok(alpha.norm_sqr() * cholesky(c)?.quad_form(p, p)?.re)
}

fn psi_weights(f: f64, l: u32) -> impl Iterator<Item = (u32, f64)> {
    // C(L, ℓ) (f/(1+f))^ℓ (1+f)^{-(L-ℓ)}, stable for large f
    let s = f / (1.0 + f);
    let r = 1.0 / (1.0 + f);
    (1..=l).map(move |ell| (ell, binomial(l as u64, ell as u64) * s.powi(ell as i32) * r.powi((l - ell) as i32)))
}

/// `Ψ(f) = P(t̃ ≤ f | β)` with `delta2_f = γβλ`.
pub fn psi_cdf(f: f64, delta2_f: f64, dims: ProblemDims) -> f64 {
    if f <= 0.0 {
        return 0.0;
    }
    if f == f64::INFINITY {
        return 1.0;
    }
    let l = dims.l();
    let q = upper_gamma_regularized_all(l, delta2_f / (1.0 + f));
    let mut acc = crate::specfun::Neumaier::default();
    for (ell, w) in psi_weights(f, l) {
        acc.add(w * q[ell as usize - 1]);
    }
    acc.sum().clamp(0.0, 1.0)
}

/// `1 − Ψ(f)`, summed from positive terms so small tails keep their digits.
pub fn psi_sf(f: f64, delta2_f: f64, dims: ProblemDims) -> f64 {
    if f <= 0.0 {
        return 1.0;
    }
    if f == f64::INFINITY {
        return 0.0;
    }
    let l = dims.l();
    let p = lower_gamma_regularized_all(l, delta2_f / (1.0 + f));
    let mut acc = crate::specfun::Neumaier::default();
    acc.add((1.0 + f).powi(-(l as i32)));
    for (ell, w) in psi_weights(f, l) {
        acc.add(w * p[ell as usize - 1]);
    }
    acc.sum().clamp(0.0, 1.0)
}

/// Which polynomial representation of the β density to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OmegaRoute {
    Kummer,
    #[default]
    Laguerre,
}

/// Density `Ω(β)` of β with noncentrality `delta2_beta = γ(1−λ)`.
pub fn omega_pdf(beta: f64, delta2_beta: f64, dims: ProblemDims, route: OmegaRoute) -> f64 {
    if !(beta > 0.0 && beta < 1.0) {
        return omega_endpoint(beta, delta2_beta, dims);
    }
    let (n, k) = (dims.n as u64, dims.k as u64);
    let deg = (k - n + 2) as u32;
    let x = delta2_beta * (beta - 1.0);
    // x ≤ 0, so both polynomial forms are sums of positive terms
    let (ln_norm, poly) = match route {
        OmegaRoute::Kummer => (
            ((k - n + 2) as f64).ln() + ln_binomial(k, n - 2),
            kummer_1f1_neg_int(deg, (n - 1) as f64, x),
        ),
        OmegaRoute::Laguerre => (((k - n + 2) as f64).ln(), laguerre_gen(deg, (n - 2) as f64, x)),
    };
    let ln = ln_norm - delta2_beta * beta + dims.l() as f64 * beta.ln() + (n - 2) as f64 * (-beta).ln_1p() + poly.ln();
    ln.exp()
}

fn omega_endpoint(beta: f64, delta2_beta: f64, dims: ProblemDims) -> f64 {
    // continuous limits; β^L with L ≥ 1 vanishes at 0, (1−β)^{N−2} at 1 unless N = 2
    if beta == 1.0 && dims.n == 2 {
        return dims.k as f64 * (-delta2_beta).exp();
    }
    0.0
}

/// The β density written as the finite power series in `δ²(1−β)`.
pub fn beta_pdf_series(beta: f64, delta2_beta: f64, dims: ProblemDims) -> f64 {
    if !(beta > 0.0 && beta < 1.0) {
        return omega_endpoint(beta, delta2_beta, dims);
    }
    let (n, k) = (dims.n as u64, dims.k as u64);
    let y = delta2_beta * (1.0 - beta);
    let mut acc = crate::specfun::Neumaier::default();
    for j in 0..=(k - n + 2) {
        let ln_t = ln_binomial(k - n + 2, j) - ln_factorial(n + j - 2);
        let t = if j == 0 { ln_t.exp() } else if y == 0.0 { 0.0 } else { (ln_t + j as f64 * y.ln()).exp() };
        acc.add(t);
    }
    let ln_pre = ln_factorial(k) - ln_factorial(k - n + 1) - delta2_beta * beta
        + dims.l() as f64 * beta.ln()
        + (n - 2) as f64 * (-beta).ln_1p();
    ln_pre.exp() * acc.sum()
}

/// CDF of β under H0: `I_x(K−N+2, N−1)`.
pub fn beta_cdf_h0(x: f64, dims: ProblemDims) -> f64 {
    let (a, b) = dims.beta_params();
    reg_incomplete_beta_int(a, b, x.clamp(0.0, 1.0)).expect("clamped argument")
}

/// Mean of β under H0: `(K−N+2)/(K+1)`.
pub fn beta_mean_h0(dims: ProblemDims) -> f64 {
    let (a, b) = dims.beta_params();
    a as f64 / (a + b) as f64
}
