//! Semi-analytic detection and false-alarm probabilities.
//!
//! For any boundary `f` the exceedance probability is
//! `∫₀¹ (1 − Ψ(f(β); γβλ)) Ω(β; γ(1−λ)) dβ`, integrated by adaptive
//! Gauss–Legendre over panels aligned with the boundary's breakpoints.
//! Under H0 and for a linear segment the same integral has a closed form in
//! terms of a terminating Appell F₁, which is what the designer inverts.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::boundary::{segment_bounds, Boundary, PiecewiseLinearBoundary, NONNEG_TOL};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_panels, DEFAULT_ABS_TOL};
use crate::solver::brent;
use crate::specfun::{appell_f1_finite_dd, ln_factorial, Dd};
use crate::stats::{beta_cdf_h0, db_to_linear, omega_pdf, psi_cdf, psi_sf, OmegaRoute, ProblemDims, SignalCondition};

/// Intercepts above this are treated as "threshold at infinity".
pub const EPS_CAP: f64 = 1e3;

/// `P(t̃ > f(β))` for an arbitrary curve; `breakpoints` must include 0, 1 and
/// every discontinuity of `f`.
pub fn prob_exceed_curve<F: Fn(f64) -> f64 + Sync>(
    f: F,
    breakpoints: &[f64],
    cond: SignalCondition,
    dims: ProblemDims,
) -> Result<f64> {
    let d2b = cond.delta2_beta();
    let integrand = |b: f64| psi_sf(f(b), cond.delta2_f(b), dims) * omega_pdf(b, d2b, dims, OmegaRoute::Laguerre);
    Ok(integrate_panels(integrand, breakpoints, DEFAULT_ABS_TOL)?.clamp(0.0, 1.0))
}

/// `P(t̃ > f(β) | γ, λ)`.
pub fn prob_exceed(b: &Boundary, cond: SignalCondition, dims: ProblemDims) -> Result<f64> {
    prob_exceed_curve(|x| b.value(x), &b.breakpoints(), cond, dims)
}

/// Exceedance of the line `m β + ε` (clamped at zero) restricted to
/// `β ∈ [lo, hi]`.
pub fn line_exceed(m: f64, eps: f64, lo: f64, hi: f64, cond: SignalCondition, dims: ProblemDims) -> Result<f64> {
    let d2b = cond.delta2_beta();
    let integrand =
        |b: f64| psi_sf((m * b + eps).max(0.0), cond.delta2_f(b), dims) * omega_pdf(b, d2b, dims, OmegaRoute::Laguerre);
    Ok(integrate_panels(integrand, &[lo, hi], DEFAULT_ABS_TOL)?.max(0.0))
}

/// `r_i`: the probability that β falls in segment `i` (one-based) and t̃
/// stays below the segment line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentEval {
    pub index: usize,
    pub r_value: f64,
    pub gamma: f64,
    pub lambda: f64,
}

pub fn r_segment(
    i: usize,
    eps_i: f64,
    m_i: f64,
    cond: SignalCondition,
    dims: ProblemDims,
    p: usize,
) -> Result<SegmentEval> {
    check_index(i, p)?;
    let (lo, hi) = segment_bounds(i - 1, p);
    let d2b = cond.delta2_beta();
    let integrand = |b: f64| {
        psi_cdf((m_i * b + eps_i).max(0.0), cond.delta2_f(b), dims) * omega_pdf(b, d2b, dims, OmegaRoute::Laguerre)
    };
    let r = integrate_panels(integrand, &[lo, hi], DEFAULT_ABS_TOL)?;
    Ok(SegmentEval { index: i, r_value: r.clamp(0.0, 1.0), gamma: cond.gamma, lambda: cond.lambda })
}

fn check_index(i: usize, p: usize) -> Result<()> {
    if i == 0 || i > p {
        return Err(Error::InvalidParameter(format!("segment index {i} outside 1..={p}")));
    }
    Ok(())
}

/// β-mass of segment `i` (one-based) under H0.
pub fn segment_mass_h0(i: usize, dims: ProblemDims, p: usize) -> f64 {
    let (lo, hi) = segment_bounds(i - 1, p);
    beta_cdf_h0(hi, dims) - beta_cdf_h0(lo, dims)
}

/// `∫₀^u x^a (1−x)^b (1 − y x)^{−s} dx = u^{a+1}/(a+1) · F₁(a+1; −b, s; a+2; u, y u)`.
fn beta_like_primitive(a: u32, b: u32, s: u32, y: f64, u: f64) -> Result<Dd> {
    if u <= 0.0 {
        return Ok(Dd::ZERO);
    }
    let a1 = (a + 1) as f64;
    let f1 = appell_f1_finite_dd(a1, -(b as f64), s as f64, a1 + 1.0, u, y * u)?;
    Ok(Dd::new(u).powi(a as i64 + 1) / Dd::new(a1) * f1)
}

/// H0 exceedance of segment `i`: `∫_seg (1 + m β + ε)^{−L} p(β) dβ`, the
/// complement of `r_i` within the segment's β-mass.
pub fn segment_exceed_h0(i: usize, eps_i: f64, m_i: f64, dims: ProblemDims, p: usize) -> Result<f64> {
    check_index(i, p)?;
    let (lo, hi) = segment_bounds(i - 1, p);
    let f_lo = m_i * lo + eps_i;
    let f_hi = m_i * hi + eps_i;
    if f_lo.min(f_hi) < -NONNEG_TOL {
        return Err(Error::InvalidBoundary(format!(
            "segment {i} line goes negative ({:e}); the closed form needs f >= 0",
            f_lo.min(f_hi)
        )));
    }
    let l = dims.l();
    let nm2 = (dims.n - 2) as u32;
    let (n, k) = (dims.n as u64, dims.k as u64);
    let ln_c = ln_factorial(k) - ln_factorial(k - n + 1) - ln_factorial(n - 2);
    let c = Dd::new(ln_c.exp());
    // Expand around β = 0 or around β = 1, whichever keeps the summed
    // series argument further from 1.
    let one_eps = 1.0 + eps_i;
    let one_f1 = 1.0 + eps_i + m_i;
    let effective = |y: f64| if y < 0.0 { -y / (1.0 - y) } else { y };
    let w_zero = if one_eps > 0.0 { effective(-m_i * hi / one_eps) } else { f64::INFINITY };
    let w_one = if one_f1 > 0.0 { effective(m_i * (1.0 - lo) / one_f1) } else { f64::INFINITY };
    let val = if w_zero <= w_one && w_zero < 1.0 {
        let y = -m_i / one_eps;
        let g_hi = beta_like_primitive(l, nm2, l, y, hi)?;
        let g_lo = beta_like_primitive(l, nm2, l, y, lo)?;
        c * Dd::new(one_eps).powi(-(l as i64)) * (g_hi - g_lo)
    } else if w_one < 1.0 {
        // β' = 1 − β turns 1 + ε + mβ into A (1 − (m/A) β') with A = 1 + ε + m
        let y = m_i / one_f1;
        let g_hi = beta_like_primitive(nm2, l, l, y, 1.0 - lo)?;
        let g_lo = beta_like_primitive(nm2, l, l, y, 1.0 - hi)?;
        c * Dd::new(one_f1).powi(-(l as i64)) * (g_hi - g_lo)
    } else {
        return Err(Error::InvalidBoundary(format!("segment {i}: no valid closed-form expansion")));
    };
    Ok(val.to_f64().max(0.0))
}

/// `r_i` under H0 in closed form.
pub fn r_closed_h0(i: usize, eps_i: f64, m_i: f64, dims: ProblemDims, p: usize) -> Result<f64> {
    let exceed = segment_exceed_h0(i, eps_i, m_i, dims, p)?;
    Ok((segment_mass_h0(i, dims, p) - exceed).max(0.0))
}

/// Smallest intercept keeping segment `i` nonnegative.
pub fn eps_floor(i: usize, m_i: f64, p: usize) -> f64 {
    let (lo, hi) = segment_bounds(i - 1, p);
    -(m_i * lo).min(m_i * hi)
}

/// Intercept giving segment `i` the H0 exceedance `target`.
pub fn invert_exceed_h0(i: usize, m_i: f64, dims: ProblemDims, p: usize, target: f64) -> Result<f64> {
    let lo = eps_floor(i, m_i, p);
    let hi = EPS_CAP;
    let e_lo = segment_exceed_h0(i, lo, m_i, dims, p)?;
    let e_hi = segment_exceed_h0(i, hi, m_i, dims, p)?;
    const TOL: f64 = 1e-13;
    // reaching exceedance e_hi or less needs an intercept beyond the cap
    if target > e_lo + TOL || target < e_hi {
        return Err(Error::Infeasible { target, lo: e_hi, hi: e_lo });
    }
    if target >= e_lo {
        return Ok(lo);
    }
    brent(|e| Ok(segment_exceed_h0(i, e, m_i, dims, p)? - target), lo, hi, 1e-15)
}

/// Intercept with `r_closed_h0(i, ε, m) = target`.
pub fn invert_r_h0(i: usize, m_i: f64, dims: ProblemDims, p: usize, target: f64) -> Result<f64> {
    check_index(i, p)?;
    let mass = segment_mass_h0(i, dims, p);
    invert_exceed_h0(i, m_i, dims, p, mass - target).map_err(|e| match e {
        Error::Infeasible { lo, hi, .. } => Error::Infeasible { target, lo: mass - hi, hi: mass - lo },
        other => other,
    })
}

/// Closed-form false-alarm probability, summed from the per-segment
/// exceedances (equivalently `1 − Σ r_i`).
pub fn pfa_closed_form(b: &PiecewiseLinearBoundary, dims: ProblemDims) -> Result<f64> {
    let k = b.k();
    let mut acc = crate::specfun::Neumaier::default();
    for i in 0..k {
        acc.add(segment_exceed_h0(i + 1, b.intercepts()[i], b.slopes()[i], dims, k)?);
    }
    Ok(acc.sum())
}

/// Pd over an SNR (dB) × cos²θ grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MesaGrid {
    pub gamma_db: Vec<f64>,
    pub lambda: Vec<f64>,
    /// `pd[i][j]` at `gamma_db[i]`, `lambda[j]`.
    pub pd: Vec<Vec<f64>>,
}

pub fn mesa(b: &Boundary, gamma_db: &[f64], lambda: &[f64], dims: ProblemDims) -> Result<MesaGrid> {
    if gamma_db.is_empty() || lambda.is_empty() {
        return Err(Error::InvalidParameter("mesa grids must be nonempty".into()));
    }
    let cells: Vec<(usize, usize)> = (0..gamma_db.len()).flat_map(|i| (0..lambda.len()).map(move |j| (i, j))).collect();
    let vals: Vec<f64> = cells
        .par_iter()
        .map(|&(i, j)| {
            let cond = SignalCondition::new(db_to_linear(gamma_db[i]), lambda[j])?;
            prob_exceed(b, cond, dims)
        })
        .collect::<Result<_>>()?;
    let pd = vals.chunks(lambda.len()).map(|c| c.to_vec()).collect();
    Ok(MesaGrid { gamma_db: gamma_db.to_vec(), lambda: lambda.to_vec(), pd })
}

fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let s = format!("{:.5e}", x);
    // normalize to a plain number when it reads naturally
    let v: f64 = s.parse().expect("formatted float");
    let mag = v.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        let decimals = (5 - mag).max(0) as usize;
        let t = format!("{:.*}", decimals, v);
        let t = if t.contains('.') { t.trim_end_matches('0').trim_end_matches('.').to_string() } else { t };
        t
    } else {
        s
    }
}

impl MesaGrid {
    /// Header row of λ values, first column γ in dB, 6 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("gamma_db");
        for l in &self.lambda {
            let _ = write!(out, ",{}", sig6(*l));
        }
        out.push('\n');
        for (g, row) in self.gamma_db.iter().zip(&self.pd) {
            out.push_str(&sig6(*g));
            for v in row {
                let _ = write!(out, ",{}", sig6(*v));
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(s: &str) -> Result<Self> {
        let mut lines = s.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty mesa CSV".into()))?;
        let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("mesa CSV value '{t}': {e}")));
        let lambda = header.split(',').skip(1).map(parse).collect::<Result<Vec<_>>>()?;
        let (mut gamma_db, mut pd) = (Vec::new(), Vec::new());
        for line in lines {
            let mut it = line.split(',');
            gamma_db.push(parse(it.next().unwrap_or(""))?);
            let row = it.map(parse).collect::<Result<Vec<_>>>()?;
            if row.len() != lambda.len() {
                return Err(Error::Parse(format!("mesa CSV row has {} values, expected {}", row.len(), lambda.len())));
            }
            pd.push(row);
        }
        Ok(Self { gamma_db, lambda, pd })
    }

    /// Iso-Pd contour: for each λ, the γ (dB) of the first upward crossing
    /// of `level`, linearly interpolated; `None` where Pd never crosses.
    pub fn iso_contour(&self, level: f64) -> Vec<Option<f64>> {
        (0..self.lambda.len())
            .map(|j| {
                let col: Vec<f64> = self.pd.iter().map(|r| r[j]).collect();
                let mut crossing = None;
                for i in 1..col.len() {
                    if col[i - 1] < level && col[i] >= level {
                        let t = (level - col[i - 1]) / (col[i] - col[i - 1]);
                        crossing = Some(self.gamma_db[i - 1] + t * (self.gamma_db[i] - self.gamma_db[i - 1]));
                        break;
                    }
                }
                if crossing.is_none() && col.first().is_some_and(|&v| v >= level) {
                    crossing = Some(self.gamma_db[0]);
                }
                let monotone = col.windows(2).all(|w| w[1] >= w[0] - 1e-12);
                if !monotone && crossing.is_some() {
                    log::debug!("Pd not monotone in SNR at lambda = {}; first upward crossing used", self.lambda[j]);
                }
                crossing
            })
            .collect()
    }
}

/// Area between iso-Pd curves, with the λ range it was computed over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Abi {
    pub value: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
}

/// `∫ |γ_a(λ) − γ_ref(λ)| dλ` (γ in dB) by the trapezoidal rule over the
/// λ intervals where both contours exist.
pub fn abi(mesa_a: &MesaGrid, mesa_ref: &MesaGrid, pd_level: f64) -> Result<Abi> {
    if mesa_a.gamma_db != mesa_ref.gamma_db || mesa_a.lambda != mesa_ref.lambda {
        return Err(Error::InvalidParameter("AbI needs identical grids".into()));
    }
    if !(pd_level > 0.0 && pd_level < 1.0) {
        return Err(Error::InvalidParameter(format!("Pd level {pd_level} outside (0, 1)")));
    }
    let ca = mesa_a.iso_contour(pd_level);
    let cr = mesa_ref.iso_contour(pd_level);
    if ca.iter().all(Option::is_none) || cr.iter().all(Option::is_none) {
        return Err(Error::Undefined(format!("no iso-Pd contour at level {pd_level}")));
    }
    let mut idx: Vec<usize> = (0..mesa_a.lambda.len()).collect();
    idx.sort_by(|&x, &y| mesa_a.lambda[x].total_cmp(&mesa_a.lambda[y]));
    let diff = |j: usize| match (ca[j], cr[j]) {
        (Some(a), Some(r)) => Some((a - r).abs()),
        _ => None,
    };
    let mut area = 0.0;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for w in idx.windows(2) {
        if let (Some(d0), Some(d1)) = (diff(w[0]), diff(w[1])) {
            let (l0, l1) = (mesa_a.lambda[w[0]], mesa_a.lambda[w[1]]);
            area += 0.5 * (d0 + d1) * (l1 - l0);
            lo = lo.min(l0);
            hi = hi.max(l1);
        }
    }
    if lo > hi {
        // a single shared λ gives zero width
        let j = idx.iter().copied().find(|&j| diff(j).is_some());
        match j {
            Some(j) => return Ok(Abi { value: 0.0, lambda_lo: mesa_a.lambda[j], lambda_hi: mesa_a.lambda[j] }),
            None => return Err(Error::Undefined(format!("contours at level {pd_level} never coexist"))),
        }
    }
    Ok(Abi { value: area, lambda_lo: lo, lambda_hi: hi })
}
