//! Adaptive Gauss–Legendre quadrature with interval bisection.
//!
//! A panel is accepted when the 10-point rule on the whole panel agrees with
//! the sum over its two halves; otherwise both halves are refined with half
//! the tolerance each. Callers pass every known discontinuity of the
//! integrand as a breakpoint so that no panel ever straddles one.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::specfun::Neumaier;

pub const DEFAULT_ABS_TOL: f64 = 1e-10;
pub const MAX_DEPTH: u32 = 40;

const ORDER: usize = 10;

fn rule() -> &'static ([f64; ORDER], [f64; ORDER]) {
    static RULE: OnceLock<([f64; ORDER], [f64; ORDER])> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut nodes = [0.0; ORDER];
        let mut weights = [0.0; ORDER];
        let n = ORDER as f64;
        for i in 0..ORDER {
            // Chebyshev-like initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(ORDER, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(ORDER, x);
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn gauss<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> Result<f64> {
    let mid = 0.5 * (a + b);
    let left = gauss(f, a, mid);
    let right = gauss(f, mid, b);
    let refined = left + right;
    let diff = (refined - whole).abs();
    if !refined.is_finite() {
        return Err(Error::QuadratureNonConvergence { lo: a, hi: b, tolerance: tol });
    }
    if diff <= tol || diff <= 1e-14 * refined.abs() {
        return Ok(refined);
    }
    if depth >= MAX_DEPTH || mid <= a || mid >= b {
        return Err(Error::QuadratureNonConvergence { lo: a, hi: b, tolerance: tol });
    }
    Ok(adapt(f, a, mid, left, 0.5 * tol, depth + 1)? + adapt(f, mid, b, right, 0.5 * tol, depth + 1)?)
}

/// `∫_a^b f` to absolute tolerance `abs_tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let whole = gauss(&f, a, b);
    adapt(&f, a, b, whole, abs_tol, 0)
}

/// Integral over consecutive panels `[bp[0], bp[1]], [bp[1], bp[2]], ...`;
/// the tolerance is shared in proportion to panel width.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: F, breakpoints: &[f64], abs_tol: f64) -> Result<f64> {
    if breakpoints.len() < 2 {
        return Ok(0.0);
    }
    let span = breakpoints[breakpoints.len() - 1] - breakpoints[0];
    let mut acc = Neumaier::default();
    for w in breakpoints.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let tol = abs_tol * (b - a) / span;
        let whole = gauss(&f, a, b);
        acc.add(adapt(&f, a, b, whole, tol, 0)?);
    }
    Ok(acc.sum())
}
