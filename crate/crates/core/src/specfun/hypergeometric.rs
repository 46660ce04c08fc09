use super::Dd;
use crate::error::{Error, Result};

const DEFAULT_REL_TOL: f64 = 1e-15;
const DEFAULT_MAX_TERMS: usize = 200_000;

/// A summed series together with how it was truncated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesResult {
    pub value: f64,
    pub terms_used: usize,
    /// Upper bound on the absolute value of the discarded tail.
    pub truncation_bound: f64,
}

/// `₁F₁(−n; b; z)`, a polynomial of degree `n` in `z`.
pub fn kummer_1f1_neg_int(n: u32, b: f64, z: f64) -> f64 {
    let mut term = 1.0;
    let mut acc = 1.0;
    for k in 0..n {
        let k = k as f64;
        term *= (k - n as f64) / (b + k) * z / (k + 1.0);
        acc += term;
    }
    acc
}

/// Generalized Laguerre polynomial `L_n^{(α)}(x)` by the three-term recurrence.
pub fn laguerre_gen(n: u32, alpha: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let (mut l0, mut l1) = (1.0, 1.0 + alpha - x);
    for k in 1..n {
        let k = k as f64;
        let l2 = ((2.0 * k + 1.0 + alpha - x) * l1 - (k + alpha) * l0) / (k + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

fn non_positive_integer(x: f64) -> Option<u64> {
    if x <= 0.0 && x.fract() == 0.0 {
        Some((-x) as u64)
    } else {
        None
    }
}

/// Gauss `₂F₁(a, b; c; z)` for real `z < 1` (any `z` when the series
/// terminates). Negative arguments go through the Pfaff transformation so
/// the summed series has argument in `[0, 1)`.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<SeriesResult> {
    let terminating = non_positive_integer(a).is_some() || non_positive_integer(b).is_some();
    if z < 0.0 && !terminating {
        let w = z / (z - 1.0);
        let pre = (1.0 - z).powf(-b);
        let r = gauss_2f1_series(c - a, b, c, w, DEFAULT_REL_TOL, DEFAULT_MAX_TERMS)?;
        return Ok(SeriesResult {
            value: pre * r.value,
            terms_used: r.terms_used,
            truncation_bound: pre * r.truncation_bound,
        });
    }
    gauss_2f1_series(a, b, c, z, DEFAULT_REL_TOL, DEFAULT_MAX_TERMS)
}

/// The defining power series of `₂F₁`, summed until the tail bound drops
/// below `rel_tol · |sum|`.
pub fn gauss_2f1_series(a: f64, b: f64, c: f64, z: f64, rel_tol: f64, max_terms: usize) -> Result<SeriesResult> {
    if non_positive_integer(c).is_some() {
        return Err(Error::Undefined(format!("2F1 with c = {c}")));
    }
    let stop = non_positive_integer(a).into_iter().chain(non_positive_integer(b)).min();
    if stop.is_none() && z.abs() >= 1.0 {
        return Err(Error::Divergence(format!("2F1 series at |z| = {} >= 1", z.abs())));
    }
    let mut term = 1.0f64;
    let mut acc = super::Neumaier::default();
    acc.add(1.0);
    let mut n = 0usize;
    loop {
        if let Some(s) = stop {
            if n as u64 >= s {
                return Ok(SeriesResult { value: acc.sum(), terms_used: n + 1, truncation_bound: 0.0 });
            }
        }
        let nf = n as f64;
        let ratio = (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        term *= ratio;
        acc.add(term);
        n += 1;
        let rho = ratio.abs().max(z.abs());
        if stop.is_none() && rho < 1.0 {
            let bound = term.abs() * rho / (1.0 - rho);
            if bound <= rel_tol * acc.sum().abs() || term == 0.0 {
                return Ok(SeriesResult { value: acc.sum(), terms_used: n + 1, truncation_bound: bound });
            }
        }
        if n >= max_terms {
            return Err(Error::Divergence(format!("2F1 series did not settle in {max_terms} terms")));
        }
    }
}

/// `₂F₁` in double-double for the Appell sum. Only the cases that sum reaches
/// are supported: `z ∈ (−∞, 1)` with `c` not a non-positive integer.
fn gauss_2f1_dd(a: f64, b: f64, c: f64, z: Dd) -> Result<Dd> {
    if z.hi == 0.0 {
        return Ok(Dd::ONE);
    }
    let terminating = non_positive_integer(a).is_some() || non_positive_integer(b).is_some();
    if z.hi < 0.0 && !terminating {
        // Pfaff: (1−z)^{−b} ₂F₁(c−a, b; c; z/(z−1))
        let one_minus = Dd::ONE - z;
        let w = z / (z - Dd::ONE);
        let pre = dd_pow(one_minus, -b);
        return Ok(pre * gauss_series_dd(c - a, b, c, w)?);
    }
    gauss_series_dd(a, b, c, z)
}

fn dd_pow(x: Dd, e: f64) -> Dd {
    if e.fract() == 0.0 && e.abs() < 1e9 {
        x.powi(e as i64)
    } else {
        // Non-integer exponents never occur on the Appell path; f64 suffices.
        Dd::new(x.to_f64().powf(e))
    }
}

fn gauss_series_dd(a: f64, b: f64, c: f64, z: Dd) -> Result<Dd> {
    if non_positive_integer(c).is_some() {
        return Err(Error::Undefined(format!("2F1 with c = {c}")));
    }
    let stop = non_positive_integer(a).into_iter().chain(non_positive_integer(b)).min();
    let za = z.to_f64().abs();
    if stop.is_none() && za >= 1.0 {
        return Err(Error::Divergence(format!("2F1 series at |z| = {za} >= 1")));
    }
    let mut term = Dd::ONE;
    let mut acc = Dd::ONE;
    let mut n = 0usize;
    loop {
        if let Some(s) = stop {
            if n as u64 >= s {
                return Ok(acc);
            }
        }
        let nf = n as f64;
        let num = Dd::new(a + nf) * Dd::new(b + nf);
        let den = Dd::new(c + nf) * Dd::new(nf + 1.0);
        let ratio = num / den * z;
        term = term * ratio;
        acc = acc + term;
        n += 1;
        let rho = ratio.to_f64().abs().max(za);
        if stop.is_none() && rho < 1.0 {
            let bound = term.to_f64().abs() * rho / (1.0 - rho);
            if bound <= 1e-32 * acc.to_f64().abs() || term.hi == 0.0 {
                return Ok(acc);
            }
        }
        if n >= DEFAULT_MAX_TERMS {
            return Err(Error::Divergence(format!("2F1 series did not settle in {DEFAULT_MAX_TERMS} terms")));
        }
    }
}

/// Appell `F₁(a; b, b'; c; x, y)` when `b` is a non-positive integer, as the
/// finite sum `Σ_j (a)_j (b)_j / ((c)_j j!) x^j ₂F₁(a+j, b'; c+j; y)`.
/// Requires `y < 1`.
pub fn appell_f1_finite(a: f64, b: f64, bp: f64, c: f64, x: f64, y: f64) -> Result<f64> {
    appell_f1_finite_dd(a, b, bp, c, x, y).map(Dd::to_f64)
}

/// [`appell_f1_finite`] returning the double-double value. The terms
/// alternate in sign when `x > 0`, so the sum is carried in extended
/// precision.
pub fn appell_f1_finite_dd(a: f64, b: f64, bp: f64, c: f64, x: f64, y: f64) -> Result<Dd> {
    let m = non_positive_integer(b)
        .ok_or_else(|| Error::InvalidParameter(format!("Appell F1 finite sum needs b a non-positive integer, got {b}")))?;
    if !(y < 1.0) {
        return Err(Error::Divergence(format!("Appell F1 with y = {y} >= 1")));
    }
    let xd = Dd::new(x);
    let yd = Dd::new(y);
    let mut coef = Dd::ONE;
    let mut acc = Dd::ZERO;
    for j in 0..=m {
        let jf = j as f64;
        if j > 0 {
            let num = Dd::new(a + jf - 1.0) * Dd::new(b + jf - 1.0);
            let den = Dd::new(c + jf - 1.0) * Dd::new(jf);
            coef = coef * num / den * xd;
        }
        if coef.hi == 0.0 {
            break;
        }
        let inner = gauss_2f1_dd(a + jf, bp, c + jf, yd)?;
        acc = acc + coef * inner;
    }
    if !acc.is_finite() {
        return Err(Error::Divergence("Appell F1 finite sum overflowed".into()));
    }
    Ok(acc)
}
