use super::{ln_binomial, ln_factorial, Neumaier};
use crate::error::{Error, Result};

/// Γ(l, x) for integer `l ≥ 1` via `(l−1)! e^{−x} Σ_{i<l} x^i / i!`.
pub fn upper_incomplete_gamma_int(l: u32, x: f64) -> f64 {
    assert!(l >= 1, "upper_incomplete_gamma_int needs l >= 1");
    let q = upper_gamma_regularized_all(l, x);
    q[l as usize - 1] * super::factorial(l as u64 - 1)
}

/// `Q(ℓ, x) = Γ(ℓ, x) / Γ(ℓ)` for ℓ = 1..=l_max, built upward by adding the
/// positive Poisson terms `e^{−x} x^ℓ / ℓ!`.
pub fn upper_gamma_regularized_all(l_max: u32, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(l_max as usize);
    if x == 0.0 {
        out.resize(l_max as usize, 1.0);
        return out;
    }
    let mut term = (-x).exp();
    let mut acc = Neumaier::default();
    for ell in 1..=l_max {
        acc.add(term);
        out.push(acc.sum().min(1.0));
        term *= x / ell as f64;
    }
    out
}

/// `P(ℓ, x) = 1 − Q(ℓ, x)` for ℓ = 1..=l_max without cancellation: the top
/// value comes from the positive tail series (or from `1 − Q` when `x` is
/// large and `Q` is small), then the rest follow downward by adding
/// positive terms.
pub fn lower_gamma_regularized_all(l_max: u32, x: f64) -> Vec<f64> {
    let n = l_max as usize;
    let mut out = vec![0.0; n];
    if x <= 0.0 || n == 0 {
        return out;
    }
    let lf = l_max as f64;
    // e^{-x} x^l / l!
    let lnx = x.ln();
    let ln_term = |ell: u32| -x + ell as f64 * lnx - ln_factorial(ell as u64);
    let top = if x < lf + 1.0 {
        let mut term = 1.0;
        let mut s = Neumaier::default();
        let mut j = 0u32;
        loop {
            s.add(term);
            j += 1;
            term *= x / (lf + j as f64);
            if term < 1e-17 * s.sum() || j > 10_000 {
                break;
            }
        }
        (ln_term(l_max)).exp() * s.sum()
    } else {
        let q = upper_gamma_regularized_all(l_max, x);
        1.0 - q[n - 1]
    };
    out[n - 1] = top;
    for ell in (1..l_max).rev() {
        let t = ln_term(ell).exp();
        out[ell as usize - 1] = out[ell as usize] + t;
    }
    for v in &mut out {
        *v = v.clamp(0.0, 1.0);
    }
    out
}

/// Regularized incomplete beta `I_x(a, b)` for positive integers through the
/// binomial tail `Σ_{j=a}^{a+b−1} C(a+b−1, j) x^j (1−x)^{a+b−1−j}`.
pub fn reg_incomplete_beta_int(a: u32, b: u32, x: f64) -> Result<f64> {
    if a == 0 || b == 0 {
        return Err(Error::InvalidParameter("incomplete beta needs positive integer parameters".into()));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidParameter(format!("incomplete beta argument {x} outside [0, 1]")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let n = (a + b - 1) as u64;
    let (lx, l1x) = (x.ln(), (-x).ln_1p());
    // Sum whichever tail has fewer terms and complement if needed.
    let tail = |from: u64, to: u64| -> f64 {
        let mut acc = Neumaier::default();
        for j in from..=to {
            acc.add((ln_binomial(n, j) + j as f64 * lx + (n - j) as f64 * l1x).exp());
        }
        acc.sum()
    };
    let upper = tail(a as u64, n);
    Ok(upper.clamp(0.0, 1.0))
}
