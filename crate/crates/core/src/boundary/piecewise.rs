use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed when checking nonnegativity of a segment at its ends.
pub const NONNEG_TOL: f64 = 1e-12;

/// `f(β) = m_ℓ β + ε_ℓ` on the uniform partition `[(ℓ−1)/k, ℓ/k)`, the last
/// segment closed at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPiecewise", into = "RawPiecewise")]
pub struct PiecewiseLinearBoundary {
    m: Vec<f64>,
    eps: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawPiecewise {
    k: usize,
    m: Vec<f64>,
    eps: Vec<f64>,
}

impl TryFrom<RawPiecewise> for PiecewiseLinearBoundary {
    type Error = Error;
    fn try_from(r: RawPiecewise) -> Result<Self> {
        if r.k != r.m.len() {
            return Err(Error::InvalidBoundary(format!("k = {} but {} slopes given", r.k, r.m.len())));
        }
        Self::new(r.m, r.eps)
    }
}

impl From<PiecewiseLinearBoundary> for RawPiecewise {
    fn from(b: PiecewiseLinearBoundary) -> Self {
        RawPiecewise { k: b.m.len(), m: b.m, eps: b.eps }
    }
}

impl PiecewiseLinearBoundary {
    pub fn new(m: Vec<f64>, eps: Vec<f64>) -> Result<Self> {
        let b = Self::new_unchecked(m, eps)?;
        for i in 0..b.k() {
            let (lo, hi) = b.segment_bounds(i);
            let worst = b.line(i, lo).min(b.line(i, hi));
            if worst < -NONNEG_TOL {
                return Err(Error::InvalidBoundary(format!("segment {} goes negative ({worst:e})", i + 1)));
            }
        }
        Ok(b)
    }

    /// Validates shape and finiteness only; segments may dip below zero.
    pub(crate) fn new_unchecked(m: Vec<f64>, eps: Vec<f64>) -> Result<Self> {
        if m.is_empty() {
            return Err(Error::InvalidBoundary("need at least one segment".into()));
        }
        if m.len() != eps.len() {
            return Err(Error::InvalidBoundary(format!("{} slopes but {} intercepts", m.len(), eps.len())));
        }
        if m.iter().chain(&eps).any(|x| !x.is_finite()) {
            return Err(Error::InvalidBoundary("non-finite coefficient".into()));
        }
        Ok(Self { m, eps })
    }

    pub fn constant(value: f64) -> Result<Self> {
        Self::new(vec![0.0], vec![value])
    }

    pub fn k(&self) -> usize {
        self.m.len()
    }

    pub fn slopes(&self) -> &[f64] {
        &self.m
    }

    pub fn intercepts(&self) -> &[f64] {
        &self.eps
    }

    /// Bounds `[(i)/k, (i+1)/k]` of the zero-based segment `i`.
    pub fn segment_bounds(&self, i: usize) -> (f64, f64) {
        segment_bounds(i, self.k())
    }

    /// Zero-based segment holding β (left-closed, β = 1 in the last).
    pub fn segment_of(&self, beta: f64) -> usize {
        let k = self.k();
        ((beta * k as f64).floor() as usize).min(k - 1)
    }

    /// Unclamped line of segment `i` at β.
    pub fn line(&self, i: usize, beta: f64) -> f64 {
        self.m[i] * beta + self.eps[i]
    }

    pub fn value(&self, beta: f64) -> f64 {
        self.line(self.segment_of(beta), beta).max(0.0)
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let k = self.k();
        (0..=k).map(|i| i as f64 / k as f64).collect()
    }

    /// Copy with segment `i`'s intercept replaced.
    pub fn with_intercept(&self, i: usize, eps: f64) -> Self {
        let mut b = self.clone();
        b.eps[i] = eps;
        b
    }

    /// Copy with every intercept moved by `shift`.
    pub fn shifted(&self, shift: f64) -> Self {
        Self { m: self.m.clone(), eps: self.eps.iter().map(|e| e + shift).collect() }
    }

    /// Nudges each intercept after the first by a few ulps so that adjacent
    /// lines evaluate to the same double at their shared junction. Used on
    /// curves that are continuous up to rounding.
    pub fn snap_junctions(&self) -> Self {
        let mut b = self.clone();
        let k = b.k();
        for i in 1..k {
            let x = i as f64 / k as f64;
            let target = b.line(i - 1, x);
            let mut e = b.eps[i] + (target - b.line(i, x));
            for _ in 0..64 {
                let v = b.m[i] * x + e;
                if v == target {
                    break;
                }
                e = if v < target { e.next_up() } else { e.next_down() };
            }
            if b.m[i] * x + e == target {
                b.eps[i] = e;
            }
        }
        b
    }

    /// Largest absolute jump between adjacent segments at their junctions.
    pub fn max_junction_gap(&self) -> f64 {
        let k = self.k();
        (1..k)
            .map(|i| {
                let b = i as f64 / k as f64;
                (self.line(i - 1, b) - self.line(i, b)).abs()
            })
            .fold(0.0, f64::max)
    }
}

pub fn segment_bounds(i: usize, k: usize) -> (f64, f64) {
    (i as f64 / k as f64, (i + 1) as f64 / k as f64)
}
