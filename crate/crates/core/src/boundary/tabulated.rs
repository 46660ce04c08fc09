use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples `(β_j, t_j)` interpolated by monotone piecewise-cubic Hermite
/// (Fritsch–Carlson) pieces.
///
/// A β value listed twice marks a jump: the first copy closes the piece on
/// the left, the second opens the next one, and the right value applies at
/// the jump itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTabulated", into = "RawTabulated")]
pub struct TabulatedBoundary {
    beta: Vec<f64>,
    t: Vec<f64>,
    #[serde(skip)]
    pieces: Vec<Piece>,
}

#[derive(Debug, Clone, PartialEq)]
struct Piece {
    start: usize,
    end: usize,
    slopes: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawTabulated {
    beta: Vec<f64>,
    t: Vec<f64>,
}

impl TryFrom<RawTabulated> for TabulatedBoundary {
    type Error = Error;
    fn try_from(r: RawTabulated) -> Result<Self> {
        Self::new(r.beta, r.t)
    }
}

impl From<TabulatedBoundary> for RawTabulated {
    fn from(b: TabulatedBoundary) -> Self {
        RawTabulated { beta: b.beta, t: b.t }
    }
}

impl TabulatedBoundary {
    pub fn new(beta: Vec<f64>, t: Vec<f64>) -> Result<Self> {
        if beta.len() != t.len() {
            return Err(Error::InvalidBoundary(format!("{} abscissas but {} values", beta.len(), t.len())));
        }
        if beta.len() < 2 {
            return Err(Error::InvalidBoundary("need at least two samples".into()));
        }
        if beta.iter().chain(&t).any(|x| !x.is_finite()) {
            return Err(Error::InvalidBoundary("non-finite sample".into()));
        }
        if t.iter().any(|&x| x < 0.0) {
            return Err(Error::InvalidBoundary("negative threshold sample".into()));
        }
        if beta[0] > 0.0 || beta[beta.len() - 1] < 1.0 {
            return Err(Error::InvalidBoundary("samples must cover [0, 1]".into()));
        }
        for w in beta.windows(3) {
            if w[0] == w[1] && w[1] == w[2] {
                return Err(Error::InvalidBoundary("a jump abscissa may appear at most twice".into()));
            }
        }
        if beta.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidBoundary("abscissas must be increasing".into()));
        }
        let mut pieces = Vec::new();
        let mut start = 0;
        for j in 1..=beta.len() {
            if j == beta.len() || beta[j] == beta[j - 1] {
                pieces.push(Piece { start, end: j, slopes: pchip_slopes(&beta[start..j], &t[start..j]) });
                start = j;
            }
        }
        Ok(Self { beta, t, pieces })
    }

    /// Samples a curve on `n` uniform points per interval between
    /// breakpoints, duplicating interior breakpoints so jumps survive.
    pub fn sample<F: Fn(f64) -> f64>(f: F, breakpoints: &[f64], n: usize) -> Result<Self> {
        let mut beta = Vec::new();
        let mut t = Vec::new();
        for w in breakpoints.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            for j in 0..n {
                let b = lo + (hi - lo) * j as f64 / (n - 1) as f64;
                beta.push(b);
                // approach the right end from inside the interval
                let x = if j == n - 1 && hi < 1.0 { hi - (hi - lo) * 1e-12 } else { b };
                t.push(f(x).max(0.0));
            }
        }
        Self::new(beta, t)
    }

    pub fn betas(&self) -> &[f64] {
        &self.beta
    }

    pub fn values(&self) -> &[f64] {
        &self.t
    }

    /// Interior jump locations.
    pub fn jumps(&self) -> Vec<f64> {
        self.pieces.iter().skip(1).map(|p| self.beta[p.start]).collect()
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = vec![0.0];
        b.extend(self.jumps());
        b.push(1.0);
        b.dedup();
        b
    }

    pub fn value(&self, beta: f64) -> f64 {
        // last piece whose first abscissa is ≤ β
        let idx = self.pieces.partition_point(|p| self.beta[p.start] <= beta).max(1) - 1;
        let p = &self.pieces[idx];
        let xs = &self.beta[p.start..p.end];
        let ys = &self.t[p.start..p.end];
        if xs.len() == 1 {
            return ys[0];
        }
        let x = beta.clamp(xs[0], xs[xs.len() - 1]);
        let j = (xs.partition_point(|&b| b <= x).max(1) - 1).min(xs.len() - 2);
        let h = xs[j + 1] - xs[j];
        let s = (x - xs[j]) / h;
        let (h00, h10, h01, h11) = (
            (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s),
            s * (1.0 - s) * (1.0 - s),
            s * s * (3.0 - 2.0 * s),
            s * s * (s - 1.0),
        );
        (h00 * ys[j] + h10 * h * p.slopes[j] + h01 * ys[j + 1] + h11 * h * p.slopes[j + 1]).max(0.0)
    }
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 1 {
        return vec![0.0];
    }
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|j| (y[j + 1] - y[j]) / h[j]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut d = vec![0.0; n];
    for j in 1..n - 1 {
        if delta[j - 1] * delta[j] > 0.0 {
            let w1 = 2.0 * h[j] + h[j - 1];
            let w2 = h[j] + 2.0 * h[j - 1];
            d[j] = (w1 + w2) / (w1 / delta[j - 1] + w2 / delta[j]);
        }
    }
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_samples_and_lines() {
        let beta: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let t: Vec<f64> = beta.iter().map(|b| 0.5 + 2.0 * b).collect();
        let tb = TabulatedBoundary::new(beta.clone(), t.clone()).unwrap();
        for (b, v) in beta.iter().zip(&t) {
            assert!((tb.value(*b) - v).abs() < 1e-14);
        }
        assert!((tb.value(0.333) - (0.5 + 0.666)).abs() < 1e-13);
    }

    #[test]
    fn jump_uses_right_value() {
        let tb = TabulatedBoundary::new(vec![0.0, 0.5, 0.5, 1.0], vec![1.0, 1.0, 3.0, 3.0]).unwrap();
        assert!((tb.value(0.49) - 1.0).abs() < 1e-15);
        assert_eq!(tb.value(0.5), 3.0);
        assert_eq!(tb.jumps(), vec![0.5]);
        assert_eq!(tb.breakpoints(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn monotone_data_stays_monotone() {
        let beta = vec![0.0, 0.1, 0.2, 0.6, 1.0];
        let t = vec![0.0, 0.0, 1.0, 1.05, 4.0];
        let tb = TabulatedBoundary::new(beta, t).unwrap();
        let mut prev = -1.0;
        for i in 0..=1000 {
            let v = tb.value(i as f64 / 1000.0);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(TabulatedBoundary::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(TabulatedBoundary::new(vec![0.1, 1.0], vec![1.0, 1.0]).is_err());
        assert!(TabulatedBoundary::new(vec![0.0, 0.6, 0.5, 1.0], vec![1.0; 4]).is_err());
        assert!(TabulatedBoundary::new(vec![0.0, 1.0], vec![1.0, -1.0]).is_err());
        assert!(TabulatedBoundary::new(vec![0.0, 0.5, 0.5, 0.5, 1.0], vec![1.0; 5]).is_err());
    }

    #[test]
    fn sampling_keeps_jumps() {
        let f = |b: f64| if b < 0.5 { b } else { 2.0 };
        let tb = TabulatedBoundary::sample(f, &[0.0, 0.5, 1.0], 65).unwrap();
        assert!((tb.value(0.25) - 0.25).abs() < 1e-12);
        assert_eq!(tb.value(0.75), 2.0);
        assert_eq!(tb.jumps(), vec![0.5]);
    }
}
