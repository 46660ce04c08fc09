use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a spline relates to its control points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplineFit {
    /// Clamped interpolating spline through every control point.
    #[default]
    Interpolate,
    /// Least-squares regression spline with the given number of B-spline
    /// coefficients on uniform interior knots.
    LeastSquares { coefficients: usize },
}

/// A clamped B-spline `t̃ = f(β)` of polynomial degree `order`, built from
/// control points. Outside the control range the end values are held.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpline", into = "RawSpline")]
pub struct SplineBoundary {
    order: usize,
    control: Vec<[f64; 2]>,
    fit: SplineFit,
    knots: Vec<f64>,
    coef: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSpline {
    order: usize,
    control: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "is_interpolate")]
    fit: SplineFit,
}

fn is_interpolate(f: &SplineFit) -> bool {
    *f == SplineFit::Interpolate
}

impl TryFrom<RawSpline> for SplineBoundary {
    type Error = Error;
    fn try_from(r: RawSpline) -> Result<Self> {
        Self::new(r.control, r.order, r.fit)
    }
}

impl From<SplineBoundary> for RawSpline {
    fn from(s: SplineBoundary) -> Self {
        RawSpline { order: s.order, control: s.control, fit: s.fit }
    }
}

impl SplineBoundary {
    pub fn interpolating(control: Vec<[f64; 2]>, order: usize) -> Result<Self> {
        Self::new(control, order, SplineFit::Interpolate)
    }

    pub fn least_squares(control: Vec<[f64; 2]>, order: usize, coefficients: usize) -> Result<Self> {
        Self::new(control, order, SplineFit::LeastSquares { coefficients })
    }

    pub fn new(control: Vec<[f64; 2]>, order: usize, fit: SplineFit) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidBoundary("spline order must be at least 1".into()));
        }
        if control.len() < order + 1 {
            return Err(Error::InvalidBoundary(format!(
                "order {order} spline needs at least {} control points, got {}",
                order + 1,
                control.len()
            )));
        }
        if control.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidBoundary("non-finite control point".into()));
        }
        if control.windows(2).any(|w| w[1][0] <= w[0][0]) {
            return Err(Error::InvalidBoundary("control abscissas must be strictly increasing".into()));
        }
        let x: Vec<f64> = control.iter().map(|c| c[0]).collect();
        let y: Vec<f64> = control.iter().map(|c| c[1]).collect();
        let (knots, coef) = match fit {
            SplineFit::Interpolate => {
                let knots = averaged_knots(&x, order);
                let a: Vec<Vec<f64>> = x.iter().map(|&xi| basis_row(&knots, order, x.len(), xi)).collect();
                let coef = solve(a, y.clone())
                    .ok_or_else(|| Error::InvalidBoundary("singular spline collocation system".into()))?;
                (knots, coef)
            }
            SplineFit::LeastSquares { coefficients } => {
                if coefficients < order + 1 || coefficients > x.len() {
                    return Err(Error::InvalidBoundary(format!(
                        "least-squares spline needs between {} and {} coefficients, got {coefficients}",
                        order + 1,
                        x.len()
                    )));
                }
                let knots = uniform_knots(x[0], x[x.len() - 1], order, coefficients);
                let rows: Vec<Vec<f64>> = x.iter().map(|&xi| basis_row(&knots, order, coefficients, xi)).collect();
                let mut ata = vec![vec![0.0; coefficients]; coefficients];
                let mut aty = vec![0.0; coefficients];
                for (r, yi) in rows.iter().zip(&y) {
                    for i in 0..coefficients {
                        aty[i] += r[i] * yi;
                        for j in 0..coefficients {
                            ata[i][j] += r[i] * r[j];
                        }
                    }
                }
                let coef = solve(ata, aty)
                    .ok_or_else(|| Error::InvalidBoundary("rank-deficient least-squares spline".into()))?;
                (knots, coef)
            }
        };
        Ok(Self { order, control, fit, knots, coef })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn control(&self) -> &[[f64; 2]] {
        &self.control
    }

    pub fn fit(&self) -> SplineFit {
        self.fit
    }

    /// The spline itself, possibly negative.
    pub fn raw(&self, beta: f64) -> f64 {
        let (lo, hi) = (self.knots[0], self.knots[self.knots.len() - 1]);
        let x = beta.clamp(lo, hi);
        let row = basis_row(&self.knots, self.order, self.coef.len(), x);
        row.iter().zip(&self.coef).map(|(b, c)| b * c).sum()
    }

    pub fn value(&self, beta: f64) -> f64 {
        self.raw(beta).max(0.0)
    }

    /// Sum of squared residuals at the control points.
    pub fn residual(&self) -> f64 {
        self.control.iter().map(|c| (self.raw(c[0]) - c[1]).powi(2)).sum()
    }
}

fn averaged_knots(x: &[f64], p: usize) -> Vec<f64> {
    let n = x.len();
    let mut t = vec![x[0]; p + 1];
    for j in 1..n - p {
        t.push(x[j..j + p].iter().sum::<f64>() / p as f64);
    }
    t.extend(std::iter::repeat(x[n - 1]).take(p + 1));
    t
}

fn uniform_knots(lo: f64, hi: f64, p: usize, n_coef: usize) -> Vec<f64> {
    let interior = n_coef - p - 1;
    let mut t = vec![lo; p + 1];
    for j in 1..=interior {
        t.push(lo + (hi - lo) * j as f64 / (interior + 1) as f64);
    }
    t.extend(std::iter::repeat(hi).take(p + 1));
    t
}

/// Values of all `n` B-splines of degree `p` at `x` (Cox–de Boor).
fn basis_row(t: &[f64], p: usize, n: usize, x: f64) -> Vec<f64> {
    let span = if x >= t[n] {
        n - 1
    } else {
        (p..n).rfind(|&s| t[s] <= x).unwrap_or(p)
    };
    let mut nb = vec![0.0; p + 1];
    let mut left = vec![0.0; p + 1];
    let mut right = vec![0.0; p + 1];
    nb[0] = 1.0;
    for j in 1..=p {
        left[j] = x - t[span + 1 - j];
        right[j] = t[span + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let tmp = nb[r] / (right[r + 1] + left[j - r]);
            nb[r] = saved + right[r + 1] * tmp;
            saved = left[j - r] * tmp;
        }
        nb[j] = saved;
    }
    let mut row = vec![0.0; n];
    for (j, v) in nb.into_iter().enumerate() {
        row[span - p + j] = v;
    }
    row
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-14 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            if f != 0.0 {
                for j in c..n {
                    a[r][j] -= f * a[c][j];
                }
                b[r] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|j| a[r][j] * x[j]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_point_quartic_passes_through_controls() {
        let ctrl = vec![[0.0, 3.0], [0.25, 0.5], [0.5, 2.0], [0.75, 0.6], [1.0, 3.2]];
        let s = SplineBoundary::interpolating(ctrl.clone(), 4).unwrap();
        for c in &ctrl {
            assert!((s.raw(c[0]) - c[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn cubic_interpolation_reproduces_cubics() {
        let f = |x: f64| 1.0 + x - 2.0 * x * x + 0.5 * x * x * x;
        let ctrl: Vec<[f64; 2]> = (0..9).map(|i| i as f64 / 8.0).map(|x| [x, f(x)]).collect();
        let s = SplineBoundary::interpolating(ctrl, 3).unwrap();
        for i in 0..=100 {
            let x = i as f64 / 100.0;
            assert!((s.raw(x) - f(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn partition_of_unity() {
        let t = uniform_knots(0.0, 1.0, 3, 8);
        for i in 0..=50 {
            let row = basis_row(&t, 3, 8, i as f64 / 50.0);
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn least_squares_smooths() {
        let ctrl: Vec<[f64; 2]> = (0..=20)
            .map(|i| {
                let x = i as f64 / 20.0;
                [x, if x < 0.5 { 2.0 * x } else { 1.0 }]
            })
            .collect();
        let s = SplineBoundary::least_squares(ctrl.clone(), 3, 6).unwrap();
        assert!(s.residual() > 0.0);
        assert!(s.residual() < 0.01);
        let interp = SplineBoundary::interpolating(ctrl, 3).unwrap();
        assert!(interp.residual() < 1e-18);
    }

    #[test]
    fn validation() {
        assert!(SplineBoundary::interpolating(vec![[0.0, 1.0], [0.5, 1.0], [1.0, 1.0]], 3).is_err());
        assert!(SplineBoundary::interpolating(vec![[0.0, 1.0], [0.0, 1.0], [1.0, 1.0], [1.0, 2.0]], 3).is_err());
        let ctrl: Vec<[f64; 2]> = (0..5).map(|i| [i as f64 / 4.0, 1.0]).collect();
        assert!(SplineBoundary::least_squares(ctrl, 3, 9).is_err());
    }

    #[test]
    fn json_round_trip() {
        let ctrl = vec![[0.0, 3.0], [0.25, 0.5], [0.5, 2.0], [0.75, 0.6], [1.0, 3.2]];
        let s = SplineBoundary::interpolating(ctrl, 4).unwrap();
        let js = serde_json::to_string(&s).unwrap();
        assert!(!js.contains("fit"));
        let back: SplineBoundary = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
    }
}
