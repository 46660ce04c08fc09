//! Decision region boundaries `t̃ = f(β)` in the feature plane.
//!
//! Every boundary is total on `[0, 1]` and clamped at zero. A feature point
//! is declared H1 when `t̃ > f(β)`; a tie goes to H0.

mod baseline;
mod piecewise;
mod spline;
mod tabulated;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use baseline::{raw_statistic, BaselineDetector, BaselineKind};
pub use piecewise::{segment_bounds, PiecewiseLinearBoundary, NONNEG_TOL};
pub use spline::{SplineBoundary, SplineFit};
pub use tabulated::TabulatedBoundary;

use crate::error::{Error, Result};
use crate::stats::FeaturePoint;

/// Samples per interval when a curve is tabulated.
pub const TABLE_SAMPLES: usize = 257;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Boundary {
    PiecewiseLinear(PiecewiseLinearBoundary),
    Tabulated(TabulatedBoundary),
    Spline(SplineBoundary),
    Baseline(BaselineDetector),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Decision {
    H0,
    H1,
}

impl Boundary {
    /// `f(β)` without the domain check.
    pub fn value(&self, beta: f64) -> f64 {
        match self {
            Self::PiecewiseLinear(b) => b.value(beta),
            Self::Tabulated(b) => b.value(beta),
            Self::Spline(b) => b.value(beta),
            Self::Baseline(b) => b.value(beta),
        }
    }

    pub fn evaluate(&self, beta: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidParameter(format!("beta = {beta} outside [0, 1]")));
        }
        Ok(self.value(beta))
    }

    /// `0`, `1` and every interior point where the curve may jump or kink.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::PiecewiseLinear(b) => b.breakpoints(),
            Self::Tabulated(b) => b.breakpoints(),
            Self::Spline(_) | Self::Baseline(_) => vec![0.0, 1.0],
        }
    }

    pub fn decide(&self, fp: FeaturePoint) -> Decision {
        decide(self, fp)
    }

    /// Tabulation of `f + offset` keeping the curve's breakpoints.
    pub fn tabulate(&self, offset: f64) -> Result<TabulatedBoundary> {
        TabulatedBoundary::sample(|b| self.value(b) + offset, &self.breakpoints(), TABLE_SAMPLES)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("boundary serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("boundary: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }
}

impl From<PiecewiseLinearBoundary> for Boundary {
    fn from(b: PiecewiseLinearBoundary) -> Self {
        Self::PiecewiseLinear(b)
    }
}

impl From<TabulatedBoundary> for Boundary {
    fn from(b: TabulatedBoundary) -> Self {
        Self::Tabulated(b)
    }
}

impl From<SplineBoundary> for Boundary {
    fn from(b: SplineBoundary) -> Self {
        Self::Spline(b)
    }
}

impl From<BaselineDetector> for Boundary {
    fn from(b: BaselineDetector) -> Self {
        Self::Baseline(b)
    }
}

/// H1 iff `t̃ > f(β)`. Piecewise-linear boundaries look up the segment of β
/// first (left-closed, β = 1 in the last segment).
pub fn decide(b: &Boundary, fp: FeaturePoint) -> Decision {
    let threshold = match b {
        Boundary::PiecewiseLinear(p) => {
            let l = p.segment_of(fp.beta);
            p.line(l, fp.beta).max(0.0)
        }
        other => other.value(fp.beta),
    };
    if fp.t_tilde > threshold {
        Decision::H1
    } else {
        Decision::H0
    }
}

/// Concatenates pieces of several curves, each used on its own interval.
/// Intervals must tile `[0, 1]` in order; jumps between pieces are kept.
pub fn juxtapose(parts: &[(Boundary, f64, f64)]) -> Result<TabulatedBoundary> {
    const TOL: f64 = 1e-12;
    if parts.is_empty() {
        return Err(Error::InvalidBoundary("nothing to juxtapose".into()));
    }
    if parts[0].1.abs() > TOL || (parts[parts.len() - 1].2 - 1.0).abs() > TOL {
        return Err(Error::InvalidBoundary("juxtaposed intervals must start at 0 and end at 1".into()));
    }
    for (i, (_, lo, hi)) in parts.iter().enumerate() {
        if !(hi > lo) {
            return Err(Error::InvalidBoundary(format!("empty interval [{lo}, {hi}]")));
        }
        if i + 1 < parts.len() {
            let next = parts[i + 1].1;
            if next < hi - TOL {
                return Err(Error::InvalidBoundary(format!("intervals overlap at {next}")));
            }
            if next > hi + TOL {
                return Err(Error::InvalidBoundary(format!("gap between {hi} and {next}")));
            }
        }
    }
    let ends: Vec<f64> = parts.iter().map(|p| p.2).collect();
    let mut bps = vec![0.0];
    for (b, lo, hi) in parts {
        bps.extend(b.breakpoints().into_iter().filter(|x| x > lo && x < hi));
        bps.push(*hi);
    }
    let last = ends.len() - 1;
    let pick = |x: f64| {
        let i = ends.partition_point(|&e| e <= x).min(last);
        parts[i].0.value(x)
    };
    TabulatedBoundary::sample(pick, &bps, TABLE_SAMPLES)
}
