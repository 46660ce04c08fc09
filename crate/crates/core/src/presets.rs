//! The two worked design inputs and the default design scenario.

use crate::boundary::{Boundary, SplineBoundary};
use crate::error::Result;
use crate::stats::ProblemDims;

/// Default specification SNRs (dB).
pub const DESIGN_GAMMA_DB: [f64; 4] = [8.0, 10.0, 15.0, 20.0];
/// Default specification mismatch levels `cos²θ`.
pub const DESIGN_LAMBDA: [f64; 4] = [1.0, 0.75, 0.5, 0.25];
pub const DESIGN_PFA: f64 = 1e-4;
pub const MAX_SEGMENTS: usize = 16;

pub fn design_dims() -> ProblemDims {
    ProblemDims::new(16, 32).expect("valid dimensions")
}

/// Control points of the selective "double-well" curve: a ridge near
/// β = 0.2 where mismatched returns gather, low thresholds from the middle
/// on. Native Pfa ≈ 1e-3 at N = 16, K = 32.
pub const DOUBLE_WELL_CONTROL: [[f64; 2]; 5] =
    [[0.0, 1.173], [0.214, 1.409], [0.525, 0.524], [0.665, 0.454], [1.0, 0.363]];

/// Quartic interpolating spline through [`DOUBLE_WELL_CONTROL`].
pub fn double_well() -> Result<SplineBoundary> {
    SplineBoundary::interpolating(DOUBLE_WELL_CONTROL.to_vec(), 4)
}

/// AMF line `η β` up to `knee`, flat afterwards.
pub fn hinge(eta: f64, knee: f64) -> impl Fn(f64) -> f64 {
    move |b: f64| eta * b.min(knee)
}

/// Native Pfa ≈ 2.65e-4 at N = 16, K = 32.
pub const HINGE_ETA: f64 = 1.6;
pub const HINGE_KNEE: f64 = 0.39;
/// Control points sampled from the hinge.
pub const HINGE_SAMPLES: usize = 11;
/// B-spline coefficients of the regression fit.
pub const HINGE_COEFFICIENTS: usize = 6;

/// Least-squares cubic through samples of the AMF-then-horizontal hinge.
pub fn amf_hinge() -> Result<SplineBoundary> {
    let h = hinge(HINGE_ETA, HINGE_KNEE);
    let control = (0..HINGE_SAMPLES)
        .map(|j| {
            let b = j as f64 / (HINGE_SAMPLES - 1) as f64;
            [b, h(b)]
        })
        .collect();
    SplineBoundary::least_squares(control, 3, HINGE_COEFFICIENTS)
}

pub fn double_well_boundary() -> Boundary {
    double_well().expect("fixed control points").into()
}

pub fn amf_hinge_boundary() -> Boundary {
    amf_hinge().expect("fixed control points").into()
}
