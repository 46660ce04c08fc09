//! Customized adaptive CFAR detectors designed as piecewise-linear decision
//! boundaries in the (β, t̃) feature plane, with semi-analytic and Monte Carlo
//! evaluation.

pub mod error;
pub mod linalg;
pub mod montecarlo;
pub mod quadrature;
pub mod specfun;
pub mod boundary;
pub mod cli;
pub mod datacube;
pub mod designer;
pub mod performance;
pub mod presets;
pub mod solver;
pub mod stats;

pub use error::{Error, Result};
