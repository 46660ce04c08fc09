//! The AMF-then-flat hinge as a desired curve: least-squares cubic fit,
//! piecewise-linear design at Pfa 1e-4, comparison with a stiff shift.

use cfarfp::designer::{algorithm1, sample_specifications, shifted_baseline, Weighting};
use cfarfp::performance::{abi, mesa, prob_exceed};
use cfarfp::presets::{amf_hinge_boundary, design_dims, DESIGN_PFA, HINGE_ETA, HINGE_KNEE, MAX_SEGMENTS, DESIGN_GAMMA_DB, DESIGN_LAMBDA};
use cfarfp::stats::SignalCondition;

fn main() -> cfarfp::Result<()> {
    let dims = design_dims();
    let d = amf_hinge_boundary();
    println!("hinge η = {HINGE_ETA}, knee at β = {HINGE_KNEE}");
    println!("native Pfa {:.3e}", prob_exceed(&d, SignalCondition::h0(), dims)?);

    let specs = sample_specifications(&d, &DESIGN_GAMMA_DB, &DESIGN_LAMBDA, dims)?;
    let r = algorithm1(&d, MAX_SEGMENTS, DESIGN_PFA, &specs, dims, Weighting::Spread)?;
    println!("k* = {}, cost {:.4e}", r.k_star, r.cost);
    let shifted = shifted_baseline(&d, DESIGN_PFA, dims)?;
    println!("stiff shift of the desired curve: {:+.4}", shifted.offset);

    let g: Vec<f64> = (0..=60).map(|i| i as f64 * 0.5).collect();
    let l: Vec<f64> = (0..=15).map(|j| 0.25 + 0.05 * j as f64).collect();
    let md = mesa(&d, &g, &l, dims)?;
    let m1 = mesa(&r.boundary.into(), &g, &l, dims)?;
    let ms = mesa(&shifted.boundary.into(), &g, &l, dims)?;
    println!("Pd level  AbI design  AbI shifted");
    for level in [0.5, 0.7, 0.9] {
        println!("{level:>8}  {:>10.4}  {:>11.4}", abi(&m1, &md, level)?.value, abi(&ms, &md, level)?.value);
    }
    Ok(())
}
