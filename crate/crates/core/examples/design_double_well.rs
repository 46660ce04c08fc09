//! Design a piecewise-linear detector that tracks the double-well curve at
//! Pfa 1e-4 (N = 16, K = 32), then join its segments.

use cfarfp::boundary::Boundary;
use cfarfp::designer::{algorithm1, algorithm2_continuity, sample_specifications, Weighting};
use cfarfp::performance::pfa_closed_form;
use cfarfp::presets::{design_dims, double_well_boundary, DESIGN_PFA, MAX_SEGMENTS, DESIGN_GAMMA_DB, DESIGN_LAMBDA};
use cfarfp::performance::prob_exceed;
use cfarfp::stats::SignalCondition;

fn main() -> cfarfp::Result<()> {
    let dims = design_dims();
    let d = double_well_boundary();
    println!("native Pfa of the desired curve: {:.3e}", prob_exceed(&d, SignalCondition::h0(), dims)?);

    let specs = sample_specifications(&d, &DESIGN_GAMMA_DB, &DESIGN_LAMBDA, dims)?;
    let r = algorithm1(&d, MAX_SEGMENTS, DESIGN_PFA, &specs, dims, Weighting::Spread)?;
    let feasible = r.log.iter().filter(|c| c.feasible).count();
    println!("{} candidates, {} feasible; k* = {}, i* = {}, cost {:.4e}", r.log.len(), feasible, r.k_star, r.i_star, r.cost);
    for (i, (m, e)) in r.boundary.slopes().iter().zip(r.boundary.intercepts()).enumerate() {
        println!("  segment {}: t = {m:+.4} β {e:+.4}", i + 1);
    }
    println!("closed-form Pfa {:.6e}", pfa_closed_form(&r.boundary, dims)?);

    let c = algorithm2_continuity(&r, DESIGN_PFA, dims)?;
    println!(
        "continuous: max junction gap {:.1e}, Pfa {:.6e}, cost {:.4e}",
        c.boundary.max_junction_gap(),
        pfa_closed_form(&c.boundary, dims)?,
        c.cost
    );
    println!("{}", Boundary::from(c.boundary).to_json());
    Ok(())
}
