//! Monte Carlo thresholds for the classical detectors, checked against the
//! closed-form false alarm rate of the resulting feature-plane line.

use cfarfp::boundary::{BaselineDetector, BaselineKind};
use cfarfp::montecarlo::{calibrate_threshold, TrialPlan};
use cfarfp::performance::pfa_closed_form;
use cfarfp::stats::ProblemDims;

fn main() -> cfarfp::Result<()> {
    let dims = ProblemDims::new(4, 8)?;
    let pfa = 1e-3;
    let plan = TrialPlan::new(2024, 100_000, dims)?;
    for (kind, kappa) in [(BaselineKind::Kelly, 0.0), (BaselineKind::Amf, 0.0), (BaselineKind::Ace, 0.0), (BaselineKind::Kalson, 0.5)] {
        let c = calibrate_threshold(kind, kappa, pfa, &plan)?;
        let det = BaselineDetector::with_kappa(kind, c.eta, kappa)?;
        let exact = pfa_closed_form(&det.boundary(), dims)?;
        let se = (pfa * (1.0 - pfa) / plan.trials as f64).sqrt();
        println!("{:<10} η = {:.5}  closed-form Pfa {:.3e} ({:+.2} σ)", c.detector, c.eta, exact, (exact - pfa) / se);
    }
    Ok(())
}
