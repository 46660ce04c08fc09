//! Classical detectors decide identically whether they threshold their raw
//! statistic or compare the feature point with their feature-plane line.

use cfarfp::boundary::{raw_statistic, BaselineDetector, BaselineKind, Boundary, Decision};
use cfarfp::montecarlo::{Scenario, TrialPlan, DEFAULT_F_D};
use cfarfp::stats::{ProblemDims, SignalCondition};

fn main() -> cfarfp::Result<()> {
    let dims = ProblemDims::new(8, 16)?;
    let plan = TrialPlan::new(5, 20_000, dims)?;
    let scenario = Scenario::white(dims, DEFAULT_F_D)?;
    let signal = scenario.signal(SignalCondition::from_db(12.0, 0.8)?)?;
    let detectors = [
        BaselineDetector::new(BaselineKind::Kelly, 0.3)?,
        BaselineDetector::new(BaselineKind::Amf, 0.6)?,
        BaselineDetector::new(BaselineKind::Ace, 0.4)?,
        BaselineDetector::kalson(0.5, 0.5)?,
    ];
    for det in detectors {
        let line = det.boundary();
        let b = Boundary::from(line.clone());
        let mut agree = 0;
        for t in 0..plan.trials {
            let forms = scenario.trial_forms(&plan, &signal, t)?;
            let raw = raw_statistic(det.kind, det.kappa, forms) > det.threshold;
            let plane = b.decide(forms.feature()) == Decision::H1;
            agree += u64::from(raw == plane);
        }
        println!(
            "{:<7} η = {:.2}: t = {:+.4} β {:+.4}; agreement {agree}/{}",
            det.kind.to_string(),
            det.threshold,
            line.slopes()[0],
            line.intercepts()[0],
            plan.trials
        );
    }
    Ok(())
}
