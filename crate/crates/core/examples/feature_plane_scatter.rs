//! Where H0, matched and mismatched returns land in the (β, t̃) plane, in
//! Gaussian clutter with one-lag correlation 0.95.

use cfarfp::montecarlo::{cluster_scatter, ClutterModel, Scenario, TrialPlan, DEFAULT_F_D};
use cfarfp::stats::{ProblemDims, SignalCondition};

fn quantile(mut v: Vec<f64>, q: f64) -> f64 {
    v.sort_by(f64::total_cmp);
    v[((v.len() - 1) as f64 * q).round() as usize]
}

fn main() -> cfarfp::Result<()> {
    let dims = ProblemDims::new(8, 16)?;
    let plan = TrialPlan::new(9, 5_000, dims)?;
    let scenario = Scenario::clutter(dims, &ClutterModel::reference(), DEFAULT_F_D)?;
    let conditions = vec![
        ("H0".to_string(), SignalCondition::h0()),
        ("15 dB, cos²θ = 1".to_string(), SignalCondition::from_db(15.0, 1.0)?),
        ("15 dB, cos²θ = 0.5".to_string(), SignalCondition::from_db(15.0, 0.5)?),
    ];
    for c in cluster_scatter(&plan, &scenario, &conditions)? {
        let b: Vec<f64> = c.points.iter().map(|p| p.beta).collect();
        let t: Vec<f64> = c.points.iter().map(|p| p.t_tilde).collect();
        println!(
            "{:<20} β median {:.3} [{:.3}, {:.3}]   t̃ median {:.3} [{:.3}, {:.3}]",
            c.label,
            quantile(b.clone(), 0.5),
            quantile(b.clone(), 0.05),
            quantile(b, 0.95),
            quantile(t.clone(), 0.5),
            quantile(t.clone(), 0.05),
            quantile(t, 0.95)
        );
    }
    Ok(())
}
