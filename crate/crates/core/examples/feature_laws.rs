//! The laws of the feature point: β density by its three representations,
//! Monte Carlo against the H0 laws, and Pd from the semi-analytic integral
//! against simulation.

use cfarfp::boundary::{BaselineDetector, BaselineKind, Boundary};
use cfarfp::montecarlo::{estimate_pd, Scenario, TrialPlan, DEFAULT_F_D};
use cfarfp::performance::prob_exceed;
use cfarfp::stats::{beta_cdf_h0, beta_pdf_series, omega_pdf, psi_cdf, OmegaRoute, ProblemDims, SignalCondition};

fn main() -> cfarfp::Result<()> {
    let dims = ProblemDims::new(8, 16)?;
    println!("   β   Ω kummer     Ω laguerre   series");
    for b in [0.1, 0.3, 0.5, 0.7, 0.9] {
        println!(
            "{b:4.1}   {:.6e} {:.6e} {:.6e}",
            omega_pdf(b, 10.0, dims, OmegaRoute::Kummer),
            omega_pdf(b, 10.0, dims, OmegaRoute::Laguerre),
            beta_pdf_series(b, 10.0, dims)
        );
    }

    let plan = TrialPlan::new(1, 50_000, dims)?;
    let scenario = Scenario::white(dims, DEFAULT_F_D)?;
    let h0 = scenario.signal(SignalCondition::h0())?;
    let pts: Vec<_> = (0..plan.trials).map(|t| scenario.gen_trial(&plan, &h0, t)).collect::<cfarfp::Result<_>>()?;
    // t̃ given β is free of β under H0, so its marginal is Ψ with δ² = 0
    let (mut ks_beta, mut ks_t) = (0.0f64, 0.0f64);
    let mut betas: Vec<f64> = pts.iter().map(|p| p.beta).collect();
    let mut ts: Vec<f64> = pts.iter().map(|p| p.t_tilde).collect();
    betas.sort_by(f64::total_cmp);
    ts.sort_by(f64::total_cmp);
    let n = betas.len() as f64;
    for (i, (b, t)) in betas.iter().zip(&ts).enumerate() {
        let (lo, hi) = (i as f64 / n, (i + 1) as f64 / n);
        let fb = beta_cdf_h0(*b, dims);
        let ft = psi_cdf(*t, 0.0, dims);
        ks_beta = ks_beta.max((fb - lo).abs()).max((fb - hi).abs());
        ks_t = ks_t.max((ft - lo).abs()).max((ft - hi).abs());
    }
    println!("KS distance under H0: β {ks_beta:.4}, t̃ {ks_t:.4} ({} draws)", plan.trials);

    let kelly: Boundary = BaselineDetector::new(BaselineKind::Kelly, 0.4)?.into();
    for (g, lam) in [(10.0, 1.0), (15.0, 0.5), (15.0, 1.0)] {
        let cond = SignalCondition::from_db(g, lam)?;
        let exact = prob_exceed(&kelly, cond, dims)?;
        let mc = estimate_pd(&kelly, &TrialPlan::new(2, 10_000, dims)?, &scenario, cond)?;
        println!("Kelly Pd at {g} dB, cos²θ {lam}: integral {exact:.4}, simulated {:.4} ± {:.4}", mc.value, mc.std_error);
    }
    Ok(())
}
