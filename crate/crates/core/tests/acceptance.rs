//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the process exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{Beta, Continuous, ContinuousCDF};
use statrs::function::gamma::{gamma_ur, ln_gamma};

use cfarfp::boundary::{raw_statistic, BaselineDetector, BaselineKind, Boundary, Decision, PiecewiseLinearBoundary};
use cfarfp::datacube::{empirical_pfa_on_cube, snapshot_count, synthetic_cube};
use cfarfp::designer::{
    algorithm1, algorithm2_continuity, sample_specifications, shifted_baseline, DesignResult, Weighting,
};
use cfarfp::montecarlo::{estimate_pd, estimate_pfa, ClutterModel, Scenario, TrialPlan, DEFAULT_F_D};
use cfarfp::performance::{abi, mesa, pfa_closed_form, prob_exceed, MesaGrid};
use cfarfp::presets::{
    amf_hinge_boundary, design_dims, double_well_boundary, DESIGN_PFA, MAX_SEGMENTS, DESIGN_GAMMA_DB, DESIGN_LAMBDA,
};
use cfarfp::specfun::{appell_f1_finite, gauss_2f1, upper_incomplete_gamma_int};
use cfarfp::stats::{beta_pdf_series, omega_pdf, OmegaRoute, ProblemDims, SignalCondition};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

/// Adaptive Simpson, independent of the library's quadrature. `rel_tol` is
/// taken relative to a 64-panel first estimate of the integral.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let h = (b - a) / 64.0;
    let rough: f64 = (0..64).map(|j| f(a + (j as f64 + 0.5) * h) * h).sum();
    let tol = rel_tol * rough.abs().max(f64::MIN_POSITIVE);
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool")
}

fn gamma_grid() -> Vec<f64> {
    (0..=60).map(|i| i as f64 * 0.5).collect()
}

fn lambda_grid() -> Vec<f64> {
    (0..=15).map(|j| 0.25 + 0.05 * j as f64).collect()
}

fn design(d: &Boundary, dims: ProblemDims, p: usize, pfa: f64) -> DesignResult {
    let specs = sample_specifications(d, &DESIGN_GAMMA_DB, &DESIGN_LAMBDA, dims).expect("specifications");
    algorithm1(d, p, pfa, &specs, dims, Weighting::Spread).expect("feasible design")
}

fn random_boundary(rng: &mut ChaCha8Rng) -> PiecewiseLinearBoundary {
    let k = rng.random_range(1..=8);
    let kf = k as f64;
    let (mut m, mut eps) = (Vec::new(), Vec::new());
    for i in 0..k {
        let (lo, hi) = (i as f64 / kf, (i + 1) as f64 / kf);
        let (vl, vh) = (rng.random_range(0.0..2.0), rng.random_range(0.0..2.0));
        let slope = (vh - vl) / (hi - lo);
        m.push(slope);
        eps.push(vl - slope * lo);
    }
    PiecewiseLinearBoundary::new(m, eps).expect("nonnegative by construction")
}

fn c1_closed_form_vs_quadrature() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst_lib: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    for (n, k) in [(4, 8), (8, 16), (16, 32)] {
        let dims = ProblemDims::new(n, k).unwrap();
        let (a, b) = ((k - n + 2) as f64, (n - 1) as f64);
        let density = Beta::new(a, b).unwrap();
        let l = (k - n + 1) as i32;
        for _ in 0..50 {
            let pl = random_boundary(&mut rng);
            let closed = pfa_closed_form(&pl, dims).unwrap();
            let quad = prob_exceed(&pl.clone().into(), SignalCondition::h0(), dims).unwrap();
            // under H0, P(t̃ > f | β) = (1 + f)^(−L)
            let oracle: f64 = (0..pl.k())
                .map(|i| {
                    let (lo, hi) = pl.segment_bounds(i);
                    let f = |x: f64| if x <= 0.0 || x >= 1.0 { 0.0 } else { density.pdf(x) * (1.0 + pl.line(i, x).max(0.0)).powi(-l) };
                    simpson(&f, lo, hi, 1e-12)
                })
                .sum();
            worst_lib = worst_lib.max((closed - quad).abs());
            worst_oracle = worst_oracle.max((closed - oracle).abs());
        }
    }
    let secs = t.elapsed().as_secs_f64();
    check(
        worst_lib < 1e-8 && worst_oracle < 1e-8 && secs < 60.0,
        format!("150 boundaries: max |closed − quadrature| {worst_lib:.1e}, vs Simpson oracle {worst_oracle:.1e} (tol 1e-8), {secs:.1}s"),
    )
}

fn c2_closed_form_vs_monte_carlo() -> Outcome {
    let dims = design_dims();
    let r = design(&double_well_boundary(), dims, MAX_SEGMENTS, DESIGN_PFA);
    let plan = TrialPlan::new(2, 1_000_000, dims).unwrap();
    let est = estimate_pfa(&r.boundary.into(), &plan).unwrap();
    let z = est.z_score(DESIGN_PFA);
    check(
        z <= 3.0,
        format!("double-well design, 1e6 trials: Pfa {:.4e} ({} hits), {z:.2} standard errors from 1e-4 (tol 3)", est.value, est.hits),
    )
}

fn ks(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

fn c3_distribution_laws() -> Outcome {
    let dims = ProblemDims::new(8, 16).unwrap();
    let scenario = Scenario::clutter(dims, &ClutterModel::reference(), DEFAULT_F_D).unwrap();
    let plan = TrialPlan::new(3, 100_000, dims).unwrap();
    let h0 = scenario.signal(SignalCondition::h0()).unwrap();
    let mut pts: Vec<_> = (0..plan.trials).map(|t| scenario.gen_trial(&plan, &h0, t).unwrap()).collect();
    let beta_law = Beta::new((dims.k - dims.n + 2) as f64, (dims.n - 1) as f64).unwrap();
    let mut betas: Vec<f64> = pts.iter().map(|p| p.beta).collect();
    betas.sort_by(f64::total_cmp);
    let ks_beta = ks(&betas, |x| beta_law.cdf(x));
    // t̃ given β under H0: 1 − (1 + f)^(−L), checked within β terciles
    let l = dims.l() as i32;
    pts.sort_by(|a, b| a.beta.total_cmp(&b.beta));
    let ks_t = pts
        .chunks(pts.len() / 3 + 1)
        .map(|c| {
            let mut t: Vec<f64> = c.iter().map(|p| p.t_tilde).collect();
            t.sort_by(f64::total_cmp);
            ks(&t, |f| 1.0 - (1.0 + f).powi(-l))
        })
        .fold(0.0, f64::max);

    let cond = SignalCondition::from_db(15.0, 0.5).unwrap();
    let pd_plan = TrialPlan::new(4, 10_000, dims).unwrap();
    let mut worst_z: f64 = 0.0;
    let mut detail = Vec::new();
    for (name, b) in [
        ("kelly", Boundary::from(BaselineDetector::new(BaselineKind::Kelly, 0.4).unwrap())),
        ("amf", BaselineDetector::new(BaselineKind::Amf, 1.5).unwrap().into()),
        ("double-well", double_well_boundary()),
    ] {
        let exact = prob_exceed(&b, cond, dims).unwrap();
        let est = estimate_pd(&b, &pd_plan, &scenario, cond).unwrap();
        let z = est.z_score(exact);
        worst_z = worst_z.max(z);
        detail.push(format!("{name} {exact:.4}/{:.4}", est.value));
    }
    check(
        ks_beta < 0.01 && ks_t < 0.01 && worst_z <= 3.0,
        format!(
            "H0 KS β {ks_beta:.4}, t̃|β {ks_t:.4} (tol 0.01); Pd at 15 dB, λ 0.5 [{}] max {worst_z:.2} SE (tol 3)",
            detail.join(", ")
        ),
    )
}

fn c4_identities() -> Outcome {
    let mut worst_omega: f64 = 0.0;
    for (n, k) in [(4, 8), (8, 16), (16, 32)] {
        let dims = ProblemDims::new(n, k).unwrap();
        for d2 in [0.0, 1.0, 10.0] {
            for j in 1..=100 {
                let b = j as f64 / 101.0;
                let kum = omega_pdf(b, d2, dims, OmegaRoute::Kummer);
                let lag = omega_pdf(b, d2, dims, OmegaRoute::Laguerre);
                let ser = beta_pdf_series(b, d2, dims);
                worst_omega = worst_omega.max(rel(kum, lag)).max(rel(ser, lag));
            }
        }
    }

    // ∫_0^u t^n (1−t)^m (1+at)^(−n') dt = u^(n+1)/(n+1) F1(n+1, −m, n', n+2; u, −au)
    let mut worst_f1: f64 = 0.0;
    for (n, m, np, u, a) in [(17, 14, 17.0, 0.4375, 0.9 / 0.4375), (3, 2, 1.5, 0.8, 0.5), (8, 5, 3.0, 0.3, 4.0)] {
        let f = |t: f64| t.powi(n) * (1.0 - t).powi(m) * (1.0 + a * t).powf(-np);
        let oracle = simpson(&f, 0.0, u, 1e-13);
        let nf = n as f64;
        let closed = u.powf(nf + 1.0) / (nf + 1.0) * appell_f1_finite(nf + 1.0, -(m as f64), np, nf + 2.0, u, -a * u).unwrap();
        worst_f1 = worst_f1.max(rel(closed, oracle));
    }

    // Euler integral ₂F₁(a, b; c; z) = Γ(c)/(Γ(b)Γ(c−b)) ∫ t^(b−1)(1−t)^(c−b−1)(1−zt)^(−a) dt
    let mut worst_2f1: f64 = 0.0;
    for (a, b, c, z) in [(19.0, 17.0, 21.0, -0.8), (2.5, 3.0, 5.0, 0.6), (1.0, 2.0, 4.0, -3.0)] {
        let f = |t: f64| t.powf(b - 1.0) * (1.0 - t).powf(c - b - 1.0) * (1.0 - z * t).powf(-a);
        let pre = (ln_gamma(c) - ln_gamma(b) - ln_gamma(c - b)).exp();
        let oracle = pre * simpson(&f, 0.0, 1.0, 1e-13);
        worst_2f1 = worst_2f1.max(rel(gauss_2f1(a, b, c, z).unwrap().value, oracle));
    }

    let mut worst_gamma: f64 = 0.0;
    for l in 1..=20u32 {
        for x in [0.0, 0.3, 1.0, 2.5, 7.0, 15.0, 30.0] {
            // statrs rejects x = 0, where Γ(l, 0) = Γ(l)
            let q = if x == 0.0 { 1.0 } else { gamma_ur(l as f64, x) };
            let oracle = q * ln_gamma(l as f64).exp();
            worst_gamma = worst_gamma.max(rel(upper_incomplete_gamma_int(l, x), oracle));
        }
    }
    check(
        worst_omega < 1e-9 && worst_f1 < 1e-8 && worst_2f1 < 1e-9 && worst_gamma < 1e-12,
        format!(
            "Ω routes {worst_omega:.1e} (tol 1e-9), Appell F1 {worst_f1:.1e} (tol 1e-8), 2F1 {worst_2f1:.1e} (tol 1e-9), Γ(l,x) {worst_gamma:.1e} (tol 1e-12)"
        ),
    )
}

fn c5_baseline_equivalence() -> Outcome {
    let dims = ProblemDims::new(8, 16).unwrap();
    let scenario = Scenario::white(dims, DEFAULT_F_D).unwrap();
    let detectors = [
        BaselineDetector::new(BaselineKind::Kelly, 0.25).unwrap(),
        BaselineDetector::new(BaselineKind::Amf, 0.5).unwrap(),
        BaselineDetector::new(BaselineKind::Ace, 0.3).unwrap(),
        BaselineDetector::kalson(0.3, 0.4).unwrap(),
    ];
    let conds = [SignalCondition::h0(), SignalCondition::from_db(10.0, 0.7).unwrap()];
    let (mut total, mut agree) = (0u64, 0u64);
    let mut positives = 0u64;
    for (ci, cond) in conds.iter().enumerate() {
        let plan = TrialPlan::new(50 + ci as u64, 50_000, dims).unwrap();
        let signal = scenario.signal(*cond).unwrap();
        for t in 0..plan.trials {
            let forms = scenario.trial_forms(&plan, &signal, t).unwrap();
            let fp = forms.feature();
            for det in &detectors {
                let raw = raw_statistic(det.kind, det.kappa, forms) > det.threshold;
                let plane = Boundary::from(det.boundary()).decide(fp) == Decision::H1;
                total += 1;
                agree += u64::from(raw == plane);
                positives += u64::from(raw);
            }
        }
    }
    check(
        agree == total,
        format!("N=8, K=16, 1e5 draws x 4 detectors: {agree}/{total} decisions agree ({positives} H1)"),
    )
}

fn complete_log(r: &DesignResult, p: usize) -> bool {
    let expected: Vec<(usize, usize)> = (2..=p).flat_map(|k| (1..=k).map(move |i| (k, i))).collect();
    let got: Vec<(usize, usize)> = r.log.iter().map(|c| (c.k, c.i)).collect();
    expected == got
}

fn c6_algorithm1_contract() -> Outcome {
    let dims = design_dims();
    let cases = [
        ("double-well", double_well_boundary(), dims, DESIGN_PFA),
        ("amf-hinge", amf_hinge_boundary(), dims, DESIGN_PFA),
    ];
    let mut worst: f64 = 0.0;
    let mut rows = true;
    let mut deterministic = true;
    for (_, d, dims, pfa) in &cases {
        let runs: Vec<DesignResult> = [1, 3, 1].iter().map(|&n| pool(n).install(|| design(d, *dims, MAX_SEGMENTS, *pfa))).collect();
        deterministic &= runs.windows(2).all(|w| w[0] == w[1]);
        let r = &runs[0];
        worst = worst.max((pfa_closed_form(&r.boundary, *dims).unwrap() - pfa).abs());
        rows &= r.log.len() == 135 && complete_log(r, MAX_SEGMENTS);
    }
    check(
        worst < 1e-9 && rows && deterministic,
        format!("max |Pfa − target| {worst:.1e} (tol 1e-9); 135 candidates logged: {rows}; identical over 1/3/1 threads: {deterministic}"),
    )
}

fn max_dev(a: &MesaGrid, b: &MesaGrid) -> f64 {
    a.pd.iter().flatten().zip(b.pd.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn c7_algorithm2_contract() -> Outcome {
    let dims = design_dims();
    let r = design(&double_well_boundary(), dims, MAX_SEGMENTS, DESIGN_PFA);
    let c = algorithm2_continuity(&r, DESIGN_PFA, dims).unwrap();
    let gap = c.boundary.max_junction_gap();
    let resid = (pfa_closed_form(&c.boundary, dims).unwrap() - DESIGN_PFA).abs();
    let (g, l) = (gamma_grid(), lambda_grid());
    let dev = max_dev(&mesa(&r.boundary.into(), &g, &l, dims).unwrap(), &mesa(&c.boundary.into(), &g, &l, dims).unwrap());
    check(
        gap == 0.0 && resid < 1e-9 && dev <= 0.01,
        format!("double-well: junction gap {gap:e}, |Pfa − target| {resid:.1e} (tol 1e-9), max mesa deviation {dev:.4} (tol 0.01)"),
    )
}

fn c8_design_quality() -> Outcome {
    let dims = design_dims();
    let (g, l) = (gamma_grid(), lambda_grid());
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, d) in [("double-well", double_well_boundary()), ("amf-hinge", amf_hinge_boundary())] {
        let r = design(&d, dims, MAX_SEGMENTS, DESIGN_PFA);
        let sh = shifted_baseline(&d, DESIGN_PFA, dims).unwrap();
        let md = mesa(&d, &g, &l, dims).unwrap();
        let m1 = mesa(&r.boundary.into(), &g, &l, dims).unwrap();
        let ms = mesa(&sh.boundary.into(), &g, &l, dims).unwrap();
        let mut parts = Vec::new();
        for level in [0.5, 0.7, 0.9] {
            let a1 = abi(&m1, &md, level).unwrap().value;
            let a2 = abi(&ms, &md, level).unwrap().value;
            ok &= a1 < a2;
            parts.push(format!("{level}: {a1:.3} < {a2:.3}"));
        }
        detail.push(format!("{name} [{}]", parts.join(", ")));
    }
    check(ok, format!("AbI design < AbI shifted: {}", detail.join("; ")))
}

fn c9_k_star() -> Outcome {
    let dims = design_dims();
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, d, reference) in [("double-well", double_well_boundary(), 10), ("amf-hinge", amf_hinge_boundary(), 3)] {
        let r = design(&d, dims, MAX_SEGMENTS, DESIGN_PFA);
        let best = r
            .log
            .iter()
            .filter(|c| c.feasible)
            .min_by(|a, b| a.cost.unwrap().total_cmp(&b.cost.unwrap()))
            .expect("a feasible candidate");
        let minimal = best.cost == Some(r.cost) && (best.k, best.i) == (r.k_star, r.i_star);
        let in_range = (2..=16).contains(&r.k_star);
        ok &= minimal && in_range && complete_log(&r, MAX_SEGMENTS);
        detail.push(format!(
            "{name} k* = {} (reference {reference}), {} feasible, cost minimal over log: {minimal}",
            r.k_star,
            r.log.iter().filter(|c| c.feasible).count()
        ));
    }
    check(ok, detail.join("; "))
}

fn c10_real_data_protocol() -> Outcome {
    let dims = ProblemDims::new(4, 8).unwrap();
    let pfa = 1e-3;
    // the double well sits far above 1e-3 at this size, so raise it to 3e-3 first
    let d: Boundary = shifted_baseline(&double_well_boundary(), 3e-3, dims).unwrap().boundary.into();
    let r = design(&d, dims, 8, pfa);
    let pulses = 30720;
    let cube = synthetic_cube(76, pulses, &ClutterModel::reference(), 7).unwrap();
    let est = empirical_pfa_on_cube(&cube, &r.boundary.into(), 30, dims, DEFAULT_F_D).unwrap();
    let z = est.z_score(pfa);
    // count windows [s, s + N) with s advancing by N − 1
    let mut enumerated = 0;
    let mut s = 0;
    while s + dims.n <= pulses {
        enumerated += 1;
        s += dims.n - 1;
    }
    let count = snapshot_count(pulses, dims.n);
    check(
        z <= 3.0 && count == enumerated && est.trials as usize == count,
        format!(
            "synthetic 76x30720 cube, CUT 30: Pfa {:.3e} ({} / {}), {z:.2} SE (tol 3); windows {count} = enumerated {enumerated} (text quotes 10240, an off-by-one)",
            est.value, est.hits, est.trials
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 closed form vs quadrature under H0", c1_closed_form_vs_quadrature),
        ("2 closed form vs Monte Carlo", c2_closed_form_vs_monte_carlo),
        ("3 distribution laws", c3_distribution_laws),
        ("4 identity suite", c4_identities),
        ("5 baseline equivalence", c5_baseline_equivalence),
        ("6 Algorithm 1 contract", c6_algorithm1_contract),
        ("7 Algorithm 2 contract", c7_algorithm2_contract),
        ("8 design quality ordering", c8_design_quality),
        ("9 k* plausibility", c9_k_star),
        ("10 real-data protocol at desk scale", c10_real_data_protocol),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("PASS criterion {name}: {msg} [{secs:.1}s]"),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {name}: {msg} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
