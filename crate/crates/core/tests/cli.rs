use std::path::Path;
use std::process::Command;
use std::time::Instant;

use cfarfp::boundary::{BaselineDetector, BaselineKind};
use cfarfp::datacube::{synthetic_cube, CubeFormat};
use cfarfp::montecarlo::{Calibration, ClutterModel};
use cfarfp::performance::{pfa_closed_form, MesaGrid};
use cfarfp::stats::ProblemDims;

fn run(dir: &Path, config: &str, args: &[&str]) -> (i32, String) {
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, config).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cfarfp"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn header(out: &Path, n: usize, k: usize, pfa: f64) -> String {
    format!("out = {:?}\n[scenario]\nn = {n}\nk = {k}\npfa = {pfa:e}\n", out.display().to_string())
}

#[test]
fn design_double_well_writes_full_log() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = header(&out, 16, 32, 1e-4) + "[boundary]\nsource = \"preset\"\nname = \"double_well\"\n";
    let (code, err) = run(dir.path(), &cfg, &["design", "--continuous"]);
    assert_eq!(code, 0, "{err}");
    let log = std::fs::read_to_string(out.join("candidates.csv")).unwrap();
    assert_eq!(log.lines().next().unwrap(), "k,i,eps_i,feasible,cost");
    assert_eq!(log.lines().count(), 1 + 135);
    let side: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("design.json")).unwrap()).unwrap();
    for key in ["k_star", "pfa_target", "cost", "specs", "continuous"] {
        assert!(side.get(key).is_some(), "{key}");
    }
    assert!(out.join("boundary_continuous.json").is_file());
    let cont: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("design_continuous.json")).unwrap()).unwrap();
    assert_eq!(cont["continuous"], serde_json::Value::Bool(true));
}

#[test]
fn missing_control_file_leaves_no_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = header(&out, 4, 8, 1e-3) + "[boundary]\nsource = \"spline\"\ncontrol_file = \"/nonexistent/points.csv\"\n";
    let (code, err) = run(dir.path(), &cfg, &["design"]);
    assert_eq!(code, 2, "{err}");
    assert!(!out.exists());

    let (code, _) = run(dir.path(), "[scenario]\nn = 4\n", &["design"]);
    assert_eq!(code, 2);
}

#[test]
fn infeasible_design_has_its_own_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    // a flat curve whose native Pfa is far above the target
    let cfg = header(&out, 4, 8, 1e-3) + "[boundary]\nsource = \"baseline\"\nkind = \"kelly\"\neta = 0.3\n[design]\np = 4\n";
    let (code, _) = run(dir.path(), &cfg, &["design"]);
    assert_eq!(code, 3);
    let log = std::fs::read_to_string(out.join("candidates.csv")).unwrap();
    assert_eq!(log.lines().count(), 1 + 9);
    assert!(!out.join("boundary.json").exists());
}

#[test]
fn calibrate_is_reproducible_and_accurate() {
    let dir = tempfile::tempdir().unwrap();
    let read = |d: &Path| std::fs::read(d.join("calibration.json")).unwrap();
    let cfg = |out: &Path| header(out, 4, 8, 1e-3) + "[trials]\nseed = 11\ntrials = 100000\n[calibrate]\ndetector = \"kelly\"\n";
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run(dir.path(), &cfg(&a), &["calibrate", "--threads", "1"]).0, 0);
    assert_eq!(run(dir.path(), &cfg(&b), &["calibrate", "--threads", "3"]).0, 0);
    assert_eq!(read(&a), read(&b));

    let c: Calibration = serde_json::from_slice(&read(&a)).unwrap();
    let dims = ProblemDims::new(4, 8).unwrap();
    let exact = pfa_closed_form(&BaselineDetector::new(BaselineKind::Kelly, c.eta).unwrap().boundary(), dims).unwrap();
    let se = (1e-3 * (1.0 - 1e-3) / 1e5f64).sqrt();
    assert!((exact - 1e-3).abs() < 3.0 * se, "closed-form Pfa {exact:e} at η = {}", c.eta);

    let (code, _) = run(dir.path(), &cfg(&a), &["calibrate", "--seed", "12"]);
    assert_eq!(code, 0);
    let other: Calibration = serde_json::from_slice(&read(&a)).unwrap();
    assert_eq!(other.seed, 12);
}

#[test]
fn calibrate_smoke_is_fast() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = header(&dir.path().join("o"), 4, 8, 0.5) + "[trials]\nseed = 1\ntrials = 2000\n";
    let t = Instant::now();
    assert_eq!(run(dir.path(), &cfg, &["calibrate"]).0, 0);
    assert!(t.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn eval_writes_monotone_mesa_and_valid_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let b = dir.path().join("amf.json");
    let amf: cfarfp::boundary::Boundary = BaselineDetector::new(BaselineKind::Amf, 3.0).unwrap().into();
    amf.save(&b).unwrap();
    let cfg = header(&out, 8, 16, 1e-3)
        + "[boundary]\nsource = \"baseline\"\nkind = \"kelly\"\neta = 0.5\n"
        + &format!("[eval]\ncompare = [{:?}]\n", b.display().to_string())
        + "reference = { source = \"baseline\", kind = \"ace\", eta = 0.5 }\n"
        + "gamma_db = [0, 2.5, 5, 7.5, 10, 12.5, 15, 17.5, 20, 22.5, 25]\nlambda = [0.25, 0.5, 0.75, 1]\n";
    let (code, err) = run(dir.path(), &cfg, &["eval"]);
    assert_eq!(code, 0, "{err}");
    let m = MesaGrid::from_csv(&std::fs::read_to_string(out.join("mesa_boundary.csv")).unwrap()).unwrap();
    let col: Vec<f64> = m.pd.iter().map(|r| r[3]).collect();
    assert!(col.windows(2).all(|w| w[1] >= w[0]));
    assert!(out.join("mesa_amf.csv").is_file());
    let abi = std::fs::read_to_string(out.join("abi.csv")).unwrap();
    assert_eq!(abi.lines().next().unwrap(), "level,detector,abi,lambda_lo,lambda_hi");
    assert_eq!(abi.lines().count(), 1 + 3 * 2);

    let svg = std::fs::read_to_string(out.join("mesa.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let paths = doc.descendants().filter(|n| n.has_tag_name("path")).count();
    assert_eq!(paths, 3 * 3);
}

#[test]
fn scatter_and_ingest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cube = synthetic_cube(12, 301, &ClutterModel::reference(), 5).unwrap();
    let cube_path = dir.path().join("cube.bin");
    cube.save(&cube_path, CubeFormat::Binary).unwrap();
    let cfg = header(&out, 4, 8, 1e-3)
        + "[boundary]\nsource = \"baseline\"\nkind = \"kelly\"\neta = 0.5\n[trials]\nseed = 2\ntrials = 500\n"
        + &format!("[ingest]\ncube = {:?}\ncut_cell = 5\ngamma_db = [10, 20]\n", cube_path.display().to_string());
    let (code, err) = run(dir.path(), &cfg, &["ingest"]);
    assert_eq!(code, 0, "{err}");
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("ingest.json")).unwrap()).unwrap();
    assert_eq!(report["windows"], 100);
    assert_eq!(report["pfa"]["trials"], 100);
    assert_eq!(report["pd"].as_array().unwrap().len(), 2);

    let (code, err) = run(dir.path(), &cfg, &["scatter"]);
    assert_eq!(code, 0, "{err}");
    let csv = std::fs::read_to_string(out.join("scatter.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "condition_label,beta,t_tilde");
    assert_eq!(csv.lines().count(), 1 + 3 * 500);
    roxmltree::Document::parse(&std::fs::read_to_string(out.join("scatter.svg")).unwrap()).unwrap();
}
