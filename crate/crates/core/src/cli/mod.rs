//! Batch front end: `design`, `eval`, `calibrate`, `scatter` and `ingest`,
//! each driven by a TOML [`RunConfig`]. Outputs are collected in memory and
//! written to the output directory only once a command has succeeded.

pub mod config;
pub mod svg;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::boundary::Boundary;
use crate::datacube::{empirical_pd_on_cube, empirical_pfa_on_cube, snapshot_count, CubeFormat, DataCube};
use crate::designer::{algorithm1, algorithm2_continuity, candidate_log_csv, sample_specifications};
use crate::error::Error;
use crate::montecarlo::{calibrate_threshold, cluster_scatter, scatter_csv, Estimate};
use crate::performance::{abi, mesa, MesaGrid};
use crate::stats::SignalCondition;

pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("writing {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub(crate) fn config(e: Error) -> Self {
        Self::Config(e.to_string())
    }

    /// 2 for bad input, 3 for an infeasible design, 4 for anything that
    /// failed while computing or writing.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Core(Error::Parse(_) | Error::InvalidParameter(_) | Error::InvalidBoundary(_)) => 2,
            Self::Core(Error::DesignInfeasible { .. } | Error::Infeasible { .. }) => 3,
            _ => 4,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "cfarfp", version, about = "Design and evaluate CFAR detectors in the (β, t̃) feature plane")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides `trials.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides `out`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Fit a piecewise-linear detector to the configured boundary.
    Design {
        /// Also write the continuous refinement.
        #[arg(long)]
        continuous: bool,
    },
    /// Mesa grids, AbI table and contour plot.
    Eval,
    /// Monte Carlo threshold of a classical detector.
    Calibrate,
    /// Feature-plane point clouds.
    Scatter,
    /// Sliding-window Pfa (and injected Pd) on a data cube.
    Ingest,
}

/// Files produced by a command, written together at the end.
#[derive(Debug, Default)]
pub struct Outputs(Vec<(String, Vec<u8>)>);

impl Outputs {
    pub fn add(&mut self, name: impl Into<String>, body: impl Into<Vec<u8>>) {
        self.0.push((name.into(), body.into()));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.0.iter().find(|(n, _)| n == name).map(|(_, b)| b.as_slice())
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
        let err = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CliError::Output { path, source }
        };
        std::fs::create_dir_all(dir).map_err(err(dir))?;
        self.0
            .iter()
            .map(|(name, body)| {
                let p = dir.join(name);
                std::fs::write(&p, body).map_err(err(&p))?;
                Ok(p)
            })
            .collect()
    }
}

/// Loads the configuration and applies the command-line overrides.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(s) = cli.seed {
        cfg.trials.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Command::Design { continuous: true } = cli.command {
        cfg.design.continuous = true;
    }
    cfg.validate(cli.command)?;
    Ok(cfg)
}

/// Runs a command and writes its outputs, returning the files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let cfg = resolve_config(cli)?;
    let job = || execute(cli.command, &cfg);
    let outputs = match cli.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("threads: {e}")))?
            .install(job),
        None => job(),
    };
    match outputs {
        Ok(o) => o.write(&cfg.out),
        Err(CliError::Core(Error::DesignInfeasible { log })) => {
            // the log explains the failure, so it is still written
            let mut o = Outputs::default();
            o.add("candidates.csv", candidate_log_csv(&log));
            o.write(&cfg.out)?;
            Err(Error::DesignInfeasible { log }.into())
        }
        Err(e) => Err(e),
    }
}

/// Computes a command's outputs without touching the file system.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outputs, CliError> {
    match command {
        Command::Design { .. } => cmd_design(cfg),
        Command::Eval => cmd_eval(cfg),
        Command::Calibrate => cmd_calibrate(cfg),
        Command::Scatter => cmd_scatter(cfg),
        Command::Ingest => cmd_ingest(cfg),
    }
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

pub fn cmd_design(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let dims = cfg.dims()?;
    let d = cfg.main_boundary()?;
    let specs = sample_specifications(&d, &cfg.design.gamma_db, &cfg.design.lambda, dims)?;
    let r = algorithm1(&d, cfg.design.p, cfg.scenario.pfa, &specs, dims, cfg.design.weighting)?;
    let mut o = Outputs::default();
    o.add("boundary.json", Boundary::from(r.boundary.clone()).to_json() + "\n");
    o.add("design.json", r.sidecar_json() + "\n");
    o.add("candidates.csv", r.log_csv());
    if cfg.design.continuous {
        let c = algorithm2_continuity(&r, cfg.scenario.pfa, dims)?;
        o.add("boundary_continuous.json", Boundary::from(c.boundary.clone()).to_json() + "\n");
        o.add("design_continuous.json", c.sidecar_json() + "\n");
    }
    Ok(o)
}

#[derive(Serialize)]
struct AbiRow {
    level: f64,
    detector: String,
    abi: Option<f64>,
    lambda_lo: Option<f64>,
    lambda_hi: Option<f64>,
}

fn label_of(path: &Path) -> String {
    path.file_stem().map_or_else(|| "boundary".into(), |s| s.to_string_lossy().into_owned())
}

pub fn cmd_eval(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let dims = cfg.dims()?;
    let e = &cfg.eval;
    let mut detectors: Vec<(String, Boundary)> = Vec::new();
    if let Some(src) = &cfg.boundary {
        detectors.push(("boundary".into(), src.resolve()?));
    }
    for f in &e.compare {
        let b = Boundary::load(f).map_err(CliError::config)?;
        let mut label = label_of(f);
        while detectors.iter().any(|(l, _)| *l == label) {
            label.push('_');
        }
        detectors.push((label, b));
    }
    if detectors.is_empty() {
        return Err(CliError::Config("eval needs a [boundary] or eval.compare files".into()));
    }
    let mut o = Outputs::default();
    let mut grids: Vec<(String, MesaGrid)> = Vec::new();
    for (label, b) in &detectors {
        let g = mesa(b, &e.gamma_db, &e.lambda, dims)?;
        o.add(format!("mesa_{label}.csv"), g.to_csv());
        grids.push((label.clone(), g));
    }
    if let Some(src) = &e.reference {
        let rg = mesa(&src.resolve()?, &e.gamma_db, &e.lambda, dims)?;
        o.add("mesa_reference.csv", rg.to_csv());
        let mut w = csv::Writer::from_writer(Vec::new());
        for &level in &e.levels {
            for (label, g) in &grids {
                let row = match abi(g, &rg, level) {
                    Ok(a) => AbiRow { level, detector: label.clone(), abi: Some(a.value), lambda_lo: Some(a.lambda_lo), lambda_hi: Some(a.lambda_hi) },
                    Err(Error::Undefined(_)) => AbiRow { level, detector: label.clone(), abi: None, lambda_lo: None, lambda_hi: None },
                    Err(other) => return Err(other.into()),
                };
                w.serialize(row).map_err(|e| CliError::Core(Error::Parse(e.to_string())))?;
            }
        }
        o.add("abi.csv", w.into_inner().map_err(|e| CliError::Core(Error::Parse(e.to_string())))?);
        grids.push(("reference".into(), rg));
    }
    if e.svg {
        o.add("mesa.svg", svg::mesa_contours(&grids, &e.levels));
    }
    Ok(o)
}

pub fn cmd_calibrate(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let c = calibrate_threshold(cfg.calibrate.detector, cfg.calibrate.kappa, cfg.scenario.pfa, &cfg.plan()?)?;
    let mut o = Outputs::default();
    o.add("calibration.json", c.to_json() + "\n");
    Ok(o)
}

pub fn cmd_scatter(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let conditions = cfg
        .scatter
        .conditions
        .iter()
        .map(|c| {
            let cond = match c.gamma_db {
                None => SignalCondition::h0(),
                Some(g) => SignalCondition::from_db(g, c.lambda).map_err(CliError::config)?,
            };
            Ok((c.label.clone(), cond))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let clusters = cluster_scatter(&cfg.plan()?, &cfg.scenario()?, &conditions)?;
    let mut o = Outputs::default();
    o.add("scatter.csv", scatter_csv(&clusters));
    if cfg.scatter.svg {
        let overlays = match &cfg.boundary {
            Some(src) => vec![("boundary".to_string(), src.resolve()?)],
            None => Vec::new(),
        };
        o.add("scatter.svg", svg::feature_scatter(&clusters, &overlays));
    }
    Ok(o)
}

#[derive(Serialize)]
struct IngestReport {
    cube: PathBuf,
    cells: usize,
    pulses: usize,
    cut_cell: usize,
    windows: usize,
    pfa: Estimate,
    pd: Vec<InjectedPd>,
}

#[derive(Serialize)]
struct InjectedPd {
    gamma_db: f64,
    #[serde(flatten)]
    estimate: Estimate,
}

pub fn cmd_ingest(cfg: &RunConfig) -> Result<Outputs, CliError> {
    let ing = cfg.ingest.as_ref().ok_or_else(|| CliError::Config("no [ingest] section".into()))?;
    let dims = cfg.dims()?;
    let format = ing.format.unwrap_or_else(|| CubeFormat::from_path(&ing.cube));
    let cube = DataCube::load(&ing.cube, format).map_err(CliError::config)?;
    let b = cfg.main_boundary()?;
    let f_d = cfg.scenario.steering.f_d;
    let pfa = empirical_pfa_on_cube(&cube, &b, ing.cut_cell, dims, f_d)?;
    let pd = ing
        .gamma_db
        .iter()
        .map(|&g| {
            let estimate = empirical_pd_on_cube(&cube, &b, ing.cut_cell, dims, f_d, g, cfg.trials.seed)?;
            Ok(InjectedPd { gamma_db: g, estimate })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let report = IngestReport {
        cube: ing.cube.clone(),
        cells: cube.cells(),
        pulses: cube.pulses(),
        cut_cell: ing.cut_cell,
        windows: snapshot_count(cube.pulses(), dims.n),
        pfa,
        pd,
    };
    let mut o = Outputs::default();
    o.add("ingest.json", json(&report));
    Ok(o)
}
