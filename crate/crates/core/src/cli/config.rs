use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::boundary::{BaselineDetector, BaselineKind, Boundary, SplineBoundary, SplineFit};
use crate::datacube::CubeFormat;
use crate::designer::Weighting;
use crate::montecarlo::{ClutterModel, Scenario, TrialPlan, DEFAULT_F_D};
use crate::presets;
use crate::stats::ProblemDims;

use super::{CliError, Command};

/// Everything a command needs, read from one TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub boundary: Option<BoundarySource>,
    #[serde(default)]
    pub design: DesignConfig,
    #[serde(default)]
    pub trials: TrialConfig,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub eval: EvalConfig,
    #[serde(default)]
    pub calibrate: CalibrateConfig,
    #[serde(default)]
    pub scatter: ScatterConfig,
    #[serde(default)]
    pub ingest: Option<IngestConfig>,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n: usize,
    pub k: usize,
    pub pfa: f64,
    /// Absent means white noise.
    #[serde(default)]
    pub clutter: Option<ClutterConfig>,
    #[serde(default)]
    pub steering: SteeringConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClutterConfig {
    /// One-lag correlation of the clutter; ignored when `sigma_f` is set.
    #[serde(default = "default_correlation")]
    pub correlation: f64,
    #[serde(default)]
    pub sigma_f: Option<f64>,
    #[serde(default = "default_noise")]
    pub noise_power: f64,
}

fn default_correlation() -> f64 {
    0.95
}

fn default_noise() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteeringConfig {
    pub f_d: f64,
}

impl Default for SteeringConfig {
    fn default() -> Self {
        Self { f_d: DEFAULT_F_D }
    }
}

/// Where the boundary of interest comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundarySource {
    /// A boundary JSON file as written by `design`.
    File { path: PathBuf },
    Baseline {
        kind: BaselineKind,
        eta: f64,
        #[serde(default)]
        kappa: f64,
    },
    /// Control points inline or from a two-column CSV file.
    Spline {
        #[serde(default)]
        control: Option<Vec<[f64; 2]>>,
        #[serde(default)]
        control_file: Option<PathBuf>,
        #[serde(default = "default_order")]
        order: usize,
        /// Regression coefficients; absent means interpolate.
        #[serde(default)]
        coefficients: Option<usize>,
    },
    Preset { name: Preset },
}

fn default_order() -> usize {
    4
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    DoubleWell,
    AmfHinge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DesignConfig {
    pub p: usize,
    pub gamma_db: Vec<f64>,
    pub lambda: Vec<f64>,
    pub weighting: Weighting,
    pub continuous: bool,
}

impl Default for DesignConfig {
    fn default() -> Self {
        Self {
            p: presets::MAX_SEGMENTS,
            gamma_db: presets::DESIGN_GAMMA_DB.to_vec(),
            lambda: presets::DESIGN_LAMBDA.to_vec(),
            weighting: Weighting::default(),
            continuous: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrialConfig {
    pub seed: u64,
    pub trials: u64,
}

impl Default for TrialConfig {
    fn default() -> Self {
        Self { seed: 1, trials: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Further boundary files compared alongside the main boundary.
    pub compare: Vec<PathBuf>,
    /// Desired curve the AbI table is measured against.
    pub reference: Option<BoundarySource>,
    pub gamma_db: Vec<f64>,
    pub lambda: Vec<f64>,
    pub levels: Vec<f64>,
    pub svg: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            compare: Vec::new(),
            reference: None,
            gamma_db: (0..=50).map(|i| i as f64 * 0.5).collect(),
            lambda: (0..=15).map(|j| 0.25 + 0.05 * j as f64).collect(),
            levels: vec![0.5, 0.7, 0.9],
            svg: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrateConfig {
    pub detector: BaselineKind,
    pub kappa: f64,
}

impl Default for CalibrateConfig {
    fn default() -> Self {
        Self { detector: BaselineKind::Kelly, kappa: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatterConfig {
    pub conditions: Vec<ConditionConfig>,
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConditionConfig {
    pub label: String,
    /// Absent means H0.
    #[serde(default)]
    pub gamma_db: Option<f64>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
}

fn default_lambda() -> f64 {
    1.0
}

impl Default for ScatterConfig {
    fn default() -> Self {
        let c = |label: &str, gamma_db: Option<f64>, lambda: f64| ConditionConfig { label: label.into(), gamma_db, lambda };
        Self {
            conditions: vec![c("h0", None, 1.0), c("matched_15db", Some(15.0), 1.0), c("mismatched_15db", Some(15.0), 0.5)],
            svg: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IngestConfig {
    pub cube: PathBuf,
    /// Guessed from the extension when absent.
    #[serde(default)]
    pub format: Option<CubeFormat>,
    pub cut_cell: usize,
    /// Injected-target SNRs for the Pd sweep.
    #[serde(default)]
    pub gamma_db: Vec<f64>,
}

impl RunConfig {
    pub fn from_toml(s: &str) -> Result<Self, CliError> {
        toml::from_str(s).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let s = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&s)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Checks values, and the input files the given command will read.
    pub fn validate(&self, command: Command) -> Result<(), CliError> {
        let s = &self.scenario;
        ProblemDims::new(s.n, s.k).map_err(CliError::config)?;
        if !(s.pfa > 0.0 && s.pfa < 1.0) {
            return Err(CliError::Config(format!("pfa = {} must lie in (0, 1)", s.pfa)));
        }
        if self.design.p < 2 {
            return Err(CliError::Config(format!("p = {} must be at least 2", self.design.p)));
        }
        if self.trials.trials == 0 {
            return Err(CliError::Config("trials must be positive".into()));
        }
        if let Some(src) = &self.boundary {
            src.check_files()?;
        }
        match command {
            Command::Eval => {
                if let Some(src) = &self.eval.reference {
                    src.check_files()?;
                }
                for f in &self.eval.compare {
                    require_file(f)?;
                }
            }
            Command::Ingest => {
                let ing = self.ingest.as_ref().ok_or_else(|| CliError::Config("no [ingest] section".into()))?;
                require_file(&ing.cube)?;
            }
            _ => {}
        }
        Ok(())
    }

    pub fn dims(&self) -> Result<ProblemDims, CliError> {
        ProblemDims::new(self.scenario.n, self.scenario.k).map_err(CliError::config)
    }

    pub fn plan(&self) -> Result<TrialPlan, CliError> {
        TrialPlan::new(self.trials.seed, self.trials.trials, self.dims()?).map_err(CliError::config)
    }

    pub fn scenario(&self) -> Result<Scenario, CliError> {
        let dims = self.dims()?;
        let f_d = self.scenario.steering.f_d;
        let sc = match self.scenario.clutter {
            None => Scenario::white(dims, f_d),
            Some(c) => {
                let sigma_f = c.sigma_f.unwrap_or_else(|| ClutterModel::sigma_f_for_correlation(c.correlation));
                let cm = ClutterModel::new(sigma_f, c.noise_power).map_err(CliError::config)?;
                Scenario::clutter(dims, &cm, f_d)
            }
        };
        sc.map_err(CliError::config)
    }

    pub fn main_boundary(&self) -> Result<Boundary, CliError> {
        self.boundary.as_ref().ok_or_else(|| CliError::Config("no [boundary] section".into()))?.resolve()
    }
}

fn require_file(p: &Path) -> Result<(), CliError> {
    if p.is_file() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{}: no such file", p.display())))
    }
}

/// Two numbers per line, comma or whitespace separated; `#` starts a comment.
pub fn parse_control_points(s: &str) -> Result<Vec<[f64; 2]>, CliError> {
    s.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| {
            let v: Vec<f64> = l
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<f64>().map_err(|e| CliError::Config(format!("control point '{l}': {e}"))))
                .collect::<Result<_, _>>()?;
            match v[..] {
                [b, t] => Ok([b, t]),
                _ => Err(CliError::Config(format!("control point '{l}' needs two values"))),
            }
        })
        .collect()
}

impl BoundarySource {
    fn check_files(&self) -> Result<(), CliError> {
        match self {
            Self::File { path } => require_file(path),
            Self::Spline { control_file: Some(f), .. } => require_file(f),
            _ => Ok(()),
        }
    }

    pub fn resolve(&self) -> Result<Boundary, CliError> {
        Ok(match self {
            Self::File { path } => {
                require_file(path)?;
                Boundary::load(path).map_err(CliError::config)?
            }
            Self::Baseline { kind, eta, kappa } => {
                BaselineDetector::with_kappa(*kind, *eta, *kappa).map_err(CliError::config)?.into()
            }
            Self::Spline { control, control_file, order, coefficients } => {
                let pts = match (control, control_file) {
                    (Some(c), None) => c.clone(),
                    (None, Some(f)) => {
                        require_file(f)?;
                        let s = std::fs::read_to_string(f).map_err(|e| CliError::Config(format!("{}: {e}", f.display())))?;
                        parse_control_points(&s)?
                    }
                    _ => return Err(CliError::Config("spline needs exactly one of control, control_file".into())),
                };
                let fit = coefficients.map_or(SplineFit::Interpolate, |c| SplineFit::LeastSquares { coefficients: c });
                SplineBoundary::new(pts, *order, fit).map_err(CliError::config)?.into()
            }
            Self::Preset { name: Preset::DoubleWell } => presets::double_well_boundary(),
            Self::Preset { name: Preset::AmfHinge } => presets::amf_hinge_boundary(),
        })
    }
}
