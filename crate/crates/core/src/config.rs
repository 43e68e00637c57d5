//! Experiment configuration files.
//!
//! ```toml
//! [model]
//! kind = "kdv"          # kdv | quadratic4 | boussinesq
//! c = 1.0
//!
//! [source]
//! kind = "exp"          # zero | delta | exp | linear | sin | log1p | table
//!
//! [expansion]
//! n = 2
//!
//! [grid]
//! dt = 0.001
//! horizon = 5.0
//! ```
//!
//! Every section and field has a default; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{ExperimentSetup, Forcing};
use crate::distributions::{DistributionError, MollifiedDelta};
use crate::greens::{build_green_from_homogeneous, build_green_with_data, wrap_closed_form, GreenError, GreenFunction};
use crate::grid::{format_number, GridError, GridFunction, GridSpec};
use crate::ivp::{CauchyData, IvpConfig, IvpError, Method, Source};
use crate::models::{boussinesq_reduced, kdv_reduced, quadratic_fourth, ModelError, ModelSpec, Problem, WaveProfile};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("parse: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("emit: {0}")]
    Emit(#[from] toml::ser::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("kernel: {0}")]
    Green(#[from] GreenError),
    #[error("solver: {0}")]
    Ivp(#[from] IvpError),
    #[error("source: {0}")]
    Distribution(#[from] DistributionError),
    #[error("grid: {0}")]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Kdv,
    Quadratic4,
    Boussinesq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// Closed form where one exists, homogeneous solve otherwise.
    #[default]
    Auto,
    ClosedForm,
    Homogeneous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKind,
    /// KdV wave speed.
    pub c: f64,
    /// KdV integration constant.
    pub c0: f64,
    /// Wave speed of the fourth-order models.
    pub v: f64,
    /// Elliptic modulus of the Boussinesq wave.
    pub modulus: f64,
    pub phi: f64,
    pub profile: WaveProfile,
    /// Impulse strength of homogeneous-solve kernels.
    pub s: f64,
    pub kernel: KernelKind,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            kind: ModelKind::Kdv,
            c: 1.0,
            c0: 0.0,
            v: 1.0,
            modulus: 0.5,
            phi: 0.0,
            profile: WaveProfile::Snoidal,
            s: 1.0,
            kernel: KernelKind::Auto,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    Zero,
    Delta,
    #[default]
    Exp,
    Linear,
    Sin,
    Log1p,
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceConfig {
    pub kind: SourceKind,
    /// Two-column CSV for `kind = "table"`, relative to the config file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    /// Derivative order of the delta source.
    pub delta_order: usize,
    /// Constant factor on the source.
    pub amplitude: f64,
}

impl Default for SourceConfig {
    fn default() -> Self {
        Self { kind: SourceKind::default(), path: None, delta_order: 0, amplitude: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExpansionConfig {
    /// Highest power `N` in `Σ_{k=0}^{N}`.
    pub n: usize,
    /// Orders written by `solve`; defaults to `[n]`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub n_values: Vec<usize>,
    pub fit_start: f64,
    /// Defaults to the horizon.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit_end: Option<f64>,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        Self { n: 1, n_values: Vec::new(), fit_start: 0.0, fit_end: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub t0: f64,
    pub dt: f64,
    pub horizon: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { t0: 0.0, dt: 1e-3, horizon: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MollifierConfig {
    pub epsilon: f64,
    /// Center of the Gaussian; defaults to `8·epsilon`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
}

impl Default for MollifierConfig {
    fn default() -> Self {
        Self { epsilon: 0.01, center: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub method: Method,
    pub abs_tol: f64,
    pub rel_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = IvpConfig::default();
        Self { method: d.method, abs_tol: d.abs_tol, rel_tol: d.rel_tol }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    /// Window of the `Er` summaries; defaults to the whole grid.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_start: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_end: Option<f64>,
    /// `(N₁, N₂)` pairs for `Er₂` curves.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub er2_pairs: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// `model.<field>` name, e.g. `c`, `v`, `modulus`, or `n`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameter: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub source: SourceConfig,
    pub expansion: ExpansionConfig,
    pub grid: GridConfig,
    pub mollifier: MollifierConfig,
    pub solver: SolverConfig,
    pub report: ReportConfig,
    pub output: OutputConfig,
    pub sweep: SweepConfig,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    pub fn emit(&self) -> Result<String, ConfigError> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        let g = &self.grid;
        if !(g.dt.is_finite() && g.dt > 0.0) {
            return invalid(format!("grid.dt must be positive, got {}", g.dt));
        }
        if !(g.horizon.is_finite() && g.horizon > g.t0) {
            return invalid(format!("grid.horizon must exceed grid.t0, got {}", g.horizon));
        }
        if self.source.kind == SourceKind::Delta && self.mollifier.epsilon < 4.0 * g.dt * (1.0 - 1e-12) {
            return invalid(format!("mollifier.epsilon = {} is below 4·dt", self.mollifier.epsilon));
        }
        if self.source.kind == SourceKind::Table && self.source.path.is_none() {
            return invalid("source.kind = \"table\" needs source.path".into());
        }
        if !self.source.amplitude.is_finite() {
            return invalid("source.amplitude must be finite".into());
        }
        if self.source.delta_order > 3 {
            return invalid("source.delta_order must be at most 3".into());
        }
        if self.expansion.orders().into_iter().any(|n| n > crate::expansion::MAX_TERMS_INDEX) {
            return invalid(format!("expansion orders must be at most {}", crate::expansion::MAX_TERMS_INDEX));
        }
        let (lo, hi) = self.fit_window();
        if !(lo < hi) {
            return invalid(format!("fit window [{lo}, {hi}] is empty"));
        }
        if self.model.modulus.abs() > 1.0 {
            return invalid(format!("model.modulus = {} outside [0, 1]", self.model.modulus));
        }
        Ok(())
    }

    pub fn fit_window(&self) -> (f64, f64) {
        (self.expansion.fit_start, self.expansion.fit_end.unwrap_or(self.grid.horizon))
    }

    pub fn report_window(&self) -> (f64, f64) {
        (self.report.window_start.unwrap_or(self.grid.t0), self.report.window_end.unwrap_or(self.grid.horizon))
    }

    pub fn ivp(&self) -> IvpConfig {
        IvpConfig {
            t0: self.grid.t0,
            horizon: self.grid.horizon,
            dt: self.grid.dt,
            method: self.solver.method,
            abs_tol: self.solver.abs_tol,
            rel_tol: self.solver.rel_tol,
            ..IvpConfig::default()
        }
    }

    pub fn grid_spec(&self) -> Result<GridSpec, ConfigError> {
        Ok(GridSpec::covering(self.grid.t0, self.grid.horizon, self.grid.dt)?)
    }

    pub fn problem(&self) -> Result<Problem, ConfigError> {
        let m = &self.model;
        Ok(match m.kind {
            ModelKind::Kdv => kdv_reduced(m.c, m.c0)?,
            ModelKind::Quadratic4 => quadratic_fourth(m.v),
            ModelKind::Boussinesq => boussinesq_reduced(m.v),
        })
    }

    /// The kernel the expansion is built on. Homogeneous solves extend
    /// over the full horizon (plus the mollifier offset for delta sources).
    pub fn kernel(&self) -> Result<GreenFunction, ConfigError> {
        let m = &self.model;
        let closed = match m.kind {
            ModelKind::Kdv => Some(ModelSpec::Kdv { c: m.c }),
            ModelKind::Boussinesq => Some(ModelSpec::Boussinesq { v: m.v, modulus: m.modulus, phi: m.phi, profile: m.profile }),
            ModelKind::Quadratic4 => None,
        };
        let horizon = self.grid.horizon + self.delta_padding();
        let ivp = IvpConfig { t0: 0.0, horizon, ..self.ivp() };
        match (m.kernel, closed) {
            (KernelKind::Auto | KernelKind::ClosedForm, Some(spec)) => Ok(wrap_closed_form(&spec)?),
            (KernelKind::ClosedForm, None) => Err(ConfigError::Invalid("quadratic4 has no closed-form kernel".into())),
            (_, Some(ModelSpec::Kdv { c })) => {
                let problem = kdv_reduced(c, 0.0)?;
                Ok(build_green_with_data(&problem, &CauchyData::new(vec![-c / 2.0, 0.0])?, &ivp)?)
            }
            (_, Some(ModelSpec::Boussinesq { .. })) => {
                let form = wrap_closed_form(closed.as_ref().expect("boussinesq"))?;
                let spec = GridSpec::new(0.0, self.grid.dt, 2)?;
                let data: Vec<f64> = form.sample_states(spec)?.iter().map(|s| s.values()[0]).collect();
                Ok(build_green_with_data(&self.problem()?, &CauchyData::new(data)?, &ivp)?)
            }
            (_, None) => Ok(build_green_from_homogeneous(&self.problem()?, m.s, &ivp)?),
        }
    }

    fn delta_padding(&self) -> f64 {
        if self.source.kind == SourceKind::Delta {
            self.mollifier.center.unwrap_or(MollifiedDelta::DEFAULT_CENTER_WIDTHS * self.mollifier.epsilon)
        } else {
            0.0
        }
    }

    /// `base_dir` resolves relative table paths.
    pub fn forcing(&self, base_dir: &Path) -> Result<Forcing, ConfigError> {
        let amplitude = self.source.amplitude;
        let smooth = |label: &str, source: Source| {
            let label = if amplitude == 1.0 { label.to_string() } else { format!("{}*{label}", format_number(amplitude)) };
            Forcing::Smooth { label, source: source.scaled(amplitude) }
        };
        Ok(match self.source.kind {
            SourceKind::Zero => smooth("zero", Source::Zero),
            SourceKind::Exp => smooth("exp", Source::function(f64::exp)),
            SourceKind::Linear => smooth("linear", Source::function(|t| t)),
            SourceKind::Sin => smooth("sin", Source::function(f64::sin)),
            SourceKind::Log1p => smooth("log1p", Source::function(f64::ln_1p)),
            SourceKind::Table => {
                let rel = self.source.path.as_deref().expect("validated");
                let path = base_dir.join(rel);
                let file = std::fs::File::open(&path).map_err(|source| ConfigError::Read { path: path.clone(), source })?;
                let table = GridFunction::read_table(file)?;
                let g = GridFunction::from_table(&table, self.grid_spec()?)?;
                smooth(&format!("table:{rel}"), Source::Grid(g))
            }
            SourceKind::Delta => {
                let eps = self.mollifier.epsilon;
                let center = self.mollifier.center.unwrap_or(MollifiedDelta::DEFAULT_CENTER_WIDTHS * eps);
                Forcing::Delta { delta: MollifiedDelta::new(eps, self.source.delta_order, center)?, amplitude }
            }
        })
    }

    pub fn setup(&self, base_dir: &Path) -> Result<ExperimentSetup, ConfigError> {
        let problem = self.problem()?;
        Ok(ExperimentSetup {
            init: CauchyData::zeros(problem.order()),
            kernel: self.kernel()?,
            forcing: self.forcing(base_dir)?,
            solver: self.ivp(),
            fit_window: self.fit_window(),
            report_window: self.report_window(),
            problem,
        })
    }
}

impl ExpansionConfig {
    pub fn orders(&self) -> Vec<usize> {
        if self.n_values.is_empty() {
            vec![self.n]
        } else {
            self.n_values.clone()
        }
    }
}
