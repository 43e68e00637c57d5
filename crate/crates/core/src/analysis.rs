//! Logarithmic error curves and the experiment pipeline that produces them.
//!
//! `Er₁(t; N) = ln|w_N − w_ref|` compares the `N`-th partial sum with the
//! reference solve; `Er₂(t; N₁, N₂) = ln|w_{N₁} − w_{N₂}|` compares two
//! partial sums. Exact zeros are clamped to [`LOG_FLOOR`]. Summaries skip the
//! first node, where every solution vanishes by construction.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use thiserror::Error;

use crate::distributions::{DistributionError, MollifiedDelta};
use crate::expansion::{basis, combine, fit_basis, ExpansionCoefficients, ExpansionError, ShortTimeSolution};
use crate::greens::{wrap_closed_form, GreenError, GreenFunction};
use crate::grid::{format_number, GridError, GridFunction};
use crate::ivp::{solve_reference, CauchyData, IvpConfig, IvpError, Source};
use crate::models::{kdv_reduced, ModelError, ModelSpec, Problem};

pub const LOG_FLOOR: f64 = -40.0;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("report window [{0}, {1}] contains no nodes after the first")]
    EmptyWindow(f64, f64),
    #[error("grid: {0}")]
    Grid(#[from] GridError),
    #[error("solver: {0}")]
    Ivp(#[from] IvpError),
    #[error("expansion: {0}")]
    Expansion(#[from] ExpansionError),
    #[error("kernel: {0}")]
    Green(#[from] GreenError),
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("source: {0}")]
    Distribution(#[from] DistributionError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Er1,
    Er2,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::Er1 => "er1",
            ErrorKind::Er2 => "er2",
        })
    }
}

#[derive(Debug, Clone)]
pub struct ErrorReport {
    pub kind: ErrorKind,
    pub er_grid: GridFunction,
    pub max_er: f64,
    pub min_er: f64,
    /// Nodes where the difference was exactly zero.
    pub clamped: usize,
    pub window: (f64, f64),
    pub metadata: BTreeMap<String, String>,
}

impl ErrorReport {
    pub fn with_metadata(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }
}

fn log_error(kind: ErrorKind, a: &GridFunction, b: &GridFunction, window: Option<(f64, f64)>) -> Result<ErrorReport, AnalysisError> {
    a.check_same_grid(b)?;
    let er = a.zip_with(b, |x, y| (x - y).abs().ln().max(LOG_FLOOR))?;
    let clamped = a.values().iter().zip(b.values()).filter(|(x, y)| x == y).count();
    let window = window.unwrap_or((a.t0(), a.end()));
    let idx = a.spec().window_indices(window.0, window.1);
    let start = idx.start.max(1);
    if start >= idx.end {
        return Err(AnalysisError::EmptyWindow(window.0, window.1));
    }
    let slice = &er.values()[start..idx.end];
    let max_er = slice.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_er = slice.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ErrorReport { kind, er_grid: er, max_er, min_er, clamped, window, metadata: BTreeMap::new() })
}

/// `ln|w_green − w_ref|` over the whole grid.
pub fn er1(w_green: &GridFunction, w_ref: &GridFunction) -> Result<ErrorReport, AnalysisError> {
    log_error(ErrorKind::Er1, w_green, w_ref, None)
}

/// `ln|w_n1 − w_n2|` over the whole grid.
pub fn er2(w_n1: &GridFunction, w_n2: &GridFunction) -> Result<ErrorReport, AnalysisError> {
    log_error(ErrorKind::Er2, w_n1, w_n2, None)
}

pub fn er1_in_window(w_green: &GridFunction, w_ref: &GridFunction, window: (f64, f64)) -> Result<ErrorReport, AnalysisError> {
    log_error(ErrorKind::Er1, w_green, w_ref, Some(window))
}

pub fn er2_in_window(w_n1: &GridFunction, w_n2: &GridFunction, window: (f64, f64)) -> Result<ErrorReport, AnalysisError> {
    log_error(ErrorKind::Er2, w_n1, w_n2, Some(window))
}

/// `‖w₁ − w_N‖∞ / ‖w₁‖∞` over `window`.
pub fn dominance_ratio(w1: &GridFunction, wn: &GridFunction, window: (f64, f64)) -> Result<f64, AnalysisError> {
    w1.check_same_grid(wn)?;
    let idx = w1.spec().window_indices(window.0, window.1);
    let (mut diff, mut norm) = (0.0_f64, 0.0_f64);
    for i in idx {
        diff = diff.max((w1.values()[i] - wn.values()[i]).abs());
        norm = norm.max(w1.values()[i].abs());
    }
    Ok(diff / norm)
}

/// Forcing of an experiment.
#[derive(Debug, Clone)]
pub enum Forcing {
    Smooth { label: String, source: Source },
    /// `amplitude·δ⁽q⁾` with the delta replaced by a Gaussian; solved on a
    /// grid extended by the mollifier center and translated back.
    Delta { delta: MollifiedDelta, amplitude: f64 },
}

impl Forcing {
    pub fn label(&self) -> String {
        match self {
            Forcing::Smooth { label, .. } => label.clone(),
            Forcing::Delta { delta, amplitude } => {
                let base = format!("delta{}(eps={})", delta.order, format_number(delta.epsilon));
                if *amplitude == 1.0 {
                    base
                } else {
                    format!("{}*{base}", format_number(*amplitude))
                }
            }
        }
    }
}

/// Everything a forced-solve comparison needs.
#[derive(Debug, Clone)]
pub struct ExperimentSetup {
    pub problem: Problem,
    pub kernel: GreenFunction,
    pub forcing: Forcing,
    pub init: CauchyData,
    /// Analysis grid `[t0, horizon]` and reference solver settings.
    pub solver: IvpConfig,
    pub fit_window: (f64, f64),
    pub report_window: (f64, f64),
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub reference: GridFunction,
    pub source: GridFunction,
    pub solutions: Vec<ShortTimeSolution>,
    pub er1: Vec<ErrorReport>,
    pub metadata: BTreeMap<String, String>,
}

impl ExperimentResult {
    pub fn solution(&self, n: usize) -> Option<&ShortTimeSolution> {
        self.solutions.iter().find(|s| s.n == n)
    }
}

/// Reference solve, basis, one least-squares fit per requested `N`, and the
/// `Er₁` curves.
pub fn run_experiment(setup: &ExperimentSetup, ns: &[usize]) -> Result<ExperimentResult, AnalysisError> {
    let max_n = ns.iter().copied().max().unwrap_or(0);
    let spec = setup.solver.grid()?;
    let mut metadata = BTreeMap::new();
    metadata.insert("problem".to_string(), setup.problem.description().to_string());
    metadata.insert("source".to_string(), setup.forcing.label());
    metadata.insert("kernel_order".to_string(), setup.kernel.order().to_string());
    metadata.insert("kernel_strength".to_string(), format_number(setup.kernel.strength()));
    metadata.insert("kernel_provenance".to_string(), setup.kernel.provenance().to_string());
    metadata.insert("cauchy_data".to_string(), format!("{:?}", setup.init.values()));

    let (reference, source, terms) = match &setup.forcing {
        Forcing::Smooth { source, .. } => {
            let r = solve_reference(&setup.problem, source.clone(), &setup.init, &setup.solver)?;
            metadata.insert("reference".to_string(), r.fingerprint.clone());
            let f = source.sample(spec)?;
            let terms = basis(&setup.kernel, &f, max_n)?;
            (r.solution(), f, terms)
        }
        Forcing::Delta { delta, amplitude } => {
            let padded_cfg = IvpConfig { horizon: setup.solver.horizon + delta.center, ..setup.solver };
            let padded = padded_cfg.grid()?;
            let delta = delta.snapped(padded);
            delta.check_resolvable(padded)?;
            let shift = delta.center_index(padded).expect("snapped center");
            let r = solve_reference(&setup.problem, Source::Delta(delta).scaled(*amplitude), &setup.init, &padded_cfg)?;
            metadata.insert("reference".to_string(), r.fingerprint.clone());
            metadata.insert("delta_center".to_string(), format_number(delta.center));
            metadata.insert("delta_shift_nodes".to_string(), shift.to_string());
            let f = Source::Delta(delta).scaled(*amplitude).sample(padded)?;
            let terms = basis(&setup.kernel, &f, max_n)?;
            let back = |g: &GridFunction| g.shifted(shift, spec.t0, spec.len);
            let terms = terms.iter().map(back).collect::<Result<Vec<_>, _>>()?;
            (back(&r.solution())?, back(&f)?, terms)
        }
    };

    let len = reference.len().min(terms[0].len());
    if len < spec.len {
        metadata.insert("usable_horizon".to_string(), format_number(spec.time(len - 1)));
    }
    let reference = reference.truncated(len)?;
    let terms = terms.iter().map(|t| t.truncated(len)).collect::<Result<Vec<_>, _>>()?;

    let mut solutions = Vec::with_capacity(ns.len());
    let mut reports = Vec::with_capacity(ns.len());
    for &n in ns {
        let coeffs = if terms[..=n].iter().all(|t| t.max_abs() == 0.0) {
            zero_fit(n, &reference, setup.fit_window)
        } else {
            fit_basis(&terms[..=n], &reference, setup.fit_window)?
        };
        let w = combine(&terms[..=n], &coeffs.a)?;
        let report = er1_in_window(&w, &reference, setup.report_window)?
            .with_metadata("n", n.to_string())
            .with_metadata("source", setup.forcing.label())
            .with_metadata("model", setup.problem.description());
        reports.push(report);
        solutions.push(ShortTimeSolution { w, n, green_order: setup.kernel.order(), coefficients: coeffs });
    }
    Ok(ExperimentResult { reference, source: source.truncated(len)?, solutions, er1: reports, metadata })
}

/// A vanishing source leaves nothing to fit; the expansion is zero.
fn zero_fit(n: usize, reference: &GridFunction, window: (f64, f64)) -> ExpansionCoefficients {
    let idx = reference.spec().window_indices(window.0, window.1);
    let sq: f64 = reference.values()[idx].iter().map(|v| v * v).sum();
    ExpansionCoefficients { a: vec![0.0; n + 1], fit_window: window, fit_residual: (sq * reference.dt()).sqrt(), condition_number: f64::NAN }
}

/// Settings of the KdV, `f = exp` comparison across expansion orders.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Config {
    pub c: f64,
    pub c0: f64,
    pub dt: f64,
    pub horizon: f64,
    pub fit_window: (f64, f64),
    pub report_window: (f64, f64),
    pub ns: Vec<usize>,
}

impl Default for Table1Config {
    fn default() -> Self {
        Self {
            c: 1.0,
            c0: 0.0,
            dt: 1e-3,
            horizon: 1.1,
            fit_window: (0.0, 0.77),
            report_window: (0.0, 1.1),
            ns: vec![1, 2, 4],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    pub n: usize,
    pub max_er: f64,
    pub min_er: f64,
    pub fit_residual: f64,
}

#[derive(Debug, Clone)]
pub struct Table1 {
    pub rows: Vec<Table1Row>,
    pub result: ExperimentResult,
}

impl Table1 {
    /// Header `N,max_er1,min_er1`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "N,max_er1,min_er1")?;
        for r in &self.rows {
            writeln!(out, "{},{},{}", r.n, format_number(r.max_er), format_number(r.min_er))?;
        }
        Ok(())
    }
}

pub fn table1_setup(config: &Table1Config) -> Result<ExperimentSetup, AnalysisError> {
    let problem = kdv_reduced(config.c, config.c0)?;
    let kernel = wrap_closed_form(&ModelSpec::Kdv { c: config.c })?;
    Ok(ExperimentSetup {
        problem,
        kernel,
        forcing: Forcing::Smooth { label: "exp".into(), source: Source::function(f64::exp) },
        init: CauchyData::zeros(2),
        solver: IvpConfig { dt: config.dt, horizon: config.horizon, ..IvpConfig::default() },
        fit_window: config.fit_window,
        report_window: config.report_window,
    })
}

pub fn table1_experiment(config: &Table1Config) -> Result<Table1, AnalysisError> {
    let result = run_experiment(&table1_setup(config)?, &config.ns)?;
    let rows = result
        .er1
        .iter()
        .zip(&result.solutions)
        .map(|(r, s)| Table1Row { n: s.n, max_er: r.max_er, min_er: r.min_er, fit_residual: s.coefficients.fit_residual })
        .collect();
    Ok(Table1 { rows, result })
}
