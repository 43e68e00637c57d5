use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;

use nlgreen::analysis::{dominance_ratio, er2_in_window, run_experiment, ExperimentResult};
use nlgreen::config::{ExperimentConfig, ModelKind, SourceKind};
use nlgreen::grid::format_number;
use nlgreen::{weak_form_strength, GreenFunction, GridFunction, GridSpec, Problem, WeakFormConfig};

use crate::report::{OutputDir, Sidecar};

pub struct Run<'a> {
    pub config: ExperimentConfig,
    /// Directory relative table paths resolve against.
    pub base_dir: &'a Path,
    pub out: OutputDir,
    pub seedless: bool,
}

fn header(run: &Run, command: &str) -> Sidecar {
    let mut s = Sidecar::new();
    s.put("command", command).put("seedless", run.seedless);
    s
}

fn write_manifest(run: &Run) -> Result<()> {
    run.out.text("manifest.toml", &run.config.emit()?)
}

/// Max `|w⁽ⁿ⁾ + N(w, …, w⁽ⁿ⁻¹⁾) − offset|` over interior nodes, with the
/// highest derivative from central differences of the last state.
fn interior_residual(g: &GreenFunction, problem: &Problem, spec: GridSpec) -> Result<f64> {
    let states = g.sample_states(spec)?;
    let top = states.last().ok_or_else(|| anyhow!("kernel has no states"))?;
    let len = top.len();
    let dt = top.dt();
    let mut worst = 0.0_f64;
    for i in 2..len.saturating_sub(1) {
        let state: Vec<f64> = states.iter().map(|s| s.values()[i]).collect();
        let highest = (top.values()[i + 1] - top.values()[i - 1]) / (2.0 * dt);
        worst = worst.max(problem.residual(&state, highest).abs());
    }
    Ok(worst)
}

pub fn green(run: &Run) -> Result<()> {
    let cfg = &run.config;
    let problem = cfg.problem()?;
    let kernel = cfg.kernel()?;
    let spec = GridSpec::covering(0.0, cfg.grid.horizon, cfg.grid.dt)?;
    let states = kernel.sample_states(spec)?;
    let labels: Vec<String> = (0..states.len()).map(|k| if k == 0 { "G".to_string() } else { format!("G_d{k}") }).collect();
    let label_refs: Vec<&str> = labels.iter().map(String::as_str).collect();
    run.out.columns("kernel.csv", &label_refs, &states)?;

    let mut side = header(run, "green");
    side.put("problem", problem.description())
        .put("provenance", kernel.provenance())
        .put("order", kernel.order())
        .num("strength", kernel.strength())
        .num("right_limit_at_zero", kernel.right_limit_at_zero())
        .num("usable_horizon", states[0].spec().end())
        .num("interior_residual_fd", interior_residual(&kernel, &problem, states[0].spec())?)
        .extend_prefixed("kernel_", kernel.metadata());

    let horizon = WeakFormConfig::default().horizon.min(states[0].spec().end());
    let wf_cfg = WeakFormConfig { horizon, dt: cfg.grid.dt, ..WeakFormConfig::default() };
    match weak_form_strength(&kernel, &problem, problem.order() - 1, &wf_cfg) {
        Ok(report) => {
            for (q, c) in &report.coefficients {
                side.num(format!("weak_form_d{q}"), *c);
            }
            let measured = report.coefficient(kernel.order());
            side.num("weak_form_strength", measured)
                .num("weak_form_ratio_to_kernel_strength", measured / kernel.strength())
                .put("weak_form_condition", format!("{:.6e}", report.condition_number))
                .put("weak_form_relative_residual", format!("{:.6e}", report.relative_residual))
                .put("weak_form_test_functions", report.test_functions)
                .num("weak_form_horizon", horizon);
        }
        Err(e) => {
            side.put("weak_form_error", e);
        }
    }
    run.out.sidecar("kernel.txt", &side)?;
    write_manifest(run)
}

fn required_orders(cfg: &ExperimentConfig) -> Vec<usize> {
    let mut ns = cfg.expansion.orders();
    for [a, b] in &cfg.report.er2_pairs {
        ns.extend([*a, *b]);
    }
    ns.sort_unstable();
    ns.dedup();
    ns
}

fn experiment(run: &Run) -> Result<ExperimentResult> {
    let setup = run.config.setup(run.base_dir)?;
    Ok(run_experiment(&setup, &required_orders(&run.config))?)
}

fn write_fit_reports(run: &Run, result: &ExperimentResult, side: &mut Sidecar) -> Result<()> {
    let cfg = &run.config;
    let (fit_lo, fit_hi) = cfg.fit_window();
    let (rep_lo, rep_hi) = cfg.report_window();
    side.put("fit_window", format!("[{}, {}]", format_number(fit_lo), format_number(fit_hi)))
        .put("report_window", format!("[{}, {}]", format_number(rep_lo), format_number(rep_hi)))
        .extend_prefixed("", &result.metadata);
    for (sol, er) in result.solutions.iter().zip(&result.er1) {
        let n = sol.n;
        let c = &sol.coefficients;
        let a: Vec<String> = c.a.iter().map(|x| format_number(*x)).collect();
        side.put(format!("N{n}_coefficients"), format!("[{}]", a.join(", ")))
            .num(format!("N{n}_fit_residual"), c.fit_residual)
            .num(format!("N{n}_condition_number"), c.condition_number)
            .num(format!("N{n}_max_er1"), er.max_er)
            .num(format!("N{n}_min_er1"), er.min_er)
            .put(format!("N{n}_clamped_nodes"), er.clamped);
        run.out.curve(&format!("solution_N{n}.csv"), &format!("w_N{n}"), &sol.w)?;
        run.out.curve(&format!("er1_N{n}.csv"), &format!("er1_N{n}"), &er.er_grid)?;
    }
    for &[a, b] in &cfg.report.er2_pairs {
        let (wa, wb) = (solution(result, a)?, solution(result, b)?);
        let window = (rep_lo, rep_hi.min(wa.spec().end()));
        let er = er2_in_window(wa, wb, window)?;
        run.out.curve(&format!("er2_N{a}_N{b}.csv"), &format!("er2_N{a}_N{b}"), &er.er_grid)?;
        side.num(format!("er2_N{a}_N{b}_max"), er.max_er)
            .num(format!("er2_N{a}_N{b}_min"), er.min_er)
            .num(format!("dominance_N{a}_N{b}"), dominance_ratio(wa, wb, window)?);
    }
    Ok(())
}

fn solution(result: &ExperimentResult, n: usize) -> Result<&GridFunction> {
    result.solution(n).map(|s| &s.w).ok_or_else(|| anyhow!("order {n} was not computed"))
}

pub fn solve(run: &Run) -> Result<()> {
    let result = experiment(run)?;
    run.out.curve("reference.csv", "w_ref", &result.reference)?;
    run.out.curve("source.csv", "f", &result.source)?;
    let mut side = header(run, "solve");
    write_fit_reports(run, &result, &mut side)?;
    run.out.sidecar("fit.txt", &side)?;
    write_manifest(run)
}

/// Settings of the KdV, `f = exp` table used when no config is given.
pub fn table1_default_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.model.kind = ModelKind::Kdv;
    cfg.model.c = 1.0;
    cfg.source.kind = SourceKind::Exp;
    cfg.grid.horizon = 1.1;
    cfg.expansion.n_values = vec![1, 2, 4];
    cfg.expansion.fit_end = Some(0.77);
    cfg
}

pub fn table1(run: &Run) -> Result<()> {
    let result = experiment(run)?;
    let wanted = run.config.expansion.orders();
    let rows: Vec<Vec<String>> = result
        .solutions
        .iter()
        .zip(&result.er1)
        .filter(|(s, _)| wanted.contains(&s.n))
        .map(|(s, e)| vec![s.n.to_string(), format_number(e.max_er), format_number(e.min_er)])
        .collect();
    run.out.rows("table1.csv", &["N", "max_er1", "min_er1"], &rows)?;
    run.out.curve("reference.csv", "w_ref", &result.reference)?;
    let mut side = header(run, "table1");
    write_fit_reports(run, &result, &mut side)?;
    run.out.sidecar("table1.txt", &side)?;
    write_manifest(run)
}

/// Apply one sweep value to a copy of the config.
pub fn with_parameter(cfg: &ExperimentConfig, name: &str, value: f64) -> Result<ExperimentConfig> {
    let mut c = cfg.clone();
    let as_order = || -> Result<usize> {
        if value >= 0.0 && value.fract() == 0.0 {
            Ok(value as usize)
        } else {
            bail!("sweep value {value} is not an expansion order")
        }
    };
    match name {
        "c" => c.model.c = value,
        "c0" => c.model.c0 = value,
        "v" => c.model.v = value,
        "modulus" => c.model.modulus = value,
        "phi" => c.model.phi = value,
        "s" => c.model.s = value,
        "epsilon" => c.mollifier.epsilon = value,
        "dt" => c.grid.dt = value,
        "horizon" => c.grid.horizon = value,
        "n" => {
            c.expansion.n = as_order()?;
            c.expansion.n_values.clear();
        }
        other => bail!("unknown sweep parameter `{other}` (c, c0, v, modulus, phi, s, epsilon, dt, horizon, n)"),
    }
    c.validate()?;
    Ok(c)
}

pub fn sweep(run: &Run) -> Result<()> {
    let cfg = &run.config;
    let name = cfg.sweep.parameter.as_deref().context("sweep.parameter is not set")?;
    if cfg.sweep.values.is_empty() {
        bail!("sweep.values is empty");
    }
    let outcomes: Vec<(f64, Result<ExperimentResult>)> = cfg
        .sweep
        .values
        .par_iter()
        .map(|&value| {
            let outcome = with_parameter(cfg, name, value).and_then(|c| {
                let setup = c.setup(run.base_dir)?;
                Ok(run_experiment(&setup, &c.expansion.orders())?)
            });
            (value, outcome)
        })
        .collect();

    let mut side = header(run, "sweep");
    side.put("parameter", name);
    let mut rows = Vec::new();
    for (value, outcome) in &outcomes {
        match outcome {
            Ok(result) => {
                for (s, e) in result.solutions.iter().zip(&result.er1) {
                    rows.push(vec![
                        format_number(*value),
                        s.n.to_string(),
                        format_number(e.max_er),
                        format_number(e.min_er),
                        format_number(s.coefficients.fit_residual),
                        format_number(result.reference.spec().end()),
                    ]);
                }
            }
            Err(e) => {
                side.put(format!("failed_{}", format_number(*value)), e);
            }
        }
    }
    side.put("runs", outcomes.len()).put("failures", outcomes.iter().filter(|(_, o)| o.is_err()).count());
    run.out.rows("sweep.csv", &[name, "N", "max_er1", "min_er1", "fit_residual", "usable_horizon"], &rows)?;
    run.out.sidecar("sweep.txt", &side)?;
    write_manifest(run)
}
