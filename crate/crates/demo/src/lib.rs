//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Each export returns a flat `Float64Array`; layouts are given per function.

use nlgreen::analysis::{run_experiment, ExperimentSetup, Forcing};
use nlgreen::greens::ClosedForm;
use nlgreen::ivp::Source;
use nlgreen::models::{kdv_reduced, traveling_wave_map, CnoidalWave, KdvSoliton, ModelSpec, SnoidalWave};
use nlgreen::{wrap_closed_form, CauchyData, GridSpec, IvpConfig};
use wasm_bindgen::prelude::*;

const MAX_SAMPLES: usize = 200_000;

fn closed_form(model: &str, a: f64, b: f64) -> Result<Box<dyn ClosedForm>, String> {
    let err = |e: &dyn std::fmt::Display| e.to_string();
    Ok(match model {
        "kdv" => Box::new(KdvSoliton::new(a).map_err(|e| err(&e))?),
        "snoidal" => Box::new(SnoidalWave::new(a, b, 0.0).map_err(|e| err(&e))?),
        "cnoidal" => Box::new(CnoidalWave::new(a, b, 0.0).map_err(|e| err(&e))?),
        other => return Err(format!("unknown model `{other}` (kdv, snoidal, cnoidal)")),
    })
}

fn grid(horizon: f64, dt: f64) -> Result<GridSpec, String> {
    let spec = GridSpec::covering(0.0, horizon, dt).map_err(|e| e.to_string())?;
    if spec.len > MAX_SAMPLES {
        return Err(format!("{} samples exceed the limit of {MAX_SAMPLES}", spec.len));
    }
    Ok(spec)
}

/// Kernel values `G(i·dt)`, `i = 0..`, with `G(0)` the right limit.
/// `kdv`: `a = c`. `snoidal`/`cnoidal`: `a = v`, `b = k`.
pub fn kernel_samples(model: &str, a: f64, b: f64, horizon: f64, dt: f64) -> Result<Vec<f64>, String> {
    let form = closed_form(model, a, b)?;
    Ok(grid(horizon, dt)?.times().map(|t| form.value(t)).collect())
}

/// KdV with speed `c` forced by `source`: reference solution followed by
/// the order-`n` expansion, each `len` long (`[ref…, w…]`).
pub fn kdv_expansion(c: f64, source: &str, n: usize, horizon: f64) -> Result<Vec<f64>, String> {
    let f: fn(f64) -> f64 = match source {
        "exp" => f64::exp,
        "sin" => f64::sin,
        "linear" => |t| t,
        "log1p" => f64::ln_1p,
        other => return Err(format!("unknown source `{other}` (exp, sin, linear, log1p)")),
    };
    let dt = 1e-3;
    grid(horizon, dt)?;
    let setup = ExperimentSetup {
        problem: kdv_reduced(c, 0.0).map_err(|e| e.to_string())?,
        kernel: wrap_closed_form(&ModelSpec::Kdv { c }).map_err(|e| e.to_string())?,
        forcing: Forcing::Smooth { label: source.to_string(), source: Source::function(f) },
        init: CauchyData::zeros(2),
        solver: IvpConfig { horizon, dt, ..IvpConfig::default() },
        fit_window: (0.0, horizon),
        report_window: (0.0, horizon),
    };
    let result = run_experiment(&setup, &[n]).map_err(|e| e.to_string())?;
    let w = &result.solutions[0].w;
    let mut out = result.reference.values().to_vec();
    out.extend_from_slice(&w.values()[..result.reference.len()]);
    Ok(out)
}

/// Soliton field `w̃(x, t) = G(x − c t − shift)` on an `nx × nt` grid,
/// row-major in `t`.
pub fn soliton_field(c: f64, x_min: f64, x_max: f64, nx: usize, t_max: f64, nt: usize) -> Result<Vec<f64>, String> {
    if nx < 2 || nt < 2 || nx * nt > MAX_SAMPLES {
        return Err(format!("grid {nx} x {nt} must have both sides >= 2 and at most {MAX_SAMPLES} points"));
    }
    let form = KdvSoliton::new(c).map_err(|e| e.to_string())?;
    let shift = 0.5 * (x_min + x_max) - 0.5 * c * t_max;
    let mut out = Vec::with_capacity(nx * nt);
    for j in 0..nt {
        let t = t_max * j as f64 / (nt - 1) as f64;
        for i in 0..nx {
            let x = x_min + (x_max - x_min) * i as f64 / (nx - 1) as f64;
            out.push(form.value(traveling_wave_map(x, t, c, shift)));
        }
    }
    Ok(out)
}

#[wasm_bindgen(js_name = kernelSamples)]
pub fn kernel_samples_js(model: &str, a: f64, b: f64, horizon: f64, dt: f64) -> Result<Vec<f64>, JsError> {
    kernel_samples(model, a, b, horizon, dt).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = kdvExpansion)]
pub fn kdv_expansion_js(c: f64, source: &str, n: usize, horizon: f64) -> Result<Vec<f64>, JsError> {
    kdv_expansion(c, source, n, horizon).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = solitonField)]
pub fn soliton_field_js(c: f64, x_min: f64, x_max: f64, nx: usize, t_max: f64, nt: usize) -> Result<Vec<f64>, JsError> {
    soliton_field(c, x_min, x_max, nx, t_max, nt).map_err(|e| JsError::new(&e))
}
