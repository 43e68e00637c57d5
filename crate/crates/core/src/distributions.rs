//! Gaussian approximations of `δ⁽q⁾` and weak-form measurement of the
//! distributional source a kernel produces at the origin.
//!
//! For a kernel `G = θ·u` of an order-`n` equation, `L[G] = G⁽ⁿ⁾ + N(G, …)`
//! is a finite sum `Σ c_q δ⁽q⁾`. Pairing with a smooth test function `ψ`
//! and moving the derivatives onto `ψ` gives
//!
//! ```text
//! (−1)ⁿ ∫₀^H G ψ⁽ⁿ⁾ dt + ∫₀^H N(G, …, G⁽ⁿ⁻¹⁾) ψ dt = Σ c_q (−1)^q ψ⁽q⁾(0)
//! ```
//!
//! With `ψ_{j,σ}(t) = tʲ exp(−t²/2σ²)` over several `j` and `σ` this is an
//! overdetermined linear system for the `c_q`, solved by SVD.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::greens::{GreenError, GreenFunction};
use crate::grid::{GridError, GridFunction, GridSpec};
use crate::models::Problem;

const MAX_DELTA_ORDER: usize = 3;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Error)]
pub enum DistributionError {
    #[error("mollifier width {epsilon} is below 4·dt = {limit}")]
    Unresolved { epsilon: f64, limit: f64 },
    #[error("mollifier center {center} must be at least 3·epsilon = {limit} inside the grid")]
    CenterTooClose { center: f64, limit: f64 },
    #[error("delta derivative order {0} exceeds 3")]
    OrderTooHigh(usize),
    #[error("mollifier width must be positive, got {0}")]
    BadWidth(f64),
    #[error("test-function system is ill conditioned (condition number {0:.3e})")]
    IllConditioned(f64),
    #[error("problem order {problem} does not match kernel state count {kernel}")]
    OrderMismatch { problem: usize, kernel: usize },
    #[error("kernel: {0}")]
    Kernel(#[from] Box<GreenError>),
    #[error("grid: {0}")]
    Grid(#[from] GridError),
}

/// Probabilists' Hermite polynomial `He_q(x)`.
pub fn hermite_he(q: usize, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, x);
    if q == 0 {
        return prev;
    }
    for k in 1..q {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `q`-th derivative of the unit-mass Gaussian of standard width `epsilon`
/// centred at `center`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollifiedDelta {
    pub epsilon: f64,
    pub order: usize,
    pub center: f64,
}

impl MollifiedDelta {
    /// Default placement: eight widths from the origin, where the
    /// truncated Gaussian tail is below `1e-14`.
    pub const DEFAULT_CENTER_WIDTHS: f64 = 8.0;

    pub fn new(epsilon: f64, order: usize, center: f64) -> Result<Self, DistributionError> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(DistributionError::BadWidth(epsilon));
        }
        if order > MAX_DELTA_ORDER {
            return Err(DistributionError::OrderTooHigh(order));
        }
        Ok(Self { epsilon, order, center })
    }

    pub fn centered_default(epsilon: f64, order: usize) -> Result<Self, DistributionError> {
        Self::new(epsilon, order, Self::DEFAULT_CENTER_WIDTHS * epsilon)
    }

    /// Move the center onto the nearest node of `spec`.
    pub fn snapped(self, spec: GridSpec) -> Self {
        let i = ((self.center - spec.t0) / spec.dt).round().max(0.0);
        Self { center: spec.t0 + i * spec.dt, ..self }
    }

    /// Index of the center on `spec`, if it sits on a node.
    pub fn center_index(&self, spec: GridSpec) -> Option<usize> {
        let x = (self.center - spec.t0) / spec.dt;
        let i = x.round();
        ((x - i).abs() < 1e-9 && i >= 0.0).then_some(i as usize)
    }

    pub fn value(&self, t: f64) -> f64 {
        let x = (t - self.center) / self.epsilon;
        let sign = if self.order % 2 == 0 { 1.0 } else { -1.0 };
        sign * hermite_he(self.order, x) * INV_SQRT_2PI * (-0.5 * x * x).exp()
            / self.epsilon.powi(self.order as i32 + 1)
    }

    pub fn check_resolvable(&self, spec: GridSpec) -> Result<(), DistributionError> {
        if self.epsilon < 4.0 * spec.dt * (1.0 - 1e-12) {
            return Err(DistributionError::Unresolved { epsilon: self.epsilon, limit: 4.0 * spec.dt });
        }
        let limit = 3.0 * self.epsilon;
        if self.center - spec.t0 < limit * (1.0 - 1e-12) || spec.end() - self.center < limit * (1.0 - 1e-12) {
            return Err(DistributionError::CenterTooClose { center: self.center, limit });
        }
        Ok(())
    }
}

pub fn sample_mollified_delta(d: &MollifiedDelta, spec: GridSpec) -> Result<GridFunction, DistributionError> {
    d.check_resolvable(spec)?;
    Ok(GridFunction::sample(spec, |t| d.value(t))?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeakFormConfig {
    pub dt: f64,
    /// Integration range `[0, horizon]`; test functions decay well inside it.
    pub horizon: f64,
    /// Gaussian widths as fractions of the horizon.
    pub width_fractions: Vec<f64>,
    /// Extra monomial powers beyond the unknown orders.
    pub extra_powers: usize,
    pub max_condition: f64,
}

impl Default for WeakFormConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            horizon: 2.0,
            width_fractions: vec![1.0 / 8.0, 1.0 / 10.0, 1.0 / 12.0, 1.0 / 16.0],
            extra_powers: 1,
            max_condition: 1e8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeakFormReport {
    /// `(q, c_q)` for `q = 0..=max_order`.
    pub coefficients: Vec<(usize, f64)>,
    /// Condition number of the column-normalized test-function matrix.
    pub condition_number: f64,
    /// Least-squares residual relative to the right-hand side norm.
    pub relative_residual: f64,
    pub test_functions: usize,
}

impl WeakFormReport {
    pub fn coefficient(&self, q: usize) -> f64 {
        self.coefficients.iter().find(|(o, _)| *o == q).map_or(0.0, |(_, c)| *c)
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn falling(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64)
}

/// `ψ(t) = tʲ exp(−t²/2σ²)`.
#[derive(Debug, Clone, Copy)]
struct TestFunction {
    power: usize,
    sigma: f64,
}

impl TestFunction {
    fn gaussian_derivative(&self, k: usize, t: f64) -> f64 {
        let x = t / self.sigma;
        (-1.0 / self.sigma).powi(k as i32) * hermite_he(k, x) * (-0.5 * x * x).exp()
    }

    /// `ψ⁽ᵈ⁾(t)` by Leibniz.
    fn derivative(&self, d: usize, t: f64) -> f64 {
        let j = self.power;
        (0..=d.min(j))
            .map(|i| {
                binomial(d, i) * falling(j, i) * t.powi((j - i) as i32) * self.gaussian_derivative(d - i, t)
            })
            .sum()
    }

    /// `ψ⁽q⁾(0)`.
    fn derivative_at_zero(&self, q: usize) -> f64 {
        if q < self.power {
            return 0.0;
        }
        falling(q, self.power) * self.gaussian_derivative(q - self.power, 0.0)
    }
}

/// Measure `c_q` in `L[G] = Σ_{q ≤ max_order} c_q δ⁽q⁾` for `L` the
/// problem's homogeneous operator.
pub fn weak_form_strength(
    g: &GreenFunction,
    problem: &Problem,
    max_order: usize,
    config: &WeakFormConfig,
) -> Result<WeakFormReport, DistributionError> {
    let n = problem.order();
    let spec = GridSpec::covering(0.0, config.horizon, config.dt)?;
    let states = g.sample_states(spec).map_err(|e| DistributionError::Kernel(Box::new(e)))?;
    if states.len() != n {
        return Err(DistributionError::OrderMismatch { problem: n, kernel: states.len() });
    }
    let spec = states[0].spec();
    let nonlinear: Vec<f64> = (0..spec.len)
        .map(|i| {
            let state: Vec<f64> = states.iter().map(|s| s.values()[i]).collect();
            problem.nonlinearity().eval(&state)
        })
        .collect();

    let mut tests = Vec::new();
    for &frac in &config.width_fractions {
        for power in 0..=max_order + config.extra_powers {
            tests.push(TestFunction { power, sigma: frac * spec.end() });
        }
    }
    let sign_n = if n % 2 == 0 { 1.0 } else { -1.0 };
    let dt = spec.dt;
    let weight = |i: usize| if i == 0 || i + 1 == spec.len { 0.5 * dt } else { dt };

    let rows = tests.len();
    let cols = max_order + 1;
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut b = DVector::<f64>::zeros(rows);
    for (r, psi) in tests.iter().enumerate() {
        let mut lhs = 0.0;
        for (i, (&g, &nl)) in states[0].values().iter().zip(&nonlinear).enumerate() {
            let t = spec.time(i);
            lhs += weight(i) * (sign_n * g * psi.derivative(n, t) + nl * psi.derivative(0, t));
        }
        b[r] = lhs;
        for q in 0..cols {
            let sign_q = if q % 2 == 0 { 1.0 } else { -1.0 };
            a[(r, q)] = sign_q * psi.derivative_at_zero(q);
        }
    }

    let scales: Vec<f64> = (0..cols).map(|q| a.column(q).norm().max(f64::MIN_POSITIVE)).collect();
    let mut scaled = a;
    for (q, s) in scales.iter().enumerate() {
        scaled.column_mut(q).scale_mut(1.0 / s);
    }
    let svd = scaled.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition_number = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition_number <= config.max_condition) {
        return Err(DistributionError::IllConditioned(condition_number));
    }
    let y = svd.solve(&b, 0.0).expect("u and v computed");
    let coefficients: Vec<(usize, f64)> = (0..cols).map(|q| (q, y[q] / scales[q])).collect();
    let fitted = &scaled * &y;
    let relative_residual = (fitted - &b).norm() / b.norm().max(f64::MIN_POSITIVE);
    Ok(WeakFormReport { coefficients, condition_number, relative_residual, test_functions: rows })
}
