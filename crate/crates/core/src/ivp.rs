//! Reference initial-value solver for `w⁽ⁿ⁾ + N(w, …, w⁽ⁿ⁻¹⁾) = f(t) + c₀`.
//!
//! The equation is reduced to the companion system on the state
//! `(w, w′, …, w⁽ⁿ⁻¹⁾)` and integrated either with classic fixed-step RK4 or
//! with the embedded Dormand–Prince 5(4) pair. Adaptive steps are clipped so
//! that every node of the output grid is hit exactly.
//!
//! Quadratic nonlinearities can blow up in finite time. When the state leaves
//! the finite range the trajectory is truncated at the last good node and the
//! usable horizon is reported instead of failing the run.
//!
//! [`integrate_extended`] is a generic Gragg–Bulirsch–Stoer integrator for
//! number types wider than `f64`, used where truncation errors far below
//! double precision must be resolved.

use std::fmt::Debug;
use std::sync::Arc;

use num_traits::{FromPrimitive, Num, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distributions::MollifiedDelta;
use crate::grid::{format_number, GridError, GridFunction, GridSpec};
use crate::models::Problem;

/// Number types the generic routines run on (`f64`, double-double, …).
pub trait Scalar: Copy + Num + FromPrimitive + ToPrimitive + PartialOrd + Debug {}

impl<T: Copy + Num + FromPrimitive + ToPrimitive + PartialOrd + Debug> Scalar for T {}

#[derive(Debug, Error)]
pub enum IvpError {
    #[error("invalid solver configuration: {0}")]
    BadConfig(String),
    #[error("Cauchy data has {got} values, problem order is {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite Cauchy data at index {0}")]
    NonFiniteData(usize),
    #[error("solution left the finite range before the second grid node (t = {t})")]
    BlowUp { t: f64 },
    #[error("grid: {0}")]
    Grid(#[from] GridError),
}

/// Values of `w, w′, …, w⁽ⁿ⁻¹⁾` at the initial time.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyData(Vec<f64>);

impl CauchyData {
    pub fn new(values: Vec<f64>) -> Result<Self, IvpError> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(IvpError::NonFiniteData(i));
        }
        Ok(Self(values))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    /// `(0, …, 0, s)`: the data whose solution, cut off by `θ`, answers to `s·δ`.
    pub fn impulse(n: usize, s: f64) -> Self {
        let mut v = vec![0.0; n];
        if let Some(last) = v.last_mut() {
            *last = s;
        }
        Self(v)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    #[default]
    Rk4,
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IvpConfig {
    pub t0: f64,
    pub horizon: f64,
    pub dt: f64,
    pub method: Method,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// States with any component above this magnitude count as blown up.
    pub blowup_threshold: f64,
}

impl Default for IvpConfig {
    fn default() -> Self {
        Self {
            t0: 0.0,
            horizon: 5.0,
            dt: 1e-3,
            method: Method::Rk4,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            blowup_threshold: 1e8,
        }
    }
}

impl IvpConfig {
    pub fn validate(&self) -> Result<(), IvpError> {
        let bad = |m: &str| Err(IvpError::BadConfig(m.to_string()));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if !(self.horizon.is_finite() && self.horizon > self.t0) {
            return bad("horizon must exceed t0");
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if !(self.blowup_threshold > 0.0) {
            return bad("blow-up threshold must be positive");
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec, IvpError> {
        Ok(GridSpec::covering(self.t0, self.horizon, self.dt)?)
    }

    /// Stable textual description of every field.
    pub fn fingerprint(&self) -> String {
        format!(
            "method={:?};t0={};horizon={};dt={};abs_tol={};rel_tol={};blowup={}",
            self.method,
            format_number(self.t0),
            format_number(self.horizon),
            format_number(self.dt),
            format_number(self.abs_tol),
            format_number(self.rel_tol),
            format_number(self.blowup_threshold)
        )
    }
}

pub trait FirstOrderSystem: Sync {
    fn dim(&self) -> usize;
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);
}

/// Forcing term `f(t)`.
#[derive(Clone, Default)]
pub enum Source {
    #[default]
    Zero,
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    /// Linear interpolation of samples, held constant outside their range.
    Grid(GridFunction),
    Delta(MollifiedDelta),
    /// `a·f(t)`.
    Scaled(f64, Box<Source>),
}

impl Debug for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Source::Zero => write!(f, "Zero"),
            Source::Function(_) => write!(f, "Function(..)"),
            Source::Grid(g) => write!(f, "Grid(t0={}, dt={}, n={})", g.t0(), g.dt(), g.len()),
            Source::Delta(d) => write!(f, "Delta({d:?})"),
            Source::Scaled(a, inner) => write!(f, "Scaled({a:?}, {inner:?})"),
        }
    }
}

impl Source {
    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Source::Function(Arc::new(f))
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            Source::Zero => 0.0,
            Source::Function(f) => f(t),
            Source::Grid(g) => g.interpolate(t.clamp(g.t0(), g.end())).unwrap_or(0.0),
            Source::Delta(d) => d.value(t),
            Source::Scaled(a, inner) => a * inner.value(t),
        }
    }

    /// `a·self`; the identity for `a = 1`.
    pub fn scaled(self, a: f64) -> Self {
        if a == 1.0 {
            self
        } else {
            Source::Scaled(a, Box::new(self))
        }
    }

    pub fn sample(&self, spec: GridSpec) -> Result<GridFunction, GridError> {
        GridFunction::sample(spec, |t| self.value(t))
    }
}

/// Companion first-order form of a [`Problem`] with a forcing term.
#[derive(Debug, Clone)]
pub struct CompanionSystem<'a> {
    problem: &'a Problem,
    source: Source,
}

pub fn reduce_to_first_order(problem: &Problem, source: Source) -> CompanionSystem<'_> {
    CompanionSystem { problem, source }
}

impl CompanionSystem<'_> {
    pub fn problem(&self) -> &Problem {
        self.problem
    }

    pub fn source(&self) -> &Source {
        &self.source
    }
}

impl FirstOrderSystem for CompanionSystem<'_> {
    fn dim(&self) -> usize {
        self.problem.order()
    }

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) {
        let n = y.len();
        dy[..n - 1].copy_from_slice(&y[1..]);
        dy[n - 1] = self.source.value(t) + self.problem.offset() - self.problem.nonlinearity().eval(y);
    }
}

/// Sampled solution of an initial-value problem, one series per state
/// component.
#[derive(Debug, Clone)]
pub struct Trajectory {
    spec: GridSpec,
    components: Vec<Vec<f64>>,
    requested_horizon: f64,
    truncated_at: Option<f64>,
    rhs_evaluations: usize,
}

impl Trajectory {
    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn solution(&self) -> GridFunction {
        self.component(0)
    }

    pub fn component(&self, i: usize) -> GridFunction {
        GridFunction::from_spec(self.spec, self.components[i].clone()).expect("finite trajectory")
    }

    pub fn components(&self) -> Vec<GridFunction> {
        (0..self.components.len()).map(|i| self.component(i)).collect()
    }

    pub fn state(&self, i: usize) -> Vec<f64> {
        self.components.iter().map(|c| c[i]).collect()
    }

    pub fn usable_horizon(&self) -> f64 {
        self.spec.end()
    }

    pub fn requested_horizon(&self) -> f64 {
        self.requested_horizon
    }

    /// Time of the first node at which the solution was no longer finite.
    pub fn truncated_at(&self) -> Option<f64> {
        self.truncated_at
    }

    pub fn rhs_evaluations(&self) -> usize {
        self.rhs_evaluations
    }
}

fn rk4_step<S: FirstOrderSystem + ?Sized>(sys: &S, t: f64, y: &[f64], h: f64, out: &mut [f64]) {
    let n = y.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    sys.rhs(t, y, &mut k1);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    sys.rhs(t + 0.5 * h, &tmp, &mut k2);
    for i in 0..n {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    sys.rhs(t + 0.5 * h, &tmp, &mut k3);
    for i in 0..n {
        tmp[i] = y[i] + h * k3[i];
    }
    sys.rhs(t + h, &tmp, &mut k4);
    for i in 0..n {
        out[i] = y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince attempt. Returns the weighted error norm.
fn dopri_step<S: FirstOrderSystem + ?Sized>(
    sys: &S,
    t: f64,
    y: &[f64],
    h: f64,
    cfg: &IvpConfig,
    out: &mut [f64],
) -> f64 {
    let n = y.len();
    let mut k = vec![vec![0.0; n]; 7];
    let mut tmp = vec![0.0; n];
    for s in 0..7 {
        for i in 0..n {
            let mut acc = y[i];
            for (j, kj) in k.iter().enumerate().take(s) {
                acc += h * A[s][j] * kj[i];
            }
            tmp[i] = acc;
        }
        sys.rhs(t + C[s] * h, &tmp, &mut k[s]);
    }
    let mut err = 0.0_f64;
    for i in 0..n {
        let mut hi = y[i];
        let mut lo = y[i];
        for s in 0..7 {
            hi += h * B5[s] * k[s][i];
            lo += h * B4[s] * k[s][i];
        }
        out[i] = hi;
        let scale = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(hi.abs());
        err = err.max(((hi - lo) / scale).abs());
    }
    if err.is_nan() {
        f64::INFINITY
    } else {
        err
    }
}

fn out_of_range(y: &[f64], threshold: f64) -> bool {
    y.iter().any(|v| !v.is_finite() || v.abs() > threshold)
}

/// Integrate `system` from `init` over the configured grid.
pub fn integrate<S: FirstOrderSystem + ?Sized>(
    system: &S,
    init: &CauchyData,
    config: &IvpConfig,
) -> Result<Trajectory, IvpError> {
    config.validate()?;
    let n = system.dim();
    if init.len() != n {
        return Err(IvpError::DimensionMismatch { expected: n, got: init.len() });
    }
    let spec = config.grid()?;
    let mut components: Vec<Vec<f64>> = (0..n).map(|_| Vec::with_capacity(spec.len)).collect();
    let mut y = init.values().to_vec();
    for (c, v) in components.iter_mut().zip(&y) {
        c.push(*v);
    }
    let mut next = vec![0.0; n];
    let mut truncated_at = None;
    let mut evaluations = 0usize;
    let mut h_adaptive = config.dt;

    'nodes: for i in 1..spec.len {
        let ta = spec.time(i - 1);
        let tb = spec.time(i);
        match config.method {
            Method::Rk4 => {
                rk4_step(system, ta, &y, tb - ta, &mut next);
                evaluations += 4;
                std::mem::swap(&mut y, &mut next);
            }
            Method::Adaptive => {
                let mut t = ta;
                let h_min = 1e-14 * tb.abs().max(1.0);
                while t < tb {
                    let remaining = tb - t;
                    let h = h_adaptive.min(remaining);
                    let err = dopri_step(system, t, &y, h, config, &mut next);
                    evaluations += 7;
                    if err <= 1.0 {
                        t = if h == remaining { tb } else { t + h };
                        std::mem::swap(&mut y, &mut next);
                        let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                        if h == h_adaptive || grow < 1.0 {
                            h_adaptive = h * grow;
                        }
                    } else {
                        h_adaptive = h * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                        if h_adaptive < h_min {
                            truncated_at = Some(t);
                            break 'nodes;
                        }
                    }
                }
            }
        }
        if out_of_range(&y, config.blowup_threshold) {
            truncated_at = Some(tb);
            break;
        }
        for (c, v) in components.iter_mut().zip(&y) {
            c.push(*v);
        }
    }

    let kept = components[0].len();
    if kept < 2 {
        return Err(IvpError::BlowUp { t: truncated_at.unwrap_or(spec.t0) });
    }
    Ok(Trajectory {
        spec: spec.truncated(kept)?,
        components,
        requested_horizon: config.horizon,
        truncated_at,
        rhs_evaluations: evaluations,
    })
}

/// Fixed-step RK4 from `(t0, y0)` to `t1` in `steps` equal steps; `t1 < t0`
/// integrates backwards.
pub fn propagate<S: FirstOrderSystem + ?Sized>(system: &S, t0: f64, y0: &[f64], t1: f64, steps: usize) -> Vec<f64> {
    let h = (t1 - t0) / steps.max(1) as f64;
    let mut y = y0.to_vec();
    let mut next = vec![0.0; y.len()];
    for i in 0..steps.max(1) {
        rk4_step(system, t0 + i as f64 * h, &y, h, &mut next);
        std::mem::swap(&mut y, &mut next);
    }
    y
}

/// The baseline every expansion is compared against.
#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub trajectory: Trajectory,
    /// Solver configuration and source label, for output metadata.
    pub fingerprint: String,
}

impl ReferenceSolution {
    pub fn solution(&self) -> GridFunction {
        self.trajectory.solution()
    }
}

pub fn solve_reference(
    problem: &Problem,
    source: Source,
    init: &CauchyData,
    config: &IvpConfig,
) -> Result<ReferenceSolution, IvpError> {
    let label = format!("{source:?}");
    let system = reduce_to_first_order(problem, source);
    let trajectory = integrate(&system, init, config)?;
    let fingerprint = format!(
        "{};problem={};source={};data={:?}",
        config.fingerprint(),
        problem.description(),
        label,
        init.values()
    );
    Ok(ReferenceSolution { trajectory, fingerprint })
}

/// Modified midpoint rule over `[t, t + big_h]` with `substeps` steps.
fn modified_midpoint<T: Scalar>(
    rhs: &impl Fn(T, &[T], &mut [T]),
    t: T,
    y: &[T],
    big_h: T,
    substeps: usize,
) -> Vec<T> {
    let n = y.len();
    let h = big_h / T::from_usize(substeps).expect("small integer");
    let two = T::from_f64(2.0).expect("2");
    let half = T::from_f64(0.5).expect("0.5");
    let mut f = vec![T::zero(); n];
    rhs(t, y, &mut f);
    let mut prev = y.to_vec();
    let mut cur: Vec<T> = y.iter().zip(&f).map(|(&a, &b)| a + h * b).collect();
    for m in 1..substeps {
        rhs(t + T::from_usize(m).expect("small integer") * h, &cur, &mut f);
        let nxt: Vec<T> = prev.iter().zip(&f).map(|(&p, &d)| p + two * h * d).collect();
        prev = std::mem::replace(&mut cur, nxt);
    }
    rhs(t + big_h, &cur, &mut f);
    cur.iter()
        .zip(&prev)
        .zip(&f)
        .map(|((&c, &p), &d)| half * (c + p + h * d))
        .collect()
}

/// One extrapolated macro step: midpoint with `2, 4, …, 2·levels` substeps,
/// Aitken–Neville extrapolation in `h²`.
fn gbs_step<T: Scalar>(rhs: &impl Fn(T, &[T], &mut [T]), t: T, y: &[T], big_h: T, levels: usize) -> Vec<T> {
    let counts: Vec<usize> = (1..=levels).map(|j| 2 * j).collect();
    let mut prev_row: Vec<Vec<T>> = Vec::new();
    for j in 0..levels {
        let mut row = vec![modified_midpoint(rhs, t, y, big_h, counts[j])];
        for k in 1..=j {
            // (n_j/n_{j-k})² − 1 kept as an exact integer ratio.
            let (nj, nk) = (counts[j] * counts[j], counts[j - k] * counts[j - k]);
            let num = T::from_usize(nk).expect("small integer");
            let denom = T::from_usize(nj - nk).expect("small integer");
            let refined: Vec<T> = row[k - 1]
                .iter()
                .zip(&prev_row[k - 1])
                .map(|(&a, &b)| a + (a - b) * num / denom)
                .collect();
            row.push(refined);
        }
        prev_row = row;
    }
    prev_row.pop().expect("levels >= 1")
}

/// Integrate `y′ = rhs(t, y)` from `(t0, y0)` through the increasing
/// `targets`, returning the state at each. Macro steps are at most
/// `max_step`; each is extrapolated over `levels` midpoint refinements.
pub fn integrate_extended<T: Scalar>(
    rhs: impl Fn(T, &[T], &mut [T]),
    t0: T,
    y0: &[T],
    targets: &[T],
    max_step: f64,
    levels: usize,
) -> Vec<Vec<T>> {
    assert!(levels >= 1 && max_step > 0.0);
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut out = Vec::with_capacity(targets.len());
    for &target in targets {
        let span = (target - t).to_f64().expect("finite span");
        let steps = (span.abs() / max_step).ceil().max(1.0) as usize;
        let h = (target - t) / T::from_usize(steps).expect("small integer");
        for i in 0..steps {
            let ti = t + T::from_usize(i).expect("small integer") * h;
            y = gbs_step(&rhs, ti, &y, h, levels);
        }
        t = target;
        out.push(y.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::ClosedForm;
    use crate::models::{kdv_reduced, linear, KdvSoliton};

    struct Oscillator;

    impl FirstOrderSystem for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[1];
            dy[1] = -y[0];
        }
    }

    fn cfg(dt: f64, horizon: f64, method: Method) -> IvpConfig {
        IvpConfig { dt, horizon, method, ..IvpConfig::default() }
    }

    fn sine_error(dt: f64, method: Method) -> f64 {
        let traj = integrate(&Oscillator, &CauchyData::new(vec![0.0, 1.0]).unwrap(), &cfg(dt, 10.0, method)).unwrap();
        traj.solution().iter().fold(0.0_f64, |m, (t, v)| m.max((v - t.sin()).abs()))
    }

    #[test]
    fn harmonic_oscillator_fixed_step() {
        assert!(sine_error(1e-3, Method::Rk4) < 1e-8);
    }

    #[test]
    fn harmonic_oscillator_adaptive() {
        assert!(sine_error(1e-2, Method::Adaptive) < 1e-8);
    }

    #[test]
    fn rk4_observed_order() {
        let order = (sine_error(0.1, Method::Rk4) / sine_error(0.05, Method::Rk4)).log2();
        assert!(order >= 3.8, "observed order {order}");
    }

    #[test]
    fn time_reversal_returns_initial_state() {
        let forward = propagate(&Oscillator, 0.0, &[0.3, -0.7], 10.0, 10_000);
        let back = propagate(&Oscillator, 10.0, &forward, 0.0, 10_000);
        assert!((back[0] - 0.3).abs() < 1e-6 && (back[1] + 0.7).abs() < 1e-6);
    }

    #[test]
    fn companion_reduction_of_linear_problem() {
        let p = linear(vec![1.0, 0.0]);
        let sys = reduce_to_first_order(&p, Source::function(|t| t));
        let mut dy = [0.0; 2];
        sys.rhs(2.0, &[0.5, -1.5], &mut dy);
        assert_eq!(dy, [-1.5, 2.0 - 0.5]);
    }

    #[test]
    fn kdv_companion_right_hand_side() {
        let p = kdv_reduced(2.0, 0.25).unwrap();
        let sys = reduce_to_first_order(&p, Source::function(|_| 1.0));
        let mut dy = [0.0; 2];
        sys.rhs(0.0, &[0.5, 0.1], &mut dy);
        assert!((dy[1] - (1.0 + 3.0 * 0.25 + 2.0 * 0.5 + 0.25)).abs() < 1e-15);
    }

    #[test]
    fn kdv_homogeneous_soliton() {
        let p = kdv_reduced(1.0, 0.0).unwrap();
        let sol = KdvSoliton::new(1.0).unwrap();
        let data = CauchyData::new(vec![-0.5, 0.0]).unwrap();
        for method in [Method::Rk4, Method::Adaptive] {
            let r = solve_reference(&p, Source::Zero, &data, &cfg(1e-3, 5.0, method)).unwrap();
            let err = r.solution().iter().fold(0.0_f64, |m, (t, v)| m.max((v - sol.value(t)).abs()));
            assert!(err < 1e-6, "{method:?}: {err}");
        }
    }

    #[test]
    fn zero_problem_stays_zero() {
        let p = kdv_reduced(1.0, 0.0).unwrap();
        let r = solve_reference(&p, Source::Zero, &CauchyData::zeros(2), &IvpConfig::default()).unwrap();
        assert_eq!(r.solution().max_abs(), 0.0);
        assert!(r.fingerprint.contains("dt=0.001"));
    }

    #[test]
    fn blow_up_truncates() {
        // w″ ≈ 3w² from w(0)=1 blows up at t* = ∫₁^∞ dw/√(2(w³−1)) ≈ 1.71732.
        let p = kdv_reduced(1e-9, 0.0).unwrap();
        let r = solve_reference(&p, Source::Zero, &CauchyData::new(vec![1.0, 0.0]).unwrap(), &cfg(1e-3, 5.0, Method::Rk4))
            .unwrap();
        let tr = r.trajectory;
        assert!(tr.truncated_at().is_some());
        assert!(tr.usable_horizon() < 1.71732 && tr.usable_horizon() > 1.6, "{}", tr.usable_horizon());
        assert!(tr.solution().values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn invalid_config_rejected() {
        let bad = IvpConfig { dt: -1.0, ..IvpConfig::default() };
        assert!(integrate(&Oscillator, &CauchyData::zeros(2), &bad).is_err());
        assert!(matches!(
            integrate(&Oscillator, &CauchyData::zeros(3), &IvpConfig::default()),
            Err(IvpError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn extended_integrator_in_f64() {
        let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
            dy[0] = y[1];
            dy[1] = -y[0];
        };
        let out = integrate_extended(rhs, 0.0, &[0.0, 1.0], &[0.5, 2.0], 0.05, 8);
        assert!((out[0][0] - 0.5_f64.sin()).abs() < 1e-14);
        assert!((out[1][1] - 2.0_f64.cos()).abs() < 1e-13);
    }
}
