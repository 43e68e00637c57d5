//! Nonlinear Green's functions `G = θ·u`.
//!
//! If `N(0, …, 0) = 0`, multiplying any solution of the homogeneous equation
//! by the Heaviside step commutes with `N`, and the only thing `θ` adds to
//! `L[θ·u]` is the singular part of the highest derivative:
//!
//! ```text
//! dⁿ(θu)/dtⁿ = Σ_{k=1}^{n} u⁽ᵏ⁻¹⁾(0) δ⁽ⁿ⁻ᵏ⁾ + θ u⁽ⁿ⁾
//! ```
//!
//! Kernels here follow `θ(0) = 0`: they vanish at and left of the origin.
//! Quadrature that needs the right limit uses
//! [`GreenFunction::sample_for_quadrature`].

use std::collections::BTreeMap;
use std::fmt::{self, Debug};
use std::sync::Arc;

use thiserror::Error;

use crate::distributions::{weak_form_strength, DistributionError, WeakFormConfig};
use crate::grid::{format_number, GridError, GridFunction, GridSpec};
use crate::ivp::{solve_reference, CauchyData, IvpConfig, IvpError, Scalar, Source};
use crate::models::{boussinesq_reduced, CnoidalWave, KdvSoliton, ModelError, ModelSpec, Problem, SnoidalWave, WaveProfile};

#[derive(Debug, Error)]
pub enum GreenError {
    #[error("nonlinearity is not generalized homogeneous: N(0, …, 0) = {0}")]
    NotHomogeneous(f64),
    #[error("Cauchy data has {got} values, problem order is {expected}")]
    DataLength { expected: usize, got: usize },
    #[error("kernel is only known on [0, {horizon}], requested t = {t}")]
    BeyondHorizon { t: f64, horizon: f64 },
    #[error("kernel grid step {kernel} differs from requested step {requested}")]
    StepMismatch { kernel: f64, requested: f64 },
    #[error("solver: {0}")]
    Ivp(#[from] IvpError),
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error("strength measurement: {0}")]
    Distribution(#[from] DistributionError),
    #[error("grid: {0}")]
    Grid(#[from] GridError),
}

type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum NonlinearityKind {
    /// `Σ cᵢ w⁽ⁱ⁾`.
    Linear(Vec<f64>),
    /// `−3w² − c·w`.
    Kdv { c: f64 },
    /// `(w − v²)·w″`.
    QuadraticFourth { v: f64 },
    /// `v²w″ + (w′)² + w·w″`, the expansion of `v²w″ + (w²)″/2`.
    Boussinesq { v: f64 },
    Custom(Evaluator),
}

impl Debug for NonlinearityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Linear(c) => write!(f, "Linear({c:?})"),
            Self::Kdv { c } => write!(f, "Kdv {{ c: {c} }}"),
            Self::QuadraticFourth { v } => write!(f, "QuadraticFourth {{ v: {v} }}"),
            Self::Boussinesq { v } => write!(f, "Boussinesq {{ v: {v} }}"),
            Self::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// `N(w, w′, …, w⁽ⁿ⁻¹⁾)` for an equation `w⁽ⁿ⁾ + N = f`.
#[derive(Debug, Clone)]
pub struct Nonlinearity {
    order: usize,
    kind: NonlinearityKind,
    description: String,
}

impl Nonlinearity {
    pub fn new(order: usize, kind: NonlinearityKind, description: impl Into<String>) -> Self {
        assert!(order >= 1, "equation order must be positive");
        if let NonlinearityKind::Linear(c) = &kind {
            assert_eq!(c.len(), order, "one linear coefficient per state component");
        }
        if matches!(kind, NonlinearityKind::QuadraticFourth { .. } | NonlinearityKind::Boussinesq { .. }) {
            assert!(order >= 3, "needs w″ in the state");
        }
        Self { order, kind, description: description.into() }
    }

    pub fn custom(order: usize, description: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(order, NonlinearityKind::Custom(Arc::new(f)), description)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn kind(&self) -> &NonlinearityKind {
        &self.kind
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn eval(&self, state: &[f64]) -> f64 {
        match &self.kind {
            NonlinearityKind::Custom(f) => f(state),
            _ => self.eval_generic(state).expect("built-in forms are generic"),
        }
    }

    /// Evaluate in any [`Scalar`]; `None` for closure-backed forms.
    pub fn eval_generic<T: Scalar>(&self, state: &[T]) -> Option<T> {
        let lift = |x: f64| T::from_f64(x).expect("finite parameter");
        Some(match &self.kind {
            NonlinearityKind::Linear(c) => state.iter().zip(c).fold(T::zero(), |acc, (&s, &ci)| acc + lift(ci) * s),
            NonlinearityKind::Kdv { c } => {
                let w = state[0];
                lift(-3.0) * w * w - lift(*c) * w
            }
            NonlinearityKind::QuadraticFourth { v } => (state[0] - lift(v * v)) * state[2],
            NonlinearityKind::Boussinesq { v } => lift(v * v) * state[2] + state[1] * state[1] + state[0] * state[2],
            NonlinearityKind::Custom(_) => return None,
        })
    }
}

/// Outcome of [`check_generalized_homogeneity`].
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneityReport {
    pub holds: bool,
    /// `N(0, …, 0)`.
    pub value_at_zero: f64,
    /// `(state, θ, N(θ·state), θ·N(state))` for `θ ∈ {0, 1}`.
    pub witnesses: Vec<(Vec<f64>, f64, f64, f64)>,
}

pub const HOMOGENEITY_TOL: f64 = 1e-14;

/// `N(θ·x) = θ·N(x)` for `θ ∈ {0, 1}`, which reduces to `N(0) = 0`.
pub fn check_generalized_homogeneity(n: &Nonlinearity, sample_states: &[Vec<f64>]) -> HomogeneityReport {
    let zero = vec![0.0; n.order()];
    let value_at_zero = n.eval(&zero);
    let mut witnesses = Vec::with_capacity(2 * sample_states.len());
    let mut holds = value_at_zero.abs() <= HOMOGENEITY_TOL;
    for state in sample_states {
        let full = n.eval(state);
        for theta in [0.0, 1.0] {
            let scaled: Vec<f64> = state.iter().map(|x| theta * x).collect();
            let lhs = n.eval(&scaled);
            let rhs = theta * full;
            holds &= (lhs - rhs).abs() <= HOMOGENEITY_TOL * (1.0 + rhs.abs());
            witnesses.push((state.clone(), theta, lhs, rhs));
        }
    }
    HomogeneityReport { holds, value_at_zero, witnesses }
}

/// Default probe states for a nonlinearity of order `n`.
pub fn probe_states(n: usize) -> Vec<Vec<f64>> {
    [0.5, -1.25, 2.0]
        .iter()
        .map(|&a| (0..n).map(|i| a * (1.0 + 0.5 * i as f64) * if i % 2 == 0 { 1.0 } else { -1.0 }).collect())
        .collect()
}

/// Coefficients `(q, u⁽ⁿ⁻q⁻¹⁾(0))` of `δ⁽q⁾`, `q = n−1 … 0`, produced by the
/// `n`-th derivative of `θ·u`.
pub fn singular_part(u_derivatives_at_0: &[f64], n: usize) -> Result<Vec<(usize, f64)>, GreenError> {
    if u_derivatives_at_0.len() != n {
        return Err(GreenError::DataLength { expected: n, got: u_derivatives_at_0.len() });
    }
    Ok((1..=n).map(|k| (n - k, u_derivatives_at_0[k - 1])).collect())
}

/// Analytic profile `u` of a kernel `θ·u`.
pub trait ClosedForm: Send + Sync + Debug {
    fn value(&self, t: f64) -> f64;
    /// `u, u′, …, u⁽ᶜᵒᵘⁿᵗ⁻¹⁾` at `t`.
    fn derivatives(&self, t: f64, count: usize) -> Vec<f64>;
    fn describe(&self) -> String;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    HomogeneousSolve,
    Series,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::ClosedForm => "closed_form",
            Provenance::HomogeneousSolve => "homogeneous_solve",
            Provenance::Series => "series",
        })
    }
}

#[derive(Debug, Clone)]
pub enum Kernel {
    Closed(Arc<dyn ClosedForm>),
    /// State components `u, …, u⁽ⁿ⁻¹⁾` on a grid starting at 0.
    Sampled(Vec<GridFunction>),
}

/// A kernel answering to `strength · δ⁽ᵒʳᵈᵉʳ⁾`.
#[derive(Debug, Clone)]
pub struct GreenFunction {
    order: usize,
    strength: f64,
    state_count: usize,
    kernel: Kernel,
    provenance: Provenance,
    metadata: BTreeMap<String, String>,
}

impl GreenFunction {
    pub fn from_closed_form(
        form: Arc<dyn ClosedForm>,
        state_count: usize,
        order: usize,
        strength: f64,
    ) -> Self {
        let mut metadata = BTreeMap::new();
        metadata.insert("profile".into(), form.describe());
        Self { order, strength, state_count, kernel: Kernel::Closed(form), provenance: Provenance::ClosedForm, metadata }
    }

    pub fn from_samples(states: Vec<GridFunction>, order: usize, strength: f64, provenance: Provenance) -> Self {
        Self { order, strength, state_count: states.len(), kernel: Kernel::Sampled(states), provenance, metadata: BTreeMap::new() }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn strength(&self) -> f64 {
        self.strength
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    pub fn with_metadata(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }

    pub fn with_strength(mut self, strength: f64) -> Self {
        self.strength = strength;
        self
    }

    /// Last time at which the kernel is known; `None` for closed forms.
    pub fn horizon(&self) -> Option<f64> {
        match &self.kernel {
            Kernel::Closed(_) => None,
            Kernel::Sampled(s) => Some(s[0].end()),
        }
    }

    /// Right limit `u(t)` of the profile for `t ≥ 0`.
    fn profile(&self, t: f64, component: usize) -> Result<f64, GreenError> {
        match &self.kernel {
            Kernel::Closed(f) if component == 0 => Ok(f.value(t)),
            Kernel::Closed(f) => Ok(f.derivatives(t, component + 1)[component]),
            Kernel::Sampled(s) => s[component]
                .interpolate(t)
                .map_err(|_| GreenError::BeyondHorizon { t, horizon: s[0].end() }),
        }
    }

    /// `G(t)`, zero for `t ≤ 0`.
    pub fn value(&self, t: f64) -> Result<f64, GreenError> {
        if t <= 0.0 {
            return Ok(0.0);
        }
        self.profile(t, 0)
    }

    /// `G(0⁺)`.
    pub fn right_limit_at_zero(&self) -> f64 {
        self.profile(0.0, 0).expect("origin is always covered")
    }

    fn covered(&self, spec: GridSpec) -> Result<GridSpec, GreenError> {
        match &self.kernel {
            Kernel::Closed(_) => Ok(spec),
            Kernel::Sampled(s) => {
                if (s[0].dt() - spec.dt).abs() > 1e-12 * spec.dt || s[0].t0() != 0.0 || spec.t0 != 0.0 {
                    return Err(GreenError::StepMismatch { kernel: s[0].dt(), requested: spec.dt });
                }
                Ok(spec.truncated(s[0].len())?)
            }
        }
    }

    /// Samples on `spec` with `θ(0) = 0`. Sampled kernels are cut to their
    /// known horizon.
    pub fn sample(&self, spec: GridSpec) -> Result<GridFunction, GreenError> {
        let mut g = self.sample_for_quadrature(spec)?.into_values();
        let spec = self.covered(spec)?;
        for (i, v) in g.iter_mut().enumerate() {
            if spec.time(i) <= 0.0 {
                *v = 0.0;
            }
        }
        Ok(GridFunction::from_spec(spec, g)?)
    }

    /// Samples with the right limit `G(0⁺)` at the origin, as a lag kernel
    /// for convolution quadrature.
    pub fn sample_for_quadrature(&self, spec: GridSpec) -> Result<GridFunction, GreenError> {
        Ok(self.sample_states_upto(spec, 1)?.remove(0))
    }

    /// `u, …, u⁽ⁿ⁻¹⁾` on `spec` (right limits at the origin).
    pub fn sample_states(&self, spec: GridSpec) -> Result<Vec<GridFunction>, GreenError> {
        self.sample_states_upto(spec, self.state_count)
    }

    fn sample_states_upto(&self, spec: GridSpec, count: usize) -> Result<Vec<GridFunction>, GreenError> {
        let spec = self.covered(spec)?;
        match &self.kernel {
            Kernel::Closed(f) => {
                let rows: Vec<Vec<f64>> = spec.times().map(|t| f.derivatives(t.max(0.0), count)).collect();
                (0..count)
                    .map(|c| Ok(GridFunction::from_spec(spec, rows.iter().map(|r| r[c]).collect())?))
                    .collect()
            }
            Kernel::Sampled(s) => s[..count].iter().map(|g| Ok(g.truncated(spec.len)?)).collect(),
        }
    }
}

/// `G = θ·w₀` with `w₀` the homogeneous solution from `(0, …, 0, s)`;
/// order 0, strength `s`.
pub fn build_green_from_homogeneous(problem: &Problem, s: f64, config: &IvpConfig) -> Result<GreenFunction, GreenError> {
    build_green_with_data(problem, &CauchyData::impulse(problem.order(), s), config)
}

/// `G = θ·w₀` from arbitrary Cauchy data. Order and strength are read off
/// the highest nonvanishing `δ⁽q⁾` of the singular part.
pub fn build_green_with_data(problem: &Problem, data: &CauchyData, config: &IvpConfig) -> Result<GreenFunction, GreenError> {
    let n = problem.order();
    if data.len() != n {
        return Err(GreenError::DataLength { expected: n, got: data.len() });
    }
    let report = problem.check_homogeneity();
    if !report.holds {
        return Err(GreenError::NotHomogeneous(report.value_at_zero));
    }
    let singular = singular_part(data.values(), n)?;
    let (order, strength) = singular.iter().copied().find(|(_, c)| *c != 0.0).unwrap_or((0, 0.0));
    let cfg = IvpConfig { t0: 0.0, ..*config };
    let reference = solve_reference(problem, Source::Zero, data, &cfg)?;
    let tr = &reference.trajectory;
    let mut g = GreenFunction::from_samples(tr.components(), order, strength, Provenance::HomogeneousSolve)
        .with_metadata("problem", problem.description())
        .with_metadata("solver", cfg.fingerprint())
        .with_metadata("usable_horizon", format_number(tr.usable_horizon()));
    let singular_text: Vec<String> = singular.iter().map(|(q, c)| format!("d{q}:{}", format_number(*c))).collect();
    g = g.with_metadata("singular_part", singular_text.join(" "));
    if let Some(t) = tr.truncated_at() {
        g = g.with_metadata("truncated_at", format_number(t));
    }
    Ok(g)
}

/// `−(3/4)k²v⁴/(1+k²)²`, half of [`boussinesq_jump_strength`]; the other
/// candidate value for the `φ = 0` snoidal kernel.
pub fn boussinesq_half_jump_strength(v: f64, k: f64) -> f64 {
    -0.75 * k * k * v.powi(4) / (1.0 + k * k).powi(2)
}

/// `δ′` strength `2Ab²` from the jump of `A·sn²(bζ)`'s second derivative,
/// `−(3/2)k²v⁴/(1+k²)²`.
pub fn boussinesq_jump_strength(v: f64, k: f64) -> f64 {
    -1.5 * k * k * v.powi(4) / (1.0 + k * k).powi(2)
}

/// Order-one closed-form kernels.
///
/// KdV: `−(c/2)θ sech²(√c ζ/2)` with strength `−c/2`. Boussinesq: the sn² or
/// cn² wave; its strength is measured by [`weak_form_strength`] and both
/// candidate analytic values are recorded in the metadata.
pub fn wrap_closed_form(model: &ModelSpec) -> Result<GreenFunction, GreenError> {
    match *model {
        ModelSpec::Kdv { c } => {
            let form = KdvSoliton::new(c)?;
            Ok(GreenFunction::from_closed_form(Arc::new(form), 2, 1, -c / 2.0)
                .with_metadata("model", format!("kdv c={}", format_number(c))))
        }
        ModelSpec::Boussinesq { v, modulus, phi, profile } => {
            let form: Arc<dyn ClosedForm> = match profile {
                WaveProfile::Snoidal => Arc::new(SnoidalWave::new(v, modulus, phi)?),
                WaveProfile::Cnoidal => Arc::new(CnoidalWave::new(v, modulus, phi)?),
            };
            let u0 = form.derivatives(0.0, 4);
            let singular = singular_part(&u0, 4)?;
            let provisional = GreenFunction::from_closed_form(form, 4, 1, singular[2].1);
            let problem = boussinesq_reduced(v);
            let report = weak_form_strength(&provisional, &problem, 3, &WeakFormConfig::default())?;
            let measured = report.coefficient(1);
            let half_jump = boussinesq_half_jump_strength(v, modulus);
            let jump = boussinesq_jump_strength(v, modulus);
            let mut g = provisional
                .with_strength(measured)
                .with_metadata("model", format!("boussinesq v={} k={} phi={} {:?}", format_number(v), format_number(modulus), format_number(phi), profile))
                .with_metadata("measured_strength", format_number(measured))
                .with_metadata("half_jump_strength", format_number(half_jump))
                .with_metadata("jump_strength", format_number(jump))
                .with_metadata("ratio_to_half_jump", format_number(measured / half_jump))
                .with_metadata("ratio_to_jump", format_number(measured / jump))
                .with_metadata("weak_form_condition", format!("{:.3e}", report.condition_number));
            for (q, c) in &report.coefficients {
                g = g.with_metadata(format!("weak_form_d{q}"), format_number(*c));
            }
            if phi != 0.0 {
                g = g.with_metadata("note", "nonzero phase: the singular part also carries higher-order deltas");
            }
            Ok(g)
        }
    }
}
