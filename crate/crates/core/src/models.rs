//! Traveling-wave reductions and their exact or series solutions.
//!
//! * KdV `u_t + u_xxx − 6uu_x = 0` with `ζ = x − ct − a`, integrated once:
//!   `w″ − 3w² − cw = c₀`.
//! * Quadratic fourth order: `w⁗ + (w − v²)w″ = 0`.
//! * Boussinesq: `w⁗ + v²w″ + (w²)″/2 = 0`, with periodic sn² and cn² waves.
//!
//! Elliptic functions take the modulus `k`, not the parameter `k²`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::greens::{check_generalized_homogeneity, probe_states, ClosedForm, HomogeneityReport, Nonlinearity, NonlinearityKind};
use crate::ivp::Scalar;
use crate::special::{complete_elliptic_k, jacobi_sn_cn_dn, sech, EllipticModulus, SpecialFunctionError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("parameter out of range: {0}")]
    Domain(String),
    #[error("cnoidal wave is singular at k² = 1/2 (k = {0})")]
    Singular(f64),
    #[error(transparent)]
    Special(#[from] SpecialFunctionError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WaveProfile {
    Snoidal,
    Cnoidal,
}

/// Models with a closed-form order-one kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelSpec {
    Kdv { c: f64 },
    Boussinesq { v: f64, modulus: f64, phi: f64, profile: WaveProfile },
}

/// `w⁽ⁿ⁾ + N(w, …, w⁽ⁿ⁻¹⁾) = f + offset`.
#[derive(Debug, Clone)]
pub struct Problem {
    nonlinearity: Nonlinearity,
    offset: f64,
    params: BTreeMap<String, f64>,
    description: String,
}

impl Problem {
    pub fn new(nonlinearity: Nonlinearity, offset: f64, params: BTreeMap<String, f64>, description: impl Into<String>) -> Self {
        Self { nonlinearity, offset, params, description: description.into() }
    }

    pub fn order(&self) -> usize {
        self.nonlinearity.order()
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }

    /// Constant forcing added to every source.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    /// `w⁽ⁿ⁾ + N(state) − offset` for an unforced solution candidate.
    pub fn residual(&self, state: &[f64], highest: f64) -> f64 {
        highest + self.nonlinearity.eval(state) - self.offset
    }

    /// Homogeneity of the unforced operator; a nonzero offset acts as
    /// `N(0) = −offset`.
    pub fn check_homogeneity(&self) -> HomogeneityReport {
        let mut report = check_generalized_homogeneity(&self.nonlinearity, &probe_states(self.order()));
        if self.offset != 0.0 {
            report.value_at_zero -= self.offset;
            report.holds = false;
        }
        report
    }
}

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

pub fn kdv_reduced(c: f64, c0: f64) -> Result<Problem, ModelError> {
    if !(c.is_finite() && c > 0.0) {
        return Err(ModelError::Domain(format!("KdV wave speed must be positive, got {c}")));
    }
    Ok(Problem::new(
        Nonlinearity::new(2, NonlinearityKind::Kdv { c }, format!("-3w^2 - {c}w")),
        c0,
        params(&[("c", c), ("c0", c0)]),
        format!("kdv c={c} c0={c0}"),
    ))
}

pub fn quadratic_fourth(v: f64) -> Problem {
    Problem::new(
        Nonlinearity::new(4, NonlinearityKind::QuadraticFourth { v }, format!("(w - {v}^2) w''")),
        0.0,
        params(&[("v", v)]),
        format!("quadratic4 v={v}"),
    )
}

pub fn boussinesq_reduced(v: f64) -> Problem {
    Problem::new(
        Nonlinearity::new(4, NonlinearityKind::Boussinesq { v }, format!("{v}^2 w'' + w'^2 + w w''")),
        0.0,
        params(&[("v", v)]),
        format!("boussinesq v={v}"),
    )
}

/// `w⁽ⁿ⁾ + Σ cᵢ w⁽ⁱ⁾ = f`.
pub fn linear(coeffs: Vec<f64>) -> Problem {
    let n = coeffs.len();
    Problem::new(
        Nonlinearity::new(n, NonlinearityKind::Linear(coeffs.clone()), format!("linear {coeffs:?}")),
        0.0,
        BTreeMap::new(),
        format!("linear order {n} {coeffs:?}"),
    )
}

/// `ζ = x − speed·t − shift`.
pub fn traveling_wave_map(x: f64, t: f64, speed: f64, shift: f64) -> f64 {
    x - speed * t - shift
}

type Poly = Vec<f64>;

fn poly_eval(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn poly_derivative(p: &[f64]) -> Poly {
    p.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect()
}

fn poly_mul(a: &[f64], b: &[f64]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[f64], b: &[f64]) -> Poly {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, &x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, &x) in b.iter().enumerate() {
        out[i] += x;
    }
    out
}

/// Polynomials `R_m` in `T = tanh x` with `dᵐ sech²x / dxᵐ = R_m(T)`.
fn sech2_derivative_polys(count: usize) -> Vec<Poly> {
    let mut out = vec![vec![1.0, 0.0, -1.0]];
    let one_minus_t2 = [1.0, 0.0, -1.0];
    while out.len() < count {
        let next = poly_mul(&poly_derivative(out.last().expect("non-empty")), &one_minus_t2);
        out.push(next);
    }
    out.truncate(count);
    out
}

/// Polynomials for `dᵐ sn²x / dxᵐ`: `P_m(y)` for even `m`, `Q_m(y)` with
/// the derivative equal to `sn·cn·dn·Q_m(y)` for odd `m`, where `y = sn²x`.
fn sn2_derivative_polys(k2: f64, count: usize) -> Vec<Poly> {
    let scd_prime = [1.0, -2.0 * (1.0 + k2), 3.0 * k2];
    // (sn cn dn)² = y(1 − y)(1 − k²y)
    let scd_sq = poly_mul(&[0.0, 1.0, -1.0], &[1.0, -k2]);
    let mut out: Vec<Poly> = vec![vec![0.0, 1.0]];
    while out.len() < count {
        let m = out.len();
        let prev = out.last().expect("non-empty");
        let next = if m % 2 == 1 {
            poly_derivative(prev).iter().map(|c| 2.0 * c).collect()
        } else {
            let d: Poly = poly_derivative(prev).iter().map(|c| 2.0 * c).collect();
            poly_add(&poly_mul(&scd_prime, prev), &poly_mul(&scd_sq, &d))
        };
        out.push(next);
    }
    out.truncate(count);
    out
}

/// `−(c/2) sech²(√c (ζ − shift)/2)`, the KdV solitary wave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdvSoliton {
    pub c: f64,
    pub shift: f64,
}

impl KdvSoliton {
    pub fn new(c: f64) -> Result<Self, ModelError> {
        Self::shifted(c, 0.0)
    }

    pub fn shifted(c: f64, shift: f64) -> Result<Self, ModelError> {
        if !(c.is_finite() && c > 0.0) {
            return Err(ModelError::Domain(format!("KdV wave speed must be positive, got {c}")));
        }
        Ok(Self { c, shift })
    }

    fn rate(&self) -> f64 {
        0.5 * self.c.sqrt()
    }
}

impl ClosedForm for KdvSoliton {
    fn value(&self, t: f64) -> f64 {
        let s = sech(self.rate() * (t - self.shift));
        -0.5 * self.c * s * s
    }

    fn derivatives(&self, t: f64, count: usize) -> Vec<f64> {
        let x = self.rate() * (t - self.shift);
        let tanh = x.tanh();
        sech2_derivative_polys(count)
            .iter()
            .enumerate()
            .map(|(m, p)| {
                let base = if m == 0 { sech(x).powi(2) } else { poly_eval(p, tanh) };
                -0.5 * self.c * self.rate().powi(m as i32) * base
            })
            .collect()
    }

    fn describe(&self) -> String {
        format!("-(c/2) sech^2(sqrt(c)(z-a)/2) c={} a={}", self.c, self.shift)
    }
}

/// `A·sn²(bζ + φ, k)` with `A = −3k²v²/(1+k²)`, `b = v/(2√(1+k²))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnoidalWave {
    pub v: f64,
    pub modulus: EllipticModulus,
    pub phi: f64,
}

impl SnoidalWave {
    pub fn new(v: f64, k: f64, phi: f64) -> Result<Self, ModelError> {
        let modulus = EllipticModulus::new(k)?;
        if k == 0.0 {
            return Err(ModelError::Domain("snoidal wave needs 0 < k <= 1".into()));
        }
        Ok(Self { v, modulus, phi })
    }

    pub fn amplitude(&self) -> f64 {
        let k2 = self.modulus.value().powi(2);
        -3.0 * k2 * self.v * self.v / (1.0 + k2)
    }

    pub fn rate(&self) -> f64 {
        self.v / (2.0 * (1.0 + self.modulus.value().powi(2)).sqrt())
    }

    /// Period `4K(k)/b` in `ζ`.
    pub fn period(&self) -> Result<f64, ModelError> {
        Ok(4.0 * complete_elliptic_k(self.modulus)? / self.rate().abs())
    }
}

fn sn2_derivatives(x: f64, k: EllipticModulus, b: f64, scale: f64, count: usize) -> Vec<f64> {
    let (sn, cn, dn) = jacobi_sn_cn_dn(x, k);
    let y = sn * sn;
    let scd = sn * cn * dn;
    sn2_derivative_polys(k.value().powi(2), count)
        .iter()
        .enumerate()
        .map(|(m, p)| {
            let base = if m % 2 == 0 { poly_eval(p, y) } else { scd * poly_eval(p, y) };
            scale * b.powi(m as i32) * base
        })
        .collect()
}

impl ClosedForm for SnoidalWave {
    fn value(&self, t: f64) -> f64 {
        let (sn, _, _) = jacobi_sn_cn_dn(self.rate() * t + self.phi, self.modulus);
        self.amplitude() * sn * sn
    }

    fn derivatives(&self, t: f64, count: usize) -> Vec<f64> {
        sn2_derivatives(self.rate() * t + self.phi, self.modulus, self.rate(), self.amplitude(), count)
    }

    fn describe(&self) -> String {
        format!("A sn^2(b z + phi, k) v={} k={} phi={}", self.v, self.modulus.value(), self.phi)
    }
}

/// `B·cn²(bζ + φ, k)` with `B = 3k²v²/(1−2k²)`, `b = v/(2√(1−2k²))`;
/// real only for `k² < 1/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CnoidalWave {
    pub v: f64,
    pub modulus: EllipticModulus,
    pub phi: f64,
}

impl CnoidalWave {
    pub fn new(v: f64, k: f64, phi: f64) -> Result<Self, ModelError> {
        let modulus = EllipticModulus::new(k)?;
        let gap = 1.0 - 2.0 * k * k;
        if gap.abs() < 1e-12 {
            return Err(ModelError::Singular(k));
        }
        if gap < 0.0 {
            return Err(ModelError::Domain(format!("cnoidal wave is not real for k² > 1/2 (k = {k})")));
        }
        Ok(Self { v, modulus, phi })
    }

    pub fn amplitude(&self) -> f64 {
        let k2 = self.modulus.value().powi(2);
        3.0 * k2 * self.v * self.v / (1.0 - 2.0 * k2)
    }

    pub fn rate(&self) -> f64 {
        self.v / (2.0 * (1.0 - 2.0 * self.modulus.value().powi(2)).sqrt())
    }
}

impl ClosedForm for CnoidalWave {
    fn value(&self, t: f64) -> f64 {
        let (_, cn, _) = jacobi_sn_cn_dn(self.rate() * t + self.phi, self.modulus);
        self.amplitude() * cn * cn
    }

    fn derivatives(&self, t: f64, count: usize) -> Vec<f64> {
        let mut d = sn2_derivatives(self.rate() * t + self.phi, self.modulus, self.rate(), -self.amplitude(), count);
        if let Some(first) = d.first_mut() {
            *first += self.amplitude();
        }
        d
    }

    fn describe(&self) -> String {
        format!("B cn^2(b z + phi, k) v={} k={} phi={}", self.v, self.modulus.value(), self.phi)
    }
}

pub fn snoidal_solution(v: f64, k: f64, phi: f64) -> Result<SnoidalWave, ModelError> {
    SnoidalWave::new(v, k, phi)
}

pub fn cnoidal_solution(v: f64, k: f64, phi: f64) -> Result<CnoidalWave, ModelError> {
    CnoidalWave::new(v, k, phi)
}

/// Taylor coefficients of the quadratic fourth-order kernel profile from
/// `(0, 0, 0, s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesSolution {
    coefficients: Vec<f64>,
    v: f64,
    s: f64,
}

impl SeriesSolution {
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn eval(&self, t: f64) -> f64 {
        poly_eval(&self.coefficients, t)
    }
}

/// `α₀ = α₁ = α₂ = 0`, `α₃ = s/6`, then for `n ≥ 0`
/// `(n+1)(n+2)(n+3)(n+4) α_{n+4} = v² βₙ α_{n+2} − Σ_{k≤n} βₖ α_{k+2} α_{n−k}`
/// with `βₙ = (n+1)(n+2)`.
pub fn series_coefficients_generic<T: Scalar>(v: T, s: T, max_index: usize) -> Vec<T> {
    let lift = |x: usize| T::from_usize(x).expect("small integer");
    let beta = |n: usize| lift((n + 1) * (n + 2));
    let mut a = vec![T::zero(); max_index.max(3) + 1];
    a[3] = s / lift(6);
    let v2 = v * v;
    for n in 0..=max_index.saturating_sub(4) {
        let mut acc = v2 * beta(n) * a[n + 2];
        for k in 0..=n {
            acc = acc - beta(k) * a[k + 2] * a[n - k];
        }
        a[n + 4] = acc / lift((n + 1) * (n + 2) * (n + 3) * (n + 4));
    }
    a.truncate(max_index + 1);
    a
}

pub fn series_coefficients(v: f64, s: f64, max_index: usize) -> Result<SeriesSolution, ModelError> {
    if max_index < 4 {
        return Err(ModelError::Domain(format!("series needs at least α₄, got M = {max_index}")));
    }
    Ok(SeriesSolution { coefficients: series_coefficients_generic(v, s, max_index), v, s })
}

/// Horner evaluation in any [`Scalar`].
pub fn eval_series_generic<T: Scalar>(coefficients: &[T], t: T) -> T {
    coefficients.iter().rev().fold(T::zero(), |acc, &c| acc * t + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kdv_soliton_residual() {
        let p = kdv_reduced(1.0, 0.0).unwrap();
        let w = KdvSoliton::new(1.0).unwrap();
        for i in 0..=500 {
            let t = i as f64 * 0.01;
            let d = w.derivatives(t, 3);
            assert!(p.residual(&d[..2], d[2]).abs() < 1e-12, "t={t}");
        }
    }

    #[test]
    fn kdv_offset_shifts_residual() {
        let p = kdv_reduced(1.0, 1.0).unwrap();
        let d = KdvSoliton::new(1.0).unwrap().derivatives(0.7, 3);
        assert!((p.residual(&d[..2], d[2]) + 1.0).abs() < 1e-12);
        assert!(kdv_reduced(0.0, 0.0).is_err());
        assert_eq!(KdvSoliton::new(4.0).unwrap().value(0.0), -2.0);
    }

    #[test]
    fn sech2_derivatives_match_finite_differences() {
        let w = KdvSoliton::new(2.0).unwrap();
        let h = 1e-5;
        for &t in &[0.1, 0.8, 2.5] {
            let d = w.derivatives(t, 4);
            let dp = w.derivatives(t + h, 4);
            let dm = w.derivatives(t - h, 4);
            for m in 0..3 {
                let fd = (dp[m] - dm[m]) / (2.0 * h);
                assert!((fd - d[m + 1]).abs() < 1e-7, "m={m} t={t}");
            }
        }
    }

    #[test]
    fn quadratic_fourth_evaluations() {
        let p = quadratic_fourth(0.0);
        assert_eq!(p.nonlinearity().eval(&[0.0; 4]), 0.0);
        assert_eq!(p.nonlinearity().eval(&[3.0, 0.0, 0.0, 0.0]), 0.0);
        assert_eq!(p.nonlinearity().eval(&[1.0, 0.0, 1.0, 0.0]), 1.0);
    }

    #[test]
    fn catalog_is_homogeneous() {
        assert!(kdv_reduced(1.0, 0.0).unwrap().check_homogeneity().holds);
        assert!(quadratic_fourth(1.3).check_homogeneity().holds);
        assert!(boussinesq_reduced(0.7).check_homogeneity().holds);
    }

    #[test]
    fn series_leading_coefficients() {
        let (v, s) = (1.7, 0.9);
        let a = series_coefficients(v, s, 12).unwrap();
        let c = a.coefficients();
        assert_eq!(&c[..3], &[0.0, 0.0, 0.0]);
        assert_eq!(c[3], s / 6.0);
        assert_eq!(c[4], 0.0);
        assert!((c[5] - v * v * s / 120.0).abs() < 1e-16);
        assert!(series_coefficients(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn series_satisfies_equation_by_hand_expansion() {
        // Plug the truncated series into w⁗ + (w − v²)w″ and check the
        // low-order Taylor coefficients of the residual vanish.
        let (v, s) = (1.2, 2.0);
        let a = series_coefficients(v, s, 14).unwrap();
        let c = a.coefficients();
        let d2: Vec<f64> = (0..c.len() - 2).map(|i| ((i + 1) * (i + 2)) as f64 * c[i + 2]).collect();
        let d4: Vec<f64> = (0..c.len() - 4).map(|i| ((i + 1) * (i + 2) * (i + 3) * (i + 4)) as f64 * c[i + 4]).collect();
        for n in 0..d4.len() {
            let mut r = d4[n] - v * v * d2[n];
            for k in 0..=n {
                r += c[n - k] * d2[k];
            }
            assert!(r.abs() < 1e-12, "n={n}: {r}");
        }
    }

    #[test]
    fn snoidal_wave_solves_boussinesq() {
        let p = boussinesq_reduced(1.3);
        for &k in &[0.3, 0.5, 0.9, 1.0] {
            let w = SnoidalWave::new(1.3, k, 0.4).unwrap();
            for i in 1..=200 {
                let t = i as f64 * 0.05;
                let d = w.derivatives(t, 5);
                assert!(p.residual(&d[..4], d[4]).abs() < 1e-10, "k={k} t={t}");
                assert!((d[0] - w.value(t)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn cnoidal_wave_solves_boussinesq() {
        let p = boussinesq_reduced(0.8);
        let w = CnoidalWave::new(0.8, 0.4, 0.1).unwrap();
        assert!((CnoidalWave::new(0.8, 0.4, 0.0).unwrap().value(0.0) - 3.0 * 0.16 * 0.64 / (1.0 - 0.32)).abs() < 1e-14);
        for i in 1..=100 {
            let t = i as f64 * 0.1;
            let d = w.derivatives(t, 5);
            assert!(p.residual(&d[..4], d[4]).abs() < 1e-10);
        }
    }

    #[test]
    fn cnoidal_singular_and_complex_moduli() {
        assert_eq!(CnoidalWave::new(1.0, 0.5_f64.sqrt(), 0.0), Err(ModelError::Singular(0.5_f64.sqrt())));
        assert!(matches!(CnoidalWave::new(1.0, 0.9, 0.0), Err(ModelError::Domain(_))));
        assert!(SnoidalWave::new(1.0, 1.2, 0.0).is_err());
    }

    #[test]
    fn snoidal_degenerate_limit() {
        let v = 1.4;
        let w = SnoidalWave::new(v, 1.0, 0.0).unwrap();
        assert_eq!(w.value(0.0), 0.0);
        for &t in &[0.3, 1.0, 4.0] {
            let exact = -1.5 * v * v * (v * t / (2.0 * 2.0_f64.sqrt())).tanh().powi(2);
            assert!((w.value(t) - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn snoidal_periodicity() {
        let w = SnoidalWave::new(1.0, 0.5, 0.2).unwrap();
        let period = w.period().unwrap();
        for &t in &[0.0, 0.7, 3.3] {
            assert!((w.value(t) - w.value(t + period)).abs() < 1e-8);
        }
    }

    #[test]
    fn traveling_wave_examples() {
        assert_eq!(traveling_wave_map(2.5, 0.0, 1.3, 0.0), 2.5);
        assert_eq!(traveling_wave_map(1.5 * 2.0 + 0.25, 2.0, 1.5, 0.25), 0.0);
        assert_eq!(traveling_wave_map(-0.7, 9.0, 0.0, 0.0), -0.7);
    }

    proptest! {
        #[test]
        fn soliton_translation_invariance(a in -3.0f64..3.0, x in -5.0f64..5.0, t in 0.0f64..2.0) {
            let c = 1.5;
            let base = KdvSoliton::new(c).unwrap();
            let moved = KdvSoliton::shifted(c, a).unwrap();
            let zeta = traveling_wave_map(x, t, c, a);
            prop_assert!((moved.value(zeta + a) - base.value(zeta)).abs() < 1e-14);
            prop_assert!((moved.value(traveling_wave_map(x, t, c, 0.0)) - base.value(zeta)).abs() < 1e-14);
        }
    }
}
