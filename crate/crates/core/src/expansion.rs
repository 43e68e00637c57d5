//! Short-time expansion `w = Σₖ aₖ Bₖ` with basis
//! `Bₖ(t) = ∫₀ᵗ (t−τ)ᵏ G(t−τ) F_m(τ) dτ`, and least-squares fitting of the
//! `aₖ` against a reference solution.

use nalgebra::{DMatrix, DVector};
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use thiserror::Error;

use crate::greens::{GreenError, GreenFunction};
use crate::grid::{GridError, GridFunction};
use crate::quadrature::{convolve_weighted, cumulative_integral};

pub const MAX_TERMS_INDEX: usize = 8;
pub const MAX_CONDITION: f64 = 1e10;

#[derive(Debug, Error)]
pub enum ExpansionError {
    #[error("expansion index {0} exceeds {MAX_TERMS_INDEX}")]
    TooManyTerms(usize),
    #[error("kernel order {0} is not supported (0, 1 or 2)")]
    KernelOrder(usize),
    #[error("fit window [{0}, {1}] holds fewer samples than unknowns")]
    Window(f64, f64),
    #[error("basis is degenerate on the fit window (condition number {0:.3e})")]
    DegenerateBasis(f64),
    #[error("kernel: {0}")]
    Kernel(#[from] GreenError),
    #[error("grid: {0}")]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionCoefficients {
    pub a: Vec<f64>,
    pub fit_window: (f64, f64),
    /// `‖Σ aₖBₖ − reference‖₂` over the window nodes, scaled by `√dt`.
    pub fit_residual: f64,
    /// Condition number of the column-normalized basis matrix.
    pub condition_number: f64,
}

impl ExpansionCoefficients {
    /// Given coefficients, not fitted.
    pub fn fixed(a: Vec<f64>) -> Self {
        Self { a, fit_window: (f64::NAN, f64::NAN), fit_residual: f64::NAN, condition_number: f64::NAN }
    }

    /// Highest power `N` in the sum.
    pub fn n(&self) -> usize {
        self.a.len().saturating_sub(1)
    }
}

#[derive(Debug, Clone)]
pub struct ShortTimeSolution {
    pub w: GridFunction,
    pub n: usize,
    pub green_order: usize,
    pub coefficients: ExpansionCoefficients,
}

/// `F_m`, the source integrated as many times as the kernel's order.
pub fn integrated_source(g: &GreenFunction, f: &GridFunction) -> Result<GridFunction, ExpansionError> {
    if g.order() > 2 {
        return Err(ExpansionError::KernelOrder(g.order()));
    }
    Ok(cumulative_integral(f, g.order()))
}

/// `B₀, …, B_N` on the source grid.
pub fn basis(g: &GreenFunction, f: &GridFunction, n: usize) -> Result<Vec<GridFunction>, ExpansionError> {
    if n > MAX_TERMS_INDEX {
        return Err(ExpansionError::TooManyTerms(n));
    }
    let fm = integrated_source(g, f)?;
    let kernel = g.sample_for_quadrature(fm.spec())?;
    let fm = if kernel.len() < fm.len() { fm.truncated(kernel.len())? } else { fm };
    let build = |k: usize| convolve_weighted(&kernel, &fm, k as u32);
    #[cfg(feature = "parallel")]
    let terms: Result<Vec<_>, _> = (0..=n).into_par_iter().map(build).collect();
    #[cfg(not(feature = "parallel"))]
    let terms: Result<Vec<_>, _> = (0..=n).map(build).collect();
    Ok(terms?)
}

/// `a₀ B₀`.
pub fn leading_order_solution(g: &GreenFunction, f: &GridFunction, a0: f64) -> Result<GridFunction, ExpansionError> {
    Ok(basis(g, f, 0)?.remove(0).scaled(a0))
}

pub fn combine(terms: &[GridFunction], a: &[f64]) -> Result<GridFunction, ExpansionError> {
    let mut w = GridFunction::zeros(terms[0].spec());
    for (b, &ak) in terms.iter().zip(a) {
        w = w.axpy(ak, b)?;
    }
    Ok(w)
}

pub fn short_time_partial_sum(
    g: &GreenFunction,
    f: &GridFunction,
    coeffs: &ExpansionCoefficients,
) -> Result<ShortTimeSolution, ExpansionError> {
    let terms = basis(g, f, coeffs.n())?;
    Ok(ShortTimeSolution { w: combine(&terms, &coeffs.a)?, n: coeffs.n(), green_order: g.order(), coefficients: coeffs.clone() })
}

/// Least-squares `a` for a precomputed basis.
pub fn fit_basis(
    terms: &[GridFunction],
    reference: &GridFunction,
    window: (f64, f64),
) -> Result<ExpansionCoefficients, ExpansionError> {
    let spec = terms[0].spec();
    if !spec.compatible(&reference.spec()) {
        return Err(GridError::Mismatch(format!(
            "basis (t0={}, dt={}) vs reference (t0={}, dt={})",
            spec.t0,
            spec.dt,
            reference.t0(),
            reference.dt()
        ))
        .into());
    }
    let available = spec.truncated(reference.len())?;
    let idx = available.window_indices(window.0, window.1);
    let cols = terms.len();
    if idx.len() < cols {
        return Err(ExpansionError::Window(window.0, window.1));
    }
    let rows = idx.len();
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut b = DVector::<f64>::zeros(rows);
    for (r, i) in idx.clone().enumerate() {
        for (k, term) in terms.iter().enumerate() {
            a[(r, k)] = term.values()[i];
        }
        b[r] = reference.values()[i];
    }
    let scales: Vec<f64> = (0..cols).map(|k| a.column(k).norm()).collect();
    if scales.contains(&0.0) {
        return Err(ExpansionError::DegenerateBasis(f64::INFINITY));
    }
    let mut scaled = a;
    for (k, s) in scales.iter().enumerate() {
        scaled.column_mut(k).scale_mut(1.0 / s);
    }
    let svd = scaled.clone().svd(true, true);
    let smin = svd.singular_values.min();
    let condition_number = if smin > 0.0 { svd.singular_values.max() / smin } else { f64::INFINITY };
    if !(condition_number <= MAX_CONDITION) {
        return Err(ExpansionError::DegenerateBasis(condition_number));
    }
    let y = svd.solve(&b, 0.0).expect("u and v computed");
    let coeffs: Vec<f64> = (0..cols).map(|k| y[k] / scales[k]).collect();
    let residual = (&scaled * &y - &b).norm() * available.dt.sqrt();
    Ok(ExpansionCoefficients { a: coeffs, fit_window: window, fit_residual: residual, condition_number })
}

/// Fit `a₀ … a_N` on `window` against `reference`.
pub fn fit_coefficients(
    g: &GreenFunction,
    f: &GridFunction,
    reference: &GridFunction,
    n: usize,
    window: (f64, f64),
) -> Result<ExpansionCoefficients, ExpansionError> {
    fit_basis(&basis(g, f, n)?, reference, window)
}
