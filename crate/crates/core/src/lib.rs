//! Nonlinear Green's functions for higher-order ODEs.
//!
//! A forced equation `w⁽ⁿ⁾ + N(w, w′, …, w⁽ⁿ⁻¹⁾) = f` whose nonlinearity
//! satisfies `N(0, …, 0) = 0` has a kernel `G = θ·w₀`, where `w₀` solves the
//! homogeneous equation from Cauchy data `(0, …, 0, s)`. Forced solutions are
//! approximated by the short-time expansion
//!
//! ```text
//! w(t) ≈ Σₖ aₖ ∫₀ᵗ (t−τ)ᵏ G(t−τ) F_m(τ) dτ
//! ```
//!
//! with `F_m` the `m`-fold antiderivative of `f` for a kernel answering to
//! `δ⁽ᵐ⁾`. The crate provides the kernels (closed form or numerical), the
//! expansion and its least-squares coefficients, a reference IVP solver and
//! logarithmic error reports.

// `!(a < b)` comparisons deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::manual_is_multiple_of)]

pub mod analysis;
pub mod config;
pub mod distributions;
pub mod expansion;
pub mod greens;
pub mod grid;
pub mod ivp;
pub mod models;
pub mod quadrature;
pub mod special;

pub use analysis::{er1, er2, ErrorKind, ErrorReport};
pub use distributions::{weak_form_strength, MollifiedDelta, WeakFormConfig, WeakFormReport};
pub use expansion::{fit_coefficients, leading_order_solution, short_time_partial_sum, ExpansionCoefficients, ShortTimeSolution};
pub use greens::{build_green_from_homogeneous, check_generalized_homogeneity, singular_part, wrap_closed_form, GreenFunction, Nonlinearity};
pub use grid::{GridFunction, GridSpec};
pub use ivp::{integrate, solve_reference, CauchyData, IvpConfig, Method};
pub use models::{Problem, SeriesSolution};
pub use special::{complete_elliptic_k, jacobi_sn_cn_dn, sech, EllipticModulus};
