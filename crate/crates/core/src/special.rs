//! Complete elliptic integral of the first kind, Jacobi elliptic functions and
//! an overflow-safe hyperbolic secant.
//!
//! All routines take the elliptic *modulus* `k`, not the parameter `m = k²`.
//! The degenerate modulus `k = 1` is handled by an explicit hyperbolic branch
//! since the AGM recursion stalls there.

use std::f64::consts::FRAC_PI_2;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecialFunctionError {
    #[error("elliptic modulus {0} outside [0, 1]")]
    ModulusDomain(f64),
    #[error("complete elliptic integral K(k) diverges at k = 1")]
    UnboundedPeriod,
}

/// Jacobi modulus `k` with `0 <= k <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EllipticModulus(f64);

impl EllipticModulus {
    pub fn new(k: f64) -> Result<Self, SpecialFunctionError> {
        if !(0.0..=1.0).contains(&k) {
            return Err(SpecialFunctionError::ModulusDomain(k));
        }
        Ok(Self(k))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Complementary modulus `sqrt(1 - k²)`.
    pub fn complementary(self) -> f64 {
        ((1.0 - self.0) * (1.0 + self.0)).sqrt()
    }
}

const AGM_TOL: f64 = 4.0 * f64::EPSILON;
const AGM_MAX_ITER: usize = 64;

/// Quarter period `K(k)` via the arithmetic-geometric mean,
/// `K = π / (2 · AGM(1, k'))`.
pub fn complete_elliptic_k(k: EllipticModulus) -> Result<f64, SpecialFunctionError> {
    if k.0 >= 1.0 {
        return Err(SpecialFunctionError::UnboundedPeriod);
    }
    let mut a = 1.0_f64;
    let mut b = k.complementary();
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= AGM_TOL * a {
            break;
        }
        let next_a = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next_a;
    }
    Ok(FRAC_PI_2 / a)
}

/// Jacobi elliptic functions `(sn, cn, dn)` of argument `u` and modulus `k`.
///
/// Uses the descending Landen (AGM) scheme. Arguments are first reduced
/// modulo the real period `4K` so that the phase recursion stays accurate for
/// large `|u|`.
pub fn jacobi_sn_cn_dn(u: f64, k: EllipticModulus) -> (f64, f64, f64) {
    let kv = k.0;
    if kv == 0.0 {
        return (u.sin(), u.cos(), 1.0);
    }
    if kv == 1.0 {
        let s = sech(u);
        return (u.tanh(), s, s);
    }

    let quarter = complete_elliptic_k(k).expect("k < 1 checked above");
    let period = 4.0 * quarter;
    let u = if u.abs() > period {
        u - period * (u / period).round()
    } else {
        u
    };

    // a_n, c_n of the AGM sequence started at (1, k', k).
    let mut a = [0.0_f64; AGM_MAX_ITER + 1];
    let mut c = [0.0_f64; AGM_MAX_ITER + 1];
    a[0] = 1.0;
    c[0] = kv;
    let mut b = k.complementary();
    let mut n = 0;
    while c[n].abs() > AGM_TOL && n < AGM_MAX_ITER {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
    }

    let mut phi = (1u64 << n) as f64 * a[n] * u;
    let mut phi_prev = phi;
    for i in (1..=n).rev() {
        phi_prev = phi;
        let ratio = (c[i] / a[i] * phi.sin()).clamp(-1.0, 1.0);
        phi = 0.5 * (phi + ratio.asin());
    }
    let sn = phi.sin();
    let cn = phi.cos();
    let dn = if n == 0 {
        1.0
    } else {
        cn / (phi_prev - phi).cos()
    };
    (sn, cn, dn)
}

/// `2 / (e^x + e^-x)`, evaluated as `2e^{-|x|} / (1 + e^{-2|x|})` so large
/// arguments underflow to zero instead of overflowing.
pub fn sech(x: f64) -> f64 {
    let e = (-x.abs()).exp();
    2.0 * e / (1.0 + e * e)
}
