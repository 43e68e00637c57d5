//! Cumulative antiderivatives and weighted Volterra convolutions on uniform
//! grids.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::{GridError, GridFunction};

/// Rule used by [`cumulative_integral_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuadratureRule {
    #[default]
    Trapezoid,
    /// Third-order interval formula built on the neighbouring sample.
    Simpson,
}

/// `m`-fold iterated antiderivative of `f` vanishing at `t0`, composite
/// trapezoid per fold. `m = 0` returns `f` unchanged.
pub fn cumulative_integral(f: &GridFunction, m: usize) -> GridFunction {
    cumulative_integral_with(f, m, QuadratureRule::Trapezoid)
}

pub fn cumulative_integral_with(f: &GridFunction, m: usize, rule: QuadratureRule) -> GridFunction {
    let mut current = f.clone();
    for _ in 0..m {
        current = single_fold(&current, rule);
    }
    current
}

fn single_fold(f: &GridFunction, rule: QuadratureRule) -> GridFunction {
    let v = f.values();
    let dt = f.dt();
    let n = v.len();
    let mut out = vec![0.0; n];
    for i in 1..n {
        let step = match rule {
            QuadratureRule::Trapezoid => 0.5 * dt * (v[i - 1] + v[i]),
            QuadratureRule::Simpson if n < 3 => 0.5 * dt * (v[i - 1] + v[i]),
            QuadratureRule::Simpson if i + 1 < n => {
                dt / 12.0 * (5.0 * v[i - 1] + 8.0 * v[i] - v[i + 1])
            }
            QuadratureRule::Simpson => dt / 12.0 * (-v[i - 2] + 8.0 * v[i - 1] + 5.0 * v[i]),
        };
        out[i] = out[i - 1] + step;
    }
    GridFunction::from_spec(f.spec(), out).expect("finite partial sums of finite samples")
}

/// `∫_{t0}^{t} (t−τ)ᵏ G(t−τ) f(τ) dτ` at every node, trapezoid rule in `τ`.
///
/// `g` is read as a function of the lag `t − τ`, so `g.values()[0]` is the
/// kernel at lag zero. For kernels with a jump at the origin pass the right
/// limit there.
pub fn convolve_weighted(g: &GridFunction, f: &GridFunction, k: u32) -> Result<GridFunction, GridError> {
    if (g.dt() - f.dt()).abs() > 1e-12 * g.dt() || g.len() < f.len() {
        return Err(GridError::Mismatch(format!(
            "kernel (dt={}, n={}) cannot be convolved with source (dt={}, n={})",
            g.dt(),
            g.len(),
            f.dt(),
            f.len()
        )));
    }
    let dt = f.dt();
    let n = f.len();
    let kernel: Vec<f64> = g.values()[..n]
        .iter()
        .enumerate()
        .map(|(l, &gv)| (l as f64 * dt).powi(k as i32) * gv)
        .collect();
    let src = f.values();
    let node = |i: usize| -> f64 {
        if i == 0 {
            return 0.0;
        }
        let mut acc = 0.5 * (kernel[i] * src[0] + kernel[0] * src[i]);
        for j in 1..i {
            acc += kernel[i - j] * src[j];
        }
        acc * dt
    };
    #[cfg(feature = "parallel")]
    let values: Vec<f64> = (0..n).into_par_iter().map(node).collect();
    #[cfg(not(feature = "parallel"))]
    let values: Vec<f64> = (0..n).map(node).collect();
    GridFunction::new(f.t0(), dt, values)
}

/// Composite trapezoid over the whole grid.
pub fn trapezoid(f: &GridFunction) -> f64 {
    let v = f.values();
    let inner: f64 = v[1..v.len() - 1].iter().sum();
    f.dt() * (inner + 0.5 * (v[0] + v[v.len() - 1]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use proptest::prelude::*;

    fn grid(dt: f64, horizon: f64) -> GridSpec {
        GridSpec::covering(0.0, horizon, dt).unwrap()
    }

    fn sampled(spec: GridSpec, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction::sample(spec, f).unwrap()
    }

    fn max_err(g: &GridFunction, exact: impl Fn(f64) -> f64) -> f64 {
        g.iter().fold(0.0_f64, |m, (t, v)| m.max((v - exact(t)).abs()))
    }

    #[test]
    fn antiderivative_of_constant_and_linear() {
        let spec = grid(0.01, 2.0);
        let one = sampled(spec, |_| 1.0);
        assert!(max_err(&cumulative_integral(&one, 1), |t| t) < 1e-13);
        let lin = sampled(spec, |t| t);
        assert!(max_err(&cumulative_integral(&lin, 1), |t| t * t / 2.0) < 1e-4);
        assert_eq!(cumulative_integral(&lin, 0), lin);
    }

    #[test]
    fn double_antiderivative_of_exp_is_second_order() {
        let exact = |t: f64| t.exp() - 1.0 - t;
        let coarse = max_err(&cumulative_integral(&sampled(grid(0.02, 2.0), f64::exp), 2), exact);
        let fine = max_err(&cumulative_integral(&sampled(grid(0.01, 2.0), f64::exp), 2), exact);
        assert!(coarse < 1e-3);
        let ratio = coarse / fine;
        assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn simpson_rule_is_higher_order() {
        let exact = |t: f64| t.exp() - 1.0;
        let coarse = max_err(
            &cumulative_integral_with(&sampled(grid(0.02, 2.0), f64::exp), 1, QuadratureRule::Simpson),
            exact,
        );
        let fine = max_err(
            &cumulative_integral_with(&sampled(grid(0.01, 2.0), f64::exp), 1, QuadratureRule::Simpson),
            exact,
        );
        assert!(coarse / fine > 7.0, "{coarse} {fine}");
    }

    #[test]
    fn convolution_with_unit_kernel() {
        let spec = grid(0.01, 3.0);
        let g = sampled(spec, |_| 1.0);
        let f = sampled(spec, |_| 1.0);
        assert!(max_err(&convolve_weighted(&g, &f, 0).unwrap(), |t| t) < 1e-12);
        assert!(max_err(&convolve_weighted(&g, &f, 1).unwrap(), |t| t * t / 2.0) < 1e-4);
    }

    #[test]
    fn convolution_with_decaying_kernel() {
        let exact = |t: f64| 1.0 - (-t).exp();
        let run = |dt: f64| {
            let spec = grid(dt, 3.0);
            let conv = convolve_weighted(&sampled(spec, |t| (-t).exp()), &sampled(spec, |_| 1.0), 0).unwrap();
            max_err(&conv, exact)
        };
        let (coarse, fine) = (run(0.02), run(0.01));
        assert!(coarse < 1e-4);
        assert!((coarse / fine - 4.0).abs() < 0.1);
    }

    #[test]
    fn mismatched_steps_rejected() {
        let a = sampled(grid(0.01, 1.0), |_| 1.0);
        let b = sampled(grid(0.02, 1.0), |_| 1.0);
        assert!(convolve_weighted(&a, &b, 0).is_err());
    }

    #[test]
    fn trapezoid_total() {
        let f = sampled(grid(0.001, 1.0), |t| 3.0 * t * t);
        assert!((trapezoid(&f) - 1.0).abs() < 1e-6);
    }

    proptest! {
        #[test]
        fn convolution_is_linear(alpha in -3.0f64..3.0, beta in -3.0f64..3.0, k in 0u32..4, w in 0.1f64..4.0) {
            let spec = grid(0.01, 2.0);
            let g = sampled(spec, |t| (-t).exp() * (w * t).cos());
            let f1 = sampled(spec, |t| (w * t).sin());
            let f2 = sampled(spec, |t| 1.0 + t * t);
            let mix = f1.scaled(alpha).axpy(beta, &f2).unwrap();
            let lhs = convolve_weighted(&g, &mix, k).unwrap();
            let rhs = convolve_weighted(&g, &f1, k).unwrap().scaled(alpha)
                .axpy(beta, &convolve_weighted(&g, &f2, k).unwrap()).unwrap();
            prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
        }

        #[test]
        fn folds_compose(m in 1usize..4, w in 0.1f64..3.0) {
            let f = sampled(grid(0.01, 2.0), |t| (w * t).cos() + t);
            let mut composed = f.clone();
            for _ in 0..m {
                composed = cumulative_integral(&composed, 1);
            }
            prop_assert!(composed.max_abs_diff(&cumulative_integral(&f, m)).unwrap() < 1e-12);
        }
    }
}
