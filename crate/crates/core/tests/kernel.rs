use drift_approx_core::kernel::{constant_drift_row_integral, kernel_minus_one, kernel_plus_one};
use drift_approx_core::{DriftCoefficient, KernelProblem, QuadratureRule, Scenario};
use proptest::prelude::*;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

fn unit_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let mut u = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    (u(), u())
}

fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if a >= b {
        return 0.0;
    }
    QuadratureRule::gauss_panels(12, 40, a, b)
        .unwrap()
        .integrate_fn(f)
}

// Oracle: the kernel straight from its defining integral, independent of the
// library's quadrature helpers.
fn kernel_oracle(a: f64, t: f64, s: f64) -> f64 {
    let m = t.max(s);
    if m >= 1.0 {
        return 0.0;
    }
    (-a * t - a * s - m).exp() * integrate(|tau| (2.0 * a * tau + tau).exp(), m, 1.0)
}

#[test]
fn closed_forms_match_defining_integral() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let (t, s) = unit_pair(&mut rng);
        assert!((kernel_minus_one(t, s) - kernel_oracle(-1.0, t, s)).abs() < 1e-12);
        assert!((kernel_plus_one(t, s) - kernel_oracle(1.0, t, s)).abs() < 1e-12);
    }
}

#[test]
fn generic_path_agrees_with_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for p in [
        KernelProblem::example_independent(),
        KernelProblem::example_dependent(),
    ] {
        for _ in 0..100 {
            let (t, s) = unit_pair(&mut rng);
            let closed = p.eval_kernel(t, s).unwrap();
            let generic = p.eval_kernel_generic(t, s).unwrap();
            assert!(
                (closed - generic).abs() < 1e-10,
                "({t},{s}): {closed} vs {generic}"
            );
        }
    }
}

#[test]
fn factorised_matrix_matches_pointwise_generic() {
    let drift = DriftCoefficient::from_fn(|t| 0.5 * (3.0 * t).sin(), 1.0).unwrap();
    let p = KernelProblem::new(drift, 1.3, Scenario::IndependentGbm).unwrap();
    let pts = [0.0, 0.1, 0.45, 0.9, 1.3];
    let k = p.kernel_matrix(&pts).unwrap();
    for (i, &t) in pts.iter().enumerate() {
        for (j, &s) in pts.iter().enumerate() {
            let v = p.eval_kernel_generic(t, s).unwrap();
            assert!((k.get(i, j) - v).abs() < 1e-13 * (1.0 + v.abs()));
        }
    }
}

#[test]
fn kernel_and_z_vanish_at_horizon() {
    for p in [
        KernelProblem::example_independent(),
        KernelProblem::example_dependent(),
    ] {
        for s in [0.0, 0.25, 0.5, 1.0] {
            assert_eq!(p.eval_kernel(1.0, s).unwrap(), 0.0);
        }
        assert_eq!(p.eval_z(1.0).unwrap(), 0.0);
    }
}

#[test]
fn independent_z_is_kernel_applied_to_the_mean() {
    let p = KernelProblem::example_independent();
    for t in [0.0, 0.2, 0.5, 0.77] {
        let z = p.eval_z(t).unwrap();
        let oracle = integrate(|s| kernel_minus_one(t, s), 0.0, t)
            + integrate(|s| kernel_minus_one(t, s), t, 1.0);
        assert!((z - oracle).abs() < 1e-8);
        assert!((z - p.z_by_quadrature(t)).abs() < 1e-8);
    }
}

#[test]
fn row_integral_matches_quadrature_but_not_dependent_z() {
    let t = 0.5;
    let oracle =
        integrate(|s| kernel_plus_one(t, s), 0.0, t) + integrate(|s| kernel_plus_one(t, s), t, 1.0);
    assert!((constant_drift_row_integral(t).unwrap() - oracle).abs() < 1e-8);
    // z = G is correlated with the noise, so Z differs from ∫k·E[z].
    let z = KernelProblem::example_dependent().eval_z(0.25).unwrap();
    assert!((z - constant_drift_row_integral(0.25).unwrap()).abs() > 1e-3);
}

#[test]
fn analytic_cost_is_linear_in_covariance() {
    let p = KernelProblem::example_independent();
    let base = p
        .analytic_quadratic_cost_independent(|s, t| s.min(t).exp() - 1.0)
        .unwrap();
    let scaled = p
        .analytic_quadratic_cost_independent(|s, t| 2.5 * (s.min(t).exp() - 1.0))
        .unwrap();
    assert!((scaled - 2.5 * base).abs() < 1e-12);
    let e = std::f64::consts::E;
    assert!((base - (e * e - 7.0) / (4.0 * e)).abs() < 1e-6);
}

#[test]
fn custom_scenario_z_uses_the_supplied_mean() {
    let mean = Arc::new(|t: f64| 1.0 + t);
    let p = KernelProblem::new(
        DriftCoefficient::constant(-1.0),
        1.0,
        Scenario::CustomIndependent {
            mean,
            covariance: None,
        },
    )
    .unwrap();
    let t = 0.3;
    let oracle = integrate(|s| kernel_minus_one(t, s) * (1.0 + s), 0.0, t)
        + integrate(|s| kernel_minus_one(t, s) * (1.0 + s), t, 1.0);
    assert!((p.eval_z(t).unwrap() - oracle).abs() < 1e-8);
    assert!(p.analytic_quadratic_cost_independent(|_, _| 0.0).is_ok());
}

proptest! {
    #[test]
    fn kernel_is_symmetric(t in 0.0f64..=1.0, s in 0.0f64..=1.0) {
        for p in [KernelProblem::example_independent(), KernelProblem::example_dependent()] {
            let a = p.eval_kernel(t, s).unwrap();
            let b = p.eval_kernel(s, t).unwrap();
            prop_assert!((a - b).abs() <= 1e-13);
        }
    }

    #[test]
    fn kernel_matrix_is_positive_semidefinite(v in proptest::collection::vec(-1.0f64..1.0, 12)) {
        let pts: Vec<f64> = (0..12).map(|i| i as f64 / 11.0).collect();
        for p in [KernelProblem::example_independent(), KernelProblem::example_dependent()] {
            let k = p.kernel_matrix(&pts).unwrap();
            let kv = k.mul_vec(&v);
            let q: f64 = v.iter().zip(&kv).map(|(a, b)| a * b).sum();
            prop_assert!(q >= -1e-12);
        }
    }
}
