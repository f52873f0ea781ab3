use drift_approx_core::process::{
    euler_gap_scheme, gbm_from_normals, gbm_moment, simulate_gbm_skeleton, solution_map_pathwise,
};
use drift_approx_core::{DriftCoefficient, NoiseSpec, PathSkeleton, QuadratureRule};
use proptest::prelude::*;

fn drift() -> DriftCoefficient {
    DriftCoefficient::from_fn(|t| -1.0 + 0.5 * t, 2.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn solution_map_is_affine_in_x0_and_linear_in_z(
        seed in any::<u64>(),
        x0 in -3.0f64..3.0,
        alpha in -2.0f64..2.0,
        beta in -2.0f64..2.0,
    ) {
        let panels = 5;
        let rule = QuadratureRule::composite_newton_cotes(panels, 1.0).unwrap();
        let g = simulate_gbm_skeleton(panels, 1.0, NoiseSpec::new(seed, 0)).unwrap().path;
        let z1 = PathSkeleton::from_fn(panels, 1.0, |t| (4.0 * t).sin()).unwrap();
        let z2 = simulate_gbm_skeleton(panels, 1.0, NoiseSpec::new(seed, 1)).unwrap().path;
        let mix = PathSkeleton::new(
            panels,
            1.0,
            z1.values().iter().zip(z2.values()).map(|(a, b)| alpha * a + beta * b).collect(),
        )
        .unwrap();
        let zero = PathSkeleton::from_fn(panels, 1.0, |_| 0.0).unwrap();

        let a = drift();
        let s1 = solution_map_pathwise(&a, 0.0, &z1, &g, &rule).unwrap();
        let s2 = solution_map_pathwise(&a, 0.0, &z2, &g, &rule).unwrap();
        let s_mix = solution_map_pathwise(&a, 0.0, &mix, &g, &rule).unwrap();
        let s_x0 = solution_map_pathwise(&a, x0, &z1, &g, &rule).unwrap();
        let h = solution_map_pathwise(&a, 1.0, &zero, &g, &rule).unwrap();
        for i in 0..rule.len() {
            let lin = alpha * s1.values()[i] + beta * s2.values()[i];
            prop_assert!((s_mix.values()[i] - lin).abs() <= 1e-12 * (1.0 + lin.abs()));
            let aff = s1.values()[i] + x0 * h.values()[i];
            prop_assert!((s_x0.values()[i] - aff).abs() <= 1e-12 * (1.0 + aff.abs()));
        }
    }

    #[test]
    fn euler_gap_is_linear_in_forcing(seed in any::<u64>(), c in -3.0f64..3.0) {
        let panels = 3;
        let normals = NoiseSpec::new(seed, 0).normals(6 * panels);
        let z = gbm_from_normals(panels, 1.0, &normals).unwrap().path;
        let u = vec![0.4; z.len()];
        let base = euler_gap_scheme(&drift(), &z, &u, &normals).unwrap();
        let zc = PathSkeleton::new(panels, 1.0, z.values().iter().map(|v| c * v).collect()).unwrap();
        let uc: Vec<f64> = u.iter().map(|v| c * v).collect();
        let scaled = euler_gap_scheme(&drift(), &zc, &uc, &normals).unwrap();
        for (a, b) in base.values().iter().zip(scaled.values()) {
            prop_assert!((c * a - b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
    }
}

#[test]
fn solution_map_without_noise_solves_the_ode() {
    // G ≡ 1, a ≡ -1, z ≡ 1: X = 1 - (1 - x0) e^{-t}.
    let panels = 50;
    let rule = QuadratureRule::composite_newton_cotes(panels, 1.0).unwrap();
    let g = PathSkeleton::from_fn(panels, 1.0, |_| 1.0).unwrap();
    let z = PathSkeleton::from_fn(panels, 1.0, |_| 1.0).unwrap();
    let x = solution_map_pathwise(&DriftCoefficient::constant(-1.0), 0.3, &z, &g, &rule).unwrap();
    for (t, v) in rule.nodes().iter().zip(x.values()) {
        let exact = 1.0 - 0.7 * (-t).exp();
        assert!((v - exact).abs() < 1e-5);
    }
}

#[test]
fn gbm_martingale_and_second_moment() {
    let n = 100_000;
    let panels = 2;
    let mut end = Vec::with_capacity(n);
    for j in 0..n as u64 {
        let path = simulate_gbm_skeleton(panels, 1.0, NoiseSpec::new(2024, j))
            .unwrap()
            .path;
        end.push(*path.values().last().unwrap());
    }
    let check = |q: f64| {
        let samples: Vec<f64> = end.iter().map(|g| g.powf(q)).collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        let exact = gbm_moment(q, 1.0).unwrap();
        assert!(
            (mean - exact).abs() < 3.0 * se,
            "q={q}: {mean} vs {exact} ± {se}"
        );
    };
    check(1.0);
    check(2.0);
}

#[test]
fn noise_streams_are_reproducible_and_distinct() {
    let a = NoiseSpec::new(1, 0).normals(32);
    assert_eq!(a, NoiseSpec::new(1, 0).normals(32));
    assert_ne!(a, NoiseSpec::new(1, 1).normals(32));
    assert_ne!(a, NoiseSpec::new(2, 0).normals(32));
}
