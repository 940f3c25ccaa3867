use skpha::harness::checks::lambda_bound_scan;
use skpha::legendre::{inf_convolution_check, terminal_entropy, DualEntropy};
use skpha::parisi::{solve_pde, ParisiMeasure, PdeGrid};
use std::sync::Arc;

fn dual(beta: f64, gamma: f64) -> DualEntropy {
    let mu = ParisiMeasure::uniform(20, (0..=20).map(|i| i as f64 / 20.0).collect()).unwrap();
    DualEntropy::new(Arc::new(solve_pde(&mu, beta, &PdeGrid::default()).unwrap()), gamma).unwrap()
}

#[test]
fn terminal_curvature_is_one_minus_y_squared() {
    let de = dual(1.0, 0.0);
    for y in [-0.9, -0.5, 0.0, 0.3, 0.8] {
        let v = de.eval_v(1.0, y).unwrap();
        assert!((v - (1.0 - y * y)).abs() < 1e-4, "y={y}: {v}");
        let value = de.eval_lambda(1.0, y).unwrap().value;
        assert!((value - terminal_entropy(y)).abs() < 1e-7);
    }
}

#[test]
fn regularization_lowers_the_entropy_and_shifts_the_minimizer() {
    let de = dual(1.5, 0.01);
    let plain = de.with_gamma(0.0).unwrap();
    for (t, y) in [(0.2, -0.7), (0.5, 0.3), (0.9, 0.6)] {
        let reg = de.eval_lambda(t, y).unwrap();
        assert!(reg.value <= plain.eval_lambda(t, y).unwrap().value + 1e-12);
        let conv = inf_convolution_check(&de, t, y).unwrap();
        assert!((reg.value - conv.value).abs() < 1e-4, "({t}, {y})");
        assert!((conv.argmin - (y - 0.01 * reg.d1)).abs() < 1e-6, "({t}, {y})");
    }
}

#[test]
fn regularized_entropy_converges_uniformly() {
    let de = dual(1.0, 0.0);
    let mut prev = f64::INFINITY;
    for gamma in [1e-1, 1e-2, 1e-3] {
        let reg = de.with_gamma(gamma).unwrap();
        let mut sup: f64 = 0.0;
        for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
            for j in 0..=40 {
                let y = -0.95 + 1.9 * j as f64 / 40.0;
                let gap = de.eval_lambda(t, y).unwrap().value - reg.eval_lambda(t, y).unwrap().value;
                assert!(gap >= -1e-12);
                sup = sup.max(gap);
            }
        }
        assert!(sup < prev, "γ={gamma}: {sup} ≥ {prev}");
        prev = sup;
    }
    assert!(prev < 5e-3, "{prev}");
}

#[test]
fn derivative_bounds_hold_on_a_grid() {
    for (beta, gamma) in [(1.0, 1e-2), (2.0, 1e-3)] {
        let scan = lambda_bound_scan(&dual(beta, gamma), 12, 25, 1e-6).unwrap();
        assert_eq!(scan.points, 300);
        assert_eq!(scan.curvature_violations, 0, "{scan:?}");
        assert_eq!(scan.third_violations, 0, "{scan:?}");
        assert!(scan.space_lipschitz_ratio <= 1.0, "{scan:?}");
        assert!(scan.time_lipschitz_ratio <= 1.0, "{scan:?}");
    }
}
