use num_complex::Complex64;
use skpha::harness::checks::free_edge_trial;
use skpha::legendre::DualEntropy;
use skpha::parisi::{solve_pde, ParisiMeasure, PdeGrid};
use skpha::spectral::*;
use skpha::SkInstance;
use std::sync::Arc;

#[test]
fn top_eigenvalue_matches_the_free_edge() {
    let (top, edge) = free_edge_trial(2000, 1.5, 0.5, 3.0, 4).unwrap();
    assert!((top - edge).abs() <= 0.05, "{top} vs {edge}");
}

#[test]
fn shift_bound_on_the_real_part() {
    for (c, beta) in [(vec![0.4, 1.0, 2.5, 6.0], 1.8), (vec![1.0; 7], 2.0), (vec![0.3, 0.31, 5.0], 2.5)] {
        let (d, _) = normalize_diagonal(&c, beta);
        let tz = compute_tilde_z(&d, beta, 1.0 / 22.0).unwrap();
        let n = d.len() as f64;
        let tr = |p: i32| d.iter().map(|x| x.powi(-p)).sum::<f64>() / n;
        let bound = 2.0 * beta * beta * tz.b * tz.b * tr(3);
        let g = cauchy_transform(&d, Complex64::new(0.0, tz.b)).unwrap();
        let real_gap = 2.0 * beta * beta * g.re;
        assert!((real_gap - tz.a_tilde).abs() < 1e-14);
        let gap = 2.0 * beta * beta * tr(1) - tz.a_tilde;
        assert!(gap >= -1e-14 && gap <= bound + 1e-14, "{gap} > {bound}");
    }
}

#[test]
fn constant_diagonal_imaginary_part_bound() {
    for beta in [1.0, 1.75, 3.0] {
        let d = vec![2f64.sqrt() * beta; 5];
        for frac in [0.1, 0.5, 0.99] {
            let b = frac * beta / 3f64.sqrt();
            let g = cauchy_transform(&d, Complex64::new(0.0, b)).unwrap();
            let b_tilde = b + 2.0 * beta * beta * g.im;
            assert!(b_tilde >= 2.0 * b.powi(3) / (9.0 * beta * beta) - 1e-14);
        }
    }
}

#[test]
fn origin_gives_the_flat_diagonal() {
    let beta = 2.0;
    let mu = ParisiMeasure::uniform(20, (0..=20).map(|i| i as f64 / 20.0).collect()).unwrap();
    let de = DualEntropy::new(Arc::new(solve_pde(&mu, beta, &PdeGrid::default()).unwrap()), 1e-3).unwrap();
    let (d, _) = build_normalized_d(&de, 0.3, &[0.0; 50], None).unwrap();
    assert!(d.iter().all(|x| (x - 2f64.sqrt() * beta).abs() < 1e-12));
}

fn operator(n: usize, backend: Backend) -> CovarianceOperator {
    let beta = 2.0;
    let inst = Arc::new(SkInstance::sample(n, 5).unwrap());
    let c: Vec<f64> = (0..n).map(|i| 1.0 + (i % 7) as f64 * 0.4).collect();
    let (d, s) = normalize_diagonal(&c, beta);
    let sigma: Vec<f64> = (0..n).map(|i| ((i * 11 % 9) as f64 - 4.0) / 5.0).collect();
    let mut op = CovarianceOperator::from_diagonal(inst, d, s, &sigma, beta, 1.0 / 22.0, backend).unwrap();
    op.lanczos_tol = 1e-12;
    op
}

#[test]
fn backends_agree_on_the_residual() {
    let a = operator(150, Backend::Dense);
    let b = operator(150, Backend::MatrixFree);
    let ra = a.approx_eigvec_residual(TraceEstimator::Exact).unwrap();
    let rb = b.approx_eigvec_residual(TraceEstimator::Exact).unwrap();
    assert!((ra - rb).abs() <= 1e-6, "{ra} vs {rb}");
}

#[test]
fn operator_norm_stays_below_the_bound() {
    let op = operator(120, Backend::Dense);
    let m = op.materialize().unwrap();
    let mat = faer::Mat::<f64>::from_fn(120, 120, |i, j| m[i * 120 + j]);
    let eig = mat.self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
    let norm = eig.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    assert!(eig.iter().all(|&x| x >= -1e-10));
    assert!(norm <= op.op_norm_bound() * (1.0 + 1e-10), "{norm} > {}", op.op_norm_bound());
    let flat = operator(120, Backend::MatrixFree);
    assert!(op.op_norm_bound() <= flat.op_norm_bound() * (1.0 + 1e-12));
}
