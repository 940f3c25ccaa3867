use skpha::rng;
use skpha::sampler::*;
use skpha::spectral::{normalize_diagonal, Backend, CovarianceOperator};
use skpha::{Error, SkInstance};
use std::sync::Arc;

fn operator(n: usize, backend: Backend) -> CovarianceOperator {
    let inst = Arc::new(SkInstance::sample(n, 12).unwrap());
    let c: Vec<f64> = (0..n).map(|i| 0.8 + 0.3 * ((i * 5 % 7) as f64)).collect();
    let (d, s) = normalize_diagonal(&c, 2.0);
    let sigma: Vec<f64> = (0..n).map(|i| ((i * 3 % 11) as f64 - 5.0) / 6.0).collect();
    CovarianceOperator::from_diagonal(inst, d, s, &sigma, 2.0, 1.0 / 22.0, backend).unwrap()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Two-sample energy statistic on the pooled set, split at `k`.
fn energy_statistic(pool: &[Vec<f64>], dists: &[f64], order: &[usize], k: usize) -> f64 {
    let m = pool.len();
    let d = |i: usize, j: usize| dists[order[i] * m + order[j]];
    let (mut xy, mut xx, mut yy) = (0.0, 0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            match (i < k, j < k) {
                (true, false) => xy += d(i, j),
                (true, true) => xx += d(i, j),
                (false, false) => yy += d(i, j),
                _ => {}
            }
        }
    }
    let (nx, ny) = (k as f64, (m - k) as f64);
    2.0 * xy / (nx * ny) - xx / (nx * nx) - yy / (ny * ny)
}

#[test]
fn exact_and_iterative_samples_share_a_distribution() {
    use rand::seq::SliceRandom;
    let n = 32;
    let dense = operator(n, Backend::Dense);
    let free = operator(n, Backend::MatrixFree);
    let k = 200usize;
    let mut pool: Vec<Vec<f64>> = (0..k).map(|i| sample_exact(&dense, &mut rng::stream(1, i as u64)).unwrap()).collect();
    pool.extend((0..k).map(|i| sample_iterative(&free, &mut rng::stream(2, i as u64), 1e-6).unwrap().0));
    let m = pool.len();
    let dists: Vec<f64> = (0..m * m).map(|ij| dist(&pool[ij / m], &pool[ij % m])).collect();
    let mut order: Vec<usize> = (0..m).collect();
    let observed = energy_statistic(&pool, &dists, &order, k);
    let mut r = rng::stream(3, 0);
    let perms = 299;
    let exceed = (0..perms)
        .filter(|_| {
            order.shuffle(&mut r);
            energy_statistic(&pool, &dists, &order, k) >= observed
        })
        .count();
    let p_value = (exceed + 1) as f64 / (perms + 1) as f64;
    assert!(p_value > 0.01, "p = {p_value}");
}

#[test]
fn exhausted_iteration_budget_reports_the_residual() {
    let mut cov = operator(64, Backend::MatrixFree);
    cov.lanczos_max_iter = 2;
    let g = standard_normal(64, &mut rng::stream(4, 0));
    match apply_factor_iterative(&cov, &g, 1e-12) {
        Err(Error::NotConverged { iterations, achieved }) => {
            assert_eq!(iterations, 2);
            assert!(achieved > 1e-12);
        }
        other => panic!("expected a budget error, got {other:?}"),
    }
}
