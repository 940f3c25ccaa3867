//! Measurements shared by `skpha verify` and the acceptance tests. Each function
//! returns raw numbers; thresholds are applied by the caller.

use crate::baseline;
use crate::error::{Error, Result};
use crate::instance::SkInstance;
use crate::legendre::{terminal_entropy, DualEntropy};
use crate::parisi::{heat_solution, hopf_cole_checked, solve_pde, ParisiMeasure, ParisiSolution, PdeGrid};
use crate::pha::{round_bernoulli, run_pha, PhaParams};
use crate::potential::Objective;
use crate::quad::{log2cosh, GaussHermite};
use crate::rng;
use crate::spectral::{build_covariance, free_edge, Backend, TraceEstimator};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// `|Λ(1, 0) + log 2|` and `max_{y = ±0.999} |Λ(1, y) − Λ_terminal(y)|`.
pub fn terminal_entropy_errors(sol: Arc<ParisiSolution>) -> Result<(f64, f64)> {
    let de = DualEntropy::new(sol, 0.0)?;
    let at_zero = (de.eval_lambda(1.0, 0.0)?.value + std::f64::consts::LN_2).abs();
    let mut edge: f64 = 0.0;
    for y in [-0.999, 0.999] {
        edge = edge.max((de.eval_lambda(1.0, y)?.value - terminal_entropy(y)).abs());
    }
    Ok((at_zero, edge))
}

/// Largest `|Φ − exact|` over every time row and the nodes with `|x| ≤ x_max`.
pub fn sup_error_against(sol: &ParisiSolution, x_max: f64, exact: impl Fn(f64, f64) -> f64) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, &t) in sol.t_grid().iter().enumerate() {
        let row = sol.phi_row(k);
        for (i, phi) in row.iter().enumerate() {
            let x = sol.x(i);
            if x.abs() <= x_max {
                worst = worst.max((phi - exact(t, x)).abs());
            }
        }
    }
    worst
}

/// Sup error of the `δ₀` solution against `log(2cosh x) + β²(1 − t)` on `|x| ≤ 6`.
pub fn replica_symmetric_error(beta: f64, grid: &PdeGrid) -> Result<f64> {
    let sol = solve_pde(&ParisiMeasure::delta0(), beta, grid)?;
    Ok(sup_error_against(&sol, 6.0, |t, x| log2cosh(x) + beta * beta * (1.0 - t)))
}

/// Gauss–Hermite order for the heat oracle; its quadrature error is below 2e-9 for
/// `β ≤ 1` (checked in the tests against order 160).
pub const HEAT_ORDER: usize = 80;

/// Sup error of the `δ₁` solution against the Gauss–Hermite heat solution on `|x| ≤ 6`,
/// sampled on every `stride`-th time row. Both are even in `x`, so the oracle is
/// evaluated once per mirror pair of nodes.
pub fn heat_error(beta: f64, grid: &PdeGrid, stride: usize) -> Result<f64> {
    let sol = solve_pde(&ParisiMeasure::delta1(), beta, grid)?;
    let gh = GaussHermite::new(HEAT_ORDER)?;
    let c = sol.center();
    let mut worst: f64 = 0.0;
    for k in (0..sol.n_t()).step_by(stride.max(1)) {
        let t = sol.t_grid()[k];
        let row = sol.phi_row(k);
        for i in c..sol.n_x() {
            let x = sol.x(i);
            if x > 6.0 {
                break;
            }
            let exact = heat_solution(beta, t, x, &gh);
            let mirror = row.get(2 * c - i).copied().unwrap_or(row[i]);
            worst = worst.max((row[i] - exact).abs()).max((mirror - exact).abs());
        }
    }
    Ok(worst)
}

/// PDE against the Hopf–Cole recursion for an atomic measure at `(t₀, x)` pairs.
pub fn hopf_cole_errors(atoms: &[(f64, f64)], beta: f64, grid: &PdeGrid, points: &[(f64, f64)]) -> Result<Vec<f64>> {
    let mu = ParisiMeasure::from_atoms(atoms)?;
    let sol = solve_pde(&mu, beta, grid)?;
    points
        .iter()
        .map(|&(t0, x)| {
            let later: Vec<(f64, f64)> = atoms.iter().copied().filter(|&(t, _)| t > t0).collect();
            Ok((sol.eval(t0, x).phi - hopf_cole_checked(&later, beta, t0, x, 60, 1e-9)?).abs())
        })
        .collect()
}

/// Top eigenvalue of `2βA_sym − D` and the predicted edge, with `Dᵢ ~ U[lo, hi]`.
pub fn free_edge_trial(n: usize, beta: f64, lo: f64, hi: f64, seed: u64) -> Result<(f64, f64)> {
    let inst = SkInstance::sample(n, seed)?;
    let mut r = rng::stream(seed, rng::domain::MISC);
    let d: Vec<f64> = (0..n).map(|_| r.gen_range(lo..hi)).collect();
    let mut m = inst.a_sym_mat();
    for j in 0..n {
        for i in 0..n {
            m[(i, j)] *= 2.0 * beta;
        }
        m[(j, j)] -= d[j];
    }
    let eig = m
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::Internal(format!("eigenvalues failed: {e:?}")))?;
    let top = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((top, free_edge(&d, beta)?))
}

/// Scan of the `Λ_γ` derivative bounds on a `(t, y)` grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LambdaScan {
    pub points: usize,
    /// Points with `∂_yyΛ_γ` outside `[1/(1+γ), 1/γ]` by more than the slack.
    pub curvature_violations: usize,
    /// Points with `|∂_yyyΛ_γ| > 2/γ²` by more than the slack.
    pub third_violations: usize,
    /// Largest finite-difference `|∂_y v| / 2`.
    pub space_lipschitz_ratio: f64,
    /// Largest finite-difference `|∂_t v| / (14β²)`.
    pub time_lipschitz_ratio: f64,
}

pub fn lambda_bound_scan(de: &DualEntropy, nt: usize, ny: usize, slack: f64) -> Result<LambdaScan> {
    use rayon::prelude::*;
    let (gamma, beta) = (de.gamma(), de.beta());
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument("the bound scan needs gamma > 0".into()));
    }
    let (hy, ht) = (1e-4, 1e-3);
    let ts: Vec<f64> = (0..nt).map(|i| ht + (0.98 - ht) * i as f64 / (nt - 1).max(1) as f64).collect();
    let ys: Vec<f64> = (0..ny).map(|j| -0.98 + 1.96 * j as f64 / (ny - 1).max(1) as f64).collect();
    let rows: Vec<LambdaScan> = ts
        .par_iter()
        .map(|&t| -> Result<LambdaScan> {
            let mut s = LambdaScan::default();
            for &y in &ys {
                let p = de.eval_lambda(t, y)?;
                s.points += 1;
                if p.d2 < 1.0 / (1.0 + gamma) - slack || p.d2 > 1.0 / gamma + slack {
                    s.curvature_violations += 1;
                }
                if p.d3.abs() > 2.0 / (gamma * gamma) + slack {
                    s.third_violations += 1;
                }
                let dy = (de.eval_v(t, y + hy)? - de.eval_v(t, y - hy)?) / (2.0 * hy);
                let dt = (de.eval_v(t + ht, y)? - de.eval_v(t - ht, y)?) / (2.0 * ht);
                s.space_lipschitz_ratio = s.space_lipschitz_ratio.max(dy.abs() / 2.0);
                s.time_lipschitz_ratio = s.time_lipschitz_ratio.max(dt.abs() / (14.0 * beta * beta));
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().fold(LambdaScan::default(), |a, b| LambdaScan {
        points: a.points + b.points,
        curvature_violations: a.curvature_violations + b.curvature_violations,
        third_violations: a.third_violations + b.third_violations,
        space_lipschitz_ratio: a.space_lipschitz_ratio.max(b.space_lipschitz_ratio),
        time_lipschitz_ratio: a.time_lipschitz_ratio.max(b.time_lipschitz_ratio),
    }))
}

/// Covariance quality at the iterate halfway through a run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceDiagnostics {
    pub n: usize,
    pub t: f64,
    /// `(1/n) tr Q²`.
    pub trace: f64,
    /// Normalized `‖diag Q² − 2β² D⁻²‖₂`.
    pub diag_error: f64,
    /// Normalized `‖(H − shift) Q‖_HS`.
    pub residual: f64,
}

impl CovarianceDiagnostics {
    /// Coordinatewise average of runs at the same `n`.
    pub fn mean(rows: &[Self]) -> Self {
        let k = rows.len() as f64;
        let avg = |f: fn(&Self) -> f64| rows.iter().map(f).sum::<f64>() / k;
        Self {
            n: rows.first().map_or(0, |r| r.n),
            t: avg(|r| r.t),
            trace: avg(|r| r.trace),
            diag_error: avg(|r| r.diag_error),
            residual: avg(|r| r.residual),
        }
    }
}

/// Runs the ascent for half its steps, then measures `Q²` at the last iterate with
/// the dense backend.
pub fn covariance_diagnostics(obj: &Objective, params: &PhaParams) -> Result<CovarianceDiagnostics> {
    let mut p = params.clone();
    let half = p.step_count(obj.measure().q_star()) / 2;
    p.steps = Some(half);
    let traj = run_pha(obj, &p)?;
    let sigma = traj.iterates.last().expect("trajectory has an initial iterate");
    let t = half as f64 * p.eta;
    let cov = build_covariance(obj.instance().clone(), obj.dual(), t, sigma, p.delta, Backend::Dense, None)?;
    Ok(CovarianceDiagnostics {
        n: obj.n(),
        t,
        trace: cov.trace_normalized(TraceEstimator::Exact)?,
        diag_error: cov.diag_error()?,
        residual: cov.approx_eigvec_residual(TraceEstimator::Exact)?,
    })
}

/// Fraction of `roundings` Bernoulli roundings of `sigma` with
/// `H(σ*) < H(σ) − 4‖A‖_op n^{1−α}`.
pub fn rounding_failure_rate(inst: &SkInstance, sigma: &[f64], alpha: f64, roundings: usize, seed: u64) -> Result<f64> {
    let n = inst.n() as f64;
    let floor = inst.hamiltonian(sigma)? - 4.0 * inst.op_norm() * n.powf(1.0 - alpha);
    let mut fails = 0;
    for k in 0..roundings {
        let mut r = rng::stream(seed, rng::domain::ROUNDING + 1 + k as u64);
        let s = round_bernoulli(sigma, &mut r)?;
        if inst.hamiltonian(&s)? < floor {
            fails += 1;
        }
    }
    Ok(fails as f64 / roundings as f64)
}

/// Gray-code search against plain enumeration: `(gray, naive)` maxima of `H`.
pub fn exhaustive_agreement(n: usize, seed: u64) -> Result<(f64, f64)> {
    let inst = SkInstance::sample(n, seed)?;
    Ok((baseline::brute_force_max(&inst)?.hamiltonian, baseline::naive_max(&inst)?.hamiltonian))
}
