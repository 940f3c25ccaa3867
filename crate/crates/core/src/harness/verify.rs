//! The invariant suite run by `skpha verify`.

use super::checks;
use super::config::Suite;
use crate::error::Result;
use crate::instance::SkInstance;
use crate::legendre::DualEntropy;
use crate::parisi::{minimize_measure, solve_pde, MinimizeOptions, ParisiMeasure, PdeGrid};
use crate::pha::PhaParams;
use crate::potential::Objective;
use crate::rng;
use crate::sde::{self, SimConfig};
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::sync::Arc;
use std::time::Instant;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    /// Headline number compared against `threshold`.
    pub value: f64,
    pub threshold: Option<f64>,
    /// `None` for quantities that are recorded but not thresholded.
    pub pass: Option<bool>,
    pub detail: Value,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seeds: Vec<u64>,
    pub checks: Vec<CheckResult>,
    pub seconds: f64,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass != Some(false))
    }

    pub fn summary(&self) -> Value {
        let count = |p: Option<bool>| self.checks.iter().filter(|c| c.pass == p).count();
        json!({
            "suite": self.suite,
            "passed": count(Some(true)),
            "failed": count(Some(false)),
            "recorded": count(None),
            "failures": self.checks.iter().filter(|c| c.pass == Some(false)).map(|c| c.name.clone()).collect::<Vec<_>>(),
            "seconds": self.seconds,
        })
    }
}

struct Runner {
    checks: Vec<CheckResult>,
}

impl Runner {
    fn run(&mut self, name: &str, f: impl FnOnce() -> Result<(f64, Option<f64>, Option<bool>, Value)>) -> Result<()> {
        let clock = Instant::now();
        let (value, threshold, pass, detail) = f()?;
        self.checks.push(CheckResult {
            name: name.into(),
            value,
            threshold,
            pass,
            detail,
            seconds: clock.elapsed().as_secs_f64(),
        });
        Ok(())
    }
}

struct Sizes {
    oracle_paths: usize,
    edge_n: usize,
    edge_seeds: u64,
    scan: usize,
    cov_sizes: [usize; 3],
    intervals: usize,
    frsb_paths: usize,
    brute_n: usize,
}

fn sizes(suite: Suite) -> Sizes {
    match suite {
        Suite::Fast => Sizes {
            oracle_paths: 20_000,
            edge_n: 500,
            edge_seeds: 3,
            scan: 20,
            cov_sizes: [200, 400, 800],
            intervals: 40,
            frsb_paths: 10_000,
            brute_n: 14,
        },
        Suite::Full => Sizes {
            oracle_paths: 100_000,
            edge_n: 2000,
            edge_seeds: 10,
            scan: 50,
            cov_sizes: [500, 1000, 2000],
            intervals: 100,
            frsb_paths: 100_000,
            brute_n: 18,
        },
    }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().cloned().fold(0.0, f64::max)
}

/// Runs every check. Seeds are derived from `seed`, so the report is reproducible.
pub fn run_suite(suite: Suite, seed: u64) -> Result<VerifyReport> {
    let clock = Instant::now();
    let sz = sizes(suite);
    let grid = PdeGrid::default();
    let dt = 5e-4;
    let mut r = Runner { checks: Vec::new() };

    let rs = Arc::new(solve_pde(&ParisiMeasure::delta0(), 1.0, &grid)?);
    r.run("terminal_entropy", || {
        let (zero, edge) = checks::terminal_entropy_errors(rs.clone())?;
        Ok((zero, Some(1e-8), Some(zero <= 1e-8 && edge <= 1e-6), json!({ "at_zero": zero, "near_edge": edge })))
    })?;
    r.run("pde_replica_symmetric", || {
        let e = checks::replica_symmetric_error(1.0, &grid)?;
        Ok((e, Some(1e-3), Some(e <= 1e-3), json!({ "beta": 1.0 })))
    })?;
    r.run("pde_heat_kernel", || {
        let e = checks::heat_error(1.0, &grid, 20)?;
        Ok((e, Some(1e-3), Some(e <= 1e-3), json!({ "beta": 1.0 })))
    })?;
    r.run("pde_hopf_cole", || {
        let pts = [(0.0, 0.0), (0.0, 1.0), (0.0, 3.0), (0.5, 0.0), (0.5, 1.0), (0.5, 3.0)];
        let errs = checks::hopf_cole_errors(&[(0.5, 0.4), (1.0, 1.0)], 1.0, &grid, &pts)?;
        let e = max_of(&errs);
        Ok((e, Some(2e-3), Some(e <= 2e-3), json!({ "errors": errs })))
    })?;

    let heat = solve_pde(&ParisiMeasure::delta1(), 1.0, &grid)?;
    r.run("sde_derivative_oracle", || {
        let est = sde::sde_derivative_oracle(&heat, 0.5, 1.0, dt, sz.oracle_paths, seed)?;
        let z = (est.value - est.target).abs() / est.se;
        Ok((z, Some(3.0), Some(z <= 3.0), json!(est)))
    })?;

    let edge_seeds: Vec<u64> = (0..sz.edge_seeds).map(|s| seed + s).collect();
    r.run("free_convolution_edge", || {
        let mut gaps = Vec::new();
        for &s in &edge_seeds {
            let (top, edge) = checks::free_edge_trial(sz.edge_n, 1.0, 0.5, 2.0, s)?;
            gaps.push(top - edge);
        }
        let rate = gaps.iter().filter(|g| g.abs() <= 0.15).count() as f64 / gaps.len() as f64;
        Ok((rate, Some(0.9), Some(rate >= 0.9), json!({ "n": sz.edge_n, "gaps": gaps })))
    })?;

    let linear = ParisiMeasure::uniform(20, (0..=20).map(|i| i as f64 / 20.0).collect())?;
    r.run("lambda_derivative_bounds", || {
        let mut scans = Vec::new();
        let mut ok = true;
        let mut worst: f64 = 0.0;
        for beta in [1.0, 2.0] {
            let sol = Arc::new(solve_pde(&linear, beta, &grid)?);
            for gamma in [1e-2, 1e-3] {
                let s = checks::lambda_bound_scan(&DualEntropy::new(sol.clone(), gamma)?, sz.scan, sz.scan, 1e-9)?;
                ok &= s.curvature_violations == 0
                    && s.third_violations == 0
                    && s.space_lipschitz_ratio <= 1.1
                    && s.time_lipschitz_ratio <= 1.1;
                worst = worst.max(s.space_lipschitz_ratio).max(s.time_lipschitz_ratio);
                scans.push(json!({ "beta": beta, "gamma": gamma, "scan": s }));
            }
        }
        Ok((worst, Some(1.1), Some(ok), json!(scans)))
    })?;

    let beta = 2.0;
    let mu = minimize_measure(beta, &MinimizeOptions::new(sz.intervals))?.measure;
    let sol = Arc::new(solve_pde(&mu, beta, &grid)?);
    let de = DualEntropy::new(sol.clone(), 1e-3)?;

    let cov_seeds: Vec<u64> = (0..3).map(|s| seed + s).collect();
    let mut cov_rows = Vec::new();
    let mut cov_means: Vec<checks::CovarianceDiagnostics> = Vec::new();
    r.run("covariance_diag_and_residual_decrease", || {
        for &n in &sz.cov_sizes {
            let mut rows = Vec::new();
            for &s in &cov_seeds {
                let obj = Objective::new(Arc::new(SkInstance::sample(n, s)?), de.clone(), beta)?;
                let mut p = PhaParams::new(beta);
                p.seed = s;
                rows.push(checks::covariance_diagnostics(&obj, &p)?);
            }
            cov_means.push(checks::CovarianceDiagnostics::mean(&rows));
            cov_rows.extend(rows);
        }
        let dec = |f: fn(&checks::CovarianceDiagnostics) -> f64| cov_means.windows(2).all(|w| f(&w[1]) < f(&w[0]));
        let ok = dec(|c| c.diag_error) && dec(|c| c.residual);
        let last = cov_means.last().map(|c| c.diag_error).unwrap_or(f64::NAN);
        Ok((last, None, Some(ok), json!({ "seeds": cov_seeds, "means": cov_means, "rows": cov_rows })))
    })?;
    r.run("covariance_trace", || {
        let t = cov_means.last().map(|c| c.trace).unwrap_or(f64::NAN);
        Ok((t, Some(1.0), None, json!({ "deviation": (t - 1.0).abs(), "means": cov_means })))
    })?;

    let q = mu.q_star();
    let on_grid = |x: f64| (x / dt).round() * dt;
    let times: Vec<f64> = [0.1, 0.5, 0.9].iter().map(|f| on_grid(f * q)).collect();
    let exact = de.with_gamma(0.0)?;
    let cfg = SimConfig::new(on_grid(q), sz.frsb_paths, seed).with_dt(dt).recording({
        let mut t = times.clone();
        t.push(on_grid(q));
        t
    });
    let ens = sde::simulate_primal(&exact, &cfg)?;
    r.run("frsb_identities", || {
        let rows: Vec<_> = times.iter().map(|&t| sde::frsb_identities(&ens, &mu, t)).collect();
        let ok = rows.iter().all(|c| c.all_within(3.0, 2.0 * dt));
        let worst = rows
            .iter()
            .flat_map(|c| [c.second_moment, c.scaled_coef_sq, c.coef_mean])
            .map(|e| (e.value - e.target).abs() / (3.0 * e.se + 2.0 * dt))
            .fold(0.0, f64::max);
        Ok((worst, Some(1.0), Some(ok), json!({ "gamma": 0.0, "q_star": q, "rows": rows })))
    })?;
    r.run("ito_isometry", || {
        let gaps = sde::ito_isometry_gap(&ens);
        let m = ens.moments.last().expect("ensemble has steps");
        let se = sde::standard_error(m.second, m.fourth, ens.paths());
        let (_, var, iso) = *gaps.last().expect("ensemble has steps");
        let z = (var - iso).abs() / (3.0 * se + 2.0 * dt);
        Ok((z, Some(1.0), Some(z <= 1.0), json!({ "variance": var, "isometry": iso, "se": se })))
    })?;
    r.run("entropy_along_process", || {
        let rep = sde::entropy_along_process(&exact, &ens, on_grid(q))?;
        let e = rep.estimate;
        let z = (e.value - e.target).abs() / (3.0 * e.se + 2.0 * dt);
        Ok((z, Some(1.0), Some(z <= 1.0), json!(rep)))
    })?;
    r.run("mgf_bound", || {
        let t_end = on_grid(0.5 * q);
        let dual = sde::simulate_dual(&sol, &SimConfig::new(t_end, sz.frsb_paths, seed).with_dt(dt).recording(vec![t_end]))?;
        let mut rows = Vec::new();
        let mut ok = true;
        for lambda in [-2.0, -1.0, 1.0, 2.0] {
            let e = sde::mgf_check(&dual, lambda, t_end)?;
            ok &= e.value <= e.target + 3.0 * e.se;
            rows.push(json!({ "lambda": lambda, "estimate": e }));
        }
        Ok((if ok { 1.0 } else { 0.0 }, None, Some(ok), json!(rows)))
    })?;

    r.run("gamma_closeness", || {
        let rs_de = DualEntropy::new(rs.clone(), 1e-3)?;
        let cfg = SimConfig::new(0.5, sz.frsb_paths, seed).with_dt(dt).recording(vec![0.5]);
        let row = sde::gamma_closeness_check(&rs_de, &cfg)?[0];
        let limit = row.bound + 3.0 * row.se;
        Ok((row.distance, Some(limit), Some(row.distance <= limit), json!(row)))
    })?;

    r.run("rounding_fluctuation", || {
        let inst = SkInstance::sample(500, seed)?;
        let mut g = rng::stream(seed, rng::domain::MISC + 1);
        let sigma: Vec<f64> = (0..500).map(|_| g.gen_range(-1.0..=1.0)).collect();
        let rate = checks::rounding_failure_rate(&inst, &sigma, 0.25, 200, seed)?;
        Ok((rate, Some(0.05), Some(rate <= 0.05), json!({ "n": 500, "alpha": 0.25, "roundings": 200 })))
    })?;

    r.run("exhaustive_search", || {
        let (gray, naive) = checks::exhaustive_agreement(sz.brute_n, seed)?;
        let gap = (gray - naive).abs();
        Ok((gap, Some(1e-9), Some(gap <= 1e-9 * naive.abs().max(1.0)), json!({ "n": sz.brute_n, "max": naive })))
    })?;

    let mut seeds: Vec<u64> = edge_seeds.iter().chain(&cov_seeds).copied().collect();
    seeds.sort_unstable();
    seeds.dedup();
    Ok(VerifyReport { suite, seeds, checks: r.checks, seconds: clock.elapsed().as_secs_f64() })
}
