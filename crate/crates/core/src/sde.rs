//! Euler–Maruyama simulation of the primal process `dY = √2β v(t, Y) dW` and the
//! dual process `dX = 2β² F(t) ∂ₓΦ(t, X) dt + √2β dW`, plus the checks built on them.
//!
//! Each path draws its increments from its own stream, so two ensembles built with
//! the same seed and step share their Brownian motion path by path.

use crate::error::{Error, Result};
use crate::legendre::DualEntropy;
use crate::parisi::{ParisiMeasure, ParisiSolution};
use crate::pha::PhaTrajectory;
use crate::rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const BLOCK: usize = 256;

/// Time stepping and output of a simulation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub dt: f64,
    pub t0: f64,
    pub t_end: f64,
    /// Common starting point of every path.
    pub start: f64,
    pub paths: usize,
    pub seed: u64,
    /// Times at which all path values are kept. Each must lie on the step grid.
    pub record_times: Vec<f64>,
}

impl SimConfig {
    pub fn new(t_end: f64, paths: usize, seed: u64) -> Self {
        Self { dt: 5e-4, t0: 0.0, t_end, start: 0.0, paths, seed, record_times: vec![t_end] }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn starting_at(mut self, t0: f64, start: f64) -> Self {
        self.t0 = t0;
        self.start = start;
        self
    }

    pub fn recording(mut self, times: Vec<f64>) -> Self {
        self.record_times = times;
        self
    }

    fn grid_index(&self, t: f64) -> Result<usize> {
        let k = ((t - self.t0) / self.dt).round();
        if k < 0.0 || (self.t0 + k * self.dt - t).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("time {t} is not on the step grid of size {}", self.dt)));
        }
        Ok(k as usize)
    }

    fn validate(&self) -> Result<(usize, Vec<usize>)> {
        if !(self.dt > 0.0) || self.paths == 0 {
            return Err(Error::InvalidArgument("need a positive step and at least one path".into()));
        }
        if !(self.t_end >= self.t0) {
            return Err(Error::InvalidArgument(format!("end time {} precedes start {}", self.t_end, self.t0)));
        }
        let steps = self.grid_index(self.t_end)?;
        let mut idx = Vec::with_capacity(self.record_times.len());
        for &t in &self.record_times {
            let k = self.grid_index(t)?;
            if k > steps {
                return Err(Error::InvalidArgument(format!("record time {t} is past the end {}", self.t_end)));
            }
            idx.push(k);
        }
        Ok((steps, idx))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Process {
    Primal,
    Dual,
}

/// Sample moments at one time step. For the primal process `value` is `Y` and
/// `coef` is `v(t, Y)`; for the dual process they are `X` and `∂ₓₓΦ(t, X)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepMoments {
    pub t: f64,
    pub mean: f64,
    pub second: f64,
    pub fourth: f64,
    pub coef_mean: f64,
    pub coef_second: f64,
    pub coef_fourth: f64,
}

impl StepMoments {
    pub fn variance(&self) -> f64 {
        self.second - self.mean * self.mean
    }
}

/// Standard error of the sample mean of a quantity with moments `m1`, `m2`.
pub fn standard_error(m1: f64, m2: f64, count: usize) -> f64 {
    ((m2 - m1 * m1).max(0.0) / count as f64).sqrt()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SdeEnsemble {
    pub process: Process,
    pub beta: f64,
    pub gamma: f64,
    pub config: SimConfig,
    /// One entry per step, `t0` through `t_end`.
    pub moments: Vec<StepMoments>,
    /// Path values at each record time, in the order of `config.record_times`.
    pub snapshots: Vec<Vec<f64>>,
    /// Steps at which a primal path left `[−1, 1]` and was clamped (γ = 0 only).
    pub clamp_events: usize,
}

impl SdeEnsemble {
    pub fn paths(&self) -> usize {
        self.config.paths
    }

    pub fn record_times(&self) -> &[f64] {
        &self.config.record_times
    }

    /// Path values at record time `t`.
    pub fn snapshot(&self, t: f64) -> Result<&[f64]> {
        self.config
            .record_times
            .iter()
            .position(|&r| (r - t).abs() <= 1e-9)
            .map(|i| self.snapshots[i].as_slice())
            .ok_or_else(|| Error::InvalidArgument(format!("no snapshot at t = {t}")))
    }

    /// Moments at the step nearest to `t`.
    pub fn moments_at(&self, t: f64) -> &StepMoments {
        let k = ((t - self.config.t0) / self.config.dt).round().clamp(0.0, (self.moments.len() - 1) as f64);
        &self.moments[k as usize]
    }

    /// Writes `t, E value², E coef, E coef², q05, q50, q95` per step; quantiles are
    /// filled only at record times.
    pub fn write_summary_csv(&self, mut w: impl std::io::Write) -> Result<()> {
        writeln!(w, "t,second_moment,coef_mean,coef_second,q05,q50,q95")?;
        for m in &self.moments {
            let q = match self.snapshot(m.t) {
                Ok(s) => {
                    let mut v = s.to_vec();
                    v.sort_by(f64::total_cmp);
                    let at = |p: f64| v[((v.len() - 1) as f64 * p).round() as usize];
                    [at(0.05), at(0.5), at(0.95)]
                }
                Err(_) => [f64::NAN; 3],
            };
            writeln!(w, "{},{},{},{},{},{},{}", m.t, m.second, m.coef_mean, m.coef_second, q[0], q[1], q[2])?;
        }
        Ok(())
    }
}

struct BlockOut {
    sums: Vec<[f64; 6]>,
    snaps: Vec<Vec<f64>>,
    clamps: usize,
}

/// Runs `paths` independent paths. `step_fn(t, value, state)` returns the moment
/// coefficient, the drift and the diffusion coefficient at `(t, value)`.
fn simulate<S: Copy + Send + Sync>(
    cfg: &SimConfig,
    init: S,
    clamp_unit: bool,
    step_fn: impl Fn(f64, f64, &mut S) -> Result<(f64, f64, f64)> + Sync,
) -> Result<(Vec<StepMoments>, Vec<Vec<f64>>, usize)> {
    let (steps, rec_idx) = cfg.validate()?;
    let sqrt_dt = cfg.dt.sqrt();
    let mut slots = vec![Vec::new(); steps + 1];
    for (j, &k) in rec_idx.iter().enumerate() {
        slots[k].push(j);
    }
    let blocks: Vec<(usize, usize)> =
        (0..cfg.paths).step_by(BLOCK).map(|s| (s, (s + BLOCK).min(cfg.paths))).collect();

    let outs: Vec<BlockOut> = blocks
        .par_iter()
        .map(|&(lo, hi)| -> Result<BlockOut> {
            let mut sums = vec![[0.0; 6]; steps + 1];
            let mut snaps = vec![Vec::with_capacity(hi - lo); rec_idx.len()];
            let mut clamps = 0;
            for p in lo..hi {
                let mut r = rng::stream(cfg.seed, rng::domain::SDE_PATH + p as u64);
                let mut x = cfg.start;
                let mut state = init;
                for k in 0..=steps {
                    let t = cfg.t0 + k as f64 * cfg.dt;
                    let (c, drift, diff) = step_fn(t, x, &mut state)?;
                    let s = &mut sums[k];
                    let (x2, c2) = (x * x, c * c);
                    s[0] += x;
                    s[1] += x2;
                    s[2] += x2 * x2;
                    s[3] += c;
                    s[4] += c2;
                    s[5] += c2 * c2;
                    for &j in &slots[k] {
                        snaps[j].push(x);
                    }
                    if k == steps {
                        break;
                    }
                    let z: f64 = StandardNormal.sample(&mut r);
                    x += drift * cfg.dt + diff * sqrt_dt * z;
                    if clamp_unit && x.abs() > 1.0 {
                        x = x.clamp(-1.0, 1.0);
                        clamps += 1;
                    }
                }
            }
            Ok(BlockOut { sums, snaps, clamps })
        })
        .collect::<Result<_>>()?;

    let count = cfg.paths as f64;
    let mut total = vec![[0.0; 6]; steps + 1];
    let mut snapshots = vec![Vec::with_capacity(cfg.paths); rec_idx.len()];
    let mut clamps = 0;
    for b in outs {
        for (t, s) in total.iter_mut().zip(&b.sums) {
            for j in 0..6 {
                t[j] += s[j];
            }
        }
        for (dst, src) in snapshots.iter_mut().zip(b.snaps) {
            dst.extend(src);
        }
        clamps += b.clamps;
    }
    let moments = total
        .iter()
        .enumerate()
        .map(|(k, s)| StepMoments {
            t: cfg.t0 + k as f64 * cfg.dt,
            mean: s[0] / count,
            second: s[1] / count,
            fourth: s[2] / count,
            coef_mean: s[3] / count,
            coef_second: s[4] / count,
            coef_fourth: s[5] / count,
        })
        .collect();
    Ok((moments, snapshots, clamps))
}

/// Paths of `dY = √2β v(t, Y) dW` with `v = 1/∂_yyΛ_γ`. For γ = 0 the coefficient
/// vanishes outside `(−1, 1)` and paths are clamped to `[−1, 1]`.
pub fn simulate_primal(de: &DualEntropy, cfg: &SimConfig) -> Result<SdeEnsemble> {
    let beta = de.beta();
    let gamma = de.gamma();
    let scale = 2f64.sqrt() * beta;
    let (moments, snapshots, clamp_events) = simulate(cfg, 0.0f64, gamma == 0.0, |t, y, hint| {
        if gamma == 0.0 && y.abs() >= 1.0 {
            return Ok((0.0, 0.0, 0.0));
        }
        let (v, x) = de.eval_v_from(t, y, Some(*hint))?;
        *hint = x;
        Ok((v, 0.0, scale * v))
    })?;
    Ok(SdeEnsemble { process: Process::Primal, beta, gamma, config: cfg.clone(), moments, snapshots, clamp_events })
}

/// Paths of `dX = 2β² F(t) ∂ₓΦ(t, X) dt + √2β dW`.
pub fn simulate_dual(sol: &ParisiSolution, cfg: &SimConfig) -> Result<SdeEnsemble> {
    let beta = sol.beta();
    let mu = sol.measure();
    let b2 = 2.0 * beta * beta;
    let scale = 2f64.sqrt() * beta;
    let (moments, snapshots, clamp_events) = simulate(cfg, (), false, |t, x, _| {
        let p = sol.eval(t, x);
        Ok((p.phi_xx, b2 * mu.f(t) * p.phi_x, scale))
    })?;
    Ok(SdeEnsemble { process: Process::Dual, beta, gamma: 0.0, config: cfg.clone(), moments, snapshots, clamp_events })
}

/// Maps dual snapshots to the primal side, `Y = ∂ₓΦ(t, X)`.
pub fn map_to_primal(sol: &ParisiSolution, ens: &SdeEnsemble) -> Result<Vec<Vec<f64>>> {
    if ens.process != Process::Dual {
        return Err(Error::InvalidArgument("expected a dual ensemble".into()));
    }
    Ok(ens
        .record_times()
        .iter()
        .zip(&ens.snapshots)
        .map(|(&t, xs)| xs.par_iter().map(|&x| sol.eval(t, x).phi_x).collect())
        .collect())
}

/// Exact 2-Wasserstein distance between two empirical measures on the line.
pub fn wasserstein2_1d(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument("empty sample set".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    if a.len() == b.len() {
        let s: f64 = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum();
        return Ok((s / a.len() as f64).sqrt());
    }
    // Integrate over the common refinement of the two quantile functions.
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let (mut u, mut s) = (0.0f64, 0.0f64);
    while i < a.len() && j < b.len() {
        let next = ((i + 1) as f64 / na).min((j + 1) as f64 / nb);
        s += (next - u) * (a[i] - b[j]).powi(2);
        u = next;
        if ((i + 1) as f64 / na - next).abs() <= 1e-15 {
            i += 1;
        }
        if ((j + 1) as f64 / nb - next).abs() <= 1e-15 {
            j += 1;
        }
    }
    Ok(s.max(0.0).sqrt())
}

/// Monte Carlo estimate with its standard error next to a reference value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
    pub target: f64,
}

impl Estimate {
    /// `|value − target| ≤ k·se + slack`.
    pub fn within(&self, k: f64, slack: f64) -> bool {
        (self.value - self.target).abs() <= k * self.se + slack
    }
}

/// `E tanh(X₁)` for the dual process started at `(t0, x0)`, against `∂ₓΦ(t0, x0)`.
pub fn sde_derivative_oracle(sol: &ParisiSolution, t0: f64, x0: f64, dt: f64, paths: usize, seed: u64) -> Result<Estimate> {
    let cfg = SimConfig::new(1.0, paths, seed).with_dt(dt).starting_at(t0, x0);
    let ens = simulate_dual(sol, &cfg)?;
    let th: Vec<f64> = ens.snapshot(1.0)?.iter().map(|x| x.tanh()).collect();
    let m1 = th.iter().sum::<f64>() / paths as f64;
    let m2 = th.iter().map(|x| x * x).sum::<f64>() / paths as f64;
    Ok(Estimate { value: m1, se: standard_error(m1, m2, paths), target: sol.eval(t0, x0).phi_x })
}

/// The three identities `E Y_t² = t`, `E 2β² v² = 1` and `E v = ∫ₜ¹ F`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrsbCheck {
    pub t: f64,
    pub second_moment: Estimate,
    pub scaled_coef_sq: Estimate,
    pub coef_mean: Estimate,
}

impl FrsbCheck {
    pub fn all_within(&self, k: f64, slack: f64) -> bool {
        self.second_moment.within(k, slack) && self.scaled_coef_sq.within(k, slack) && self.coef_mean.within(k, slack)
    }
}

pub fn frsb_identities(ens: &SdeEnsemble, mu: &ParisiMeasure, t: f64) -> FrsbCheck {
    let m = ens.moments_at(t);
    let p = ens.paths();
    let c = 2.0 * ens.beta * ens.beta;
    FrsbCheck {
        t: m.t,
        second_moment: Estimate { value: m.second, se: standard_error(m.second, m.fourth, p), target: m.t },
        scaled_coef_sq: Estimate {
            value: c * m.coef_second,
            se: c * standard_error(m.coef_second, m.coef_fourth, p),
            target: 1.0,
        },
        coef_mean: Estimate {
            value: m.coef_mean,
            se: standard_error(m.coef_mean, m.coef_second, p),
            target: mu.integral_f(m.t, 1.0),
        },
    }
}

/// As [`frsb_identities`], but with the coefficient recomputed from `de` on the
/// snapshot at `t` rather than the one that drove the ensemble. With `γ = 0`,
/// points outside `(−1, 1)` get a zero coefficient.
pub fn frsb_identities_with(ens: &SdeEnsemble, de: &DualEntropy, t: f64) -> Result<FrsbCheck> {
    let ys = ens.snapshot(t)?;
    let regular = de.gamma() > 0.0;
    let v: Vec<f64> = ys
        .par_iter()
        .map(|&y| if regular || y.abs() < 1.0 { de.eval_v(t, y) } else { Ok(0.0) })
        .collect::<Result<_>>()?;
    let p = ys.len();
    let mean = |it: &mut dyn Iterator<Item = f64>| it.sum::<f64>() / p as f64;
    let (y2, y4) = (mean(&mut ys.iter().map(|y| y * y)), mean(&mut ys.iter().map(|y| y.powi(4))));
    let (v1, v2, v4) =
        (mean(&mut v.iter().copied()), mean(&mut v.iter().map(|x| x * x)), mean(&mut v.iter().map(|x| x.powi(4))));
    let c = 2.0 * ens.beta * ens.beta;
    Ok(FrsbCheck {
        t,
        second_moment: Estimate { value: y2, se: standard_error(y2, y4, p), target: t },
        scaled_coef_sq: Estimate { value: c * v2, se: c * standard_error(v2, v4, p), target: 1.0 },
        coef_mean: Estimate {
            value: v1,
            se: standard_error(v1, v2, p),
            target: de.solution().measure().integral_f(t, 1.0),
        },
    })
}

/// `Var(Y_t)` against the discrete Itô isometry `2β² Σ E v² dt`, at every step.
pub fn ito_isometry_gap(ens: &SdeEnsemble) -> Vec<(f64, f64, f64)> {
    let c = 2.0 * ens.beta * ens.beta * ens.config.dt;
    let mut acc = 0.0;
    ens.moments
        .iter()
        .map(|m| {
            let row = (m.t, m.variance(), acc);
            acc += c * m.coef_second;
            row
        })
        .collect()
}

/// `E exp(λX_t)` for a dual ensemble against `exp(β²(2|λ| + λ²)(t − t0) + λx0)`.
pub fn mgf_check(ens: &SdeEnsemble, lambda: f64, t: f64) -> Result<Estimate> {
    if ens.process != Process::Dual {
        return Err(Error::InvalidArgument("expected a dual ensemble".into()));
    }
    let xs = ens.snapshot(t)?;
    let e: Vec<f64> = xs.iter().map(|x| (lambda * x).exp()).collect();
    let m1 = e.iter().sum::<f64>() / e.len() as f64;
    let m2 = e.iter().map(|x| x * x).sum::<f64>() / e.len() as f64;
    let b2 = ens.beta * ens.beta;
    let cfg = &ens.config;
    Ok(Estimate {
        value: m1,
        se: standard_error(m1, m2, e.len()),
        target: (b2 * (2.0 * lambda.abs() + lambda * lambda) * (t - cfg.t0) + lambda * cfg.start).exp(),
    })
}

/// `‖Y^γ_t − Y_t‖_{L²}` from two primal ensembles driven by the same noise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosenessRow {
    pub t: f64,
    pub distance: f64,
    /// Standard error of the distance (delta method on the mean square).
    pub se: f64,
    /// `√2 γ (e^{10β²t} − 1)^{1/2}`.
    pub bound: f64,
}

pub fn gamma_closeness_check(de: &DualEntropy, cfg: &SimConfig) -> Result<Vec<ClosenessRow>> {
    let exact = simulate_primal(&de.with_gamma(0.0)?, cfg)?;
    let regular = simulate_primal(de, cfg)?;
    let (beta, gamma) = (de.beta(), de.gamma());
    Ok(cfg
        .record_times
        .iter()
        .zip(exact.snapshots.iter().zip(&regular.snapshots))
        .map(|(&t, (a, b))| {
            let d2: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).collect();
            let m1 = d2.iter().sum::<f64>() / d2.len() as f64;
            let m2 = d2.iter().map(|x| x * x).sum::<f64>() / d2.len() as f64;
            let distance = m1.sqrt();
            let se_ms = standard_error(m1, m2, d2.len());
            ClosenessRow {
                t,
                distance,
                se: if distance > 0.0 { se_ms / (2.0 * distance) } else { se_ms.sqrt() },
                bound: 2f64.sqrt() * gamma * ((10.0 * beta * beta * t).exp() - 1.0).sqrt(),
            }
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub k: usize,
    pub t: f64,
    pub w2: f64,
}

/// Per-step `W₂(emp(σ_k), law(Y_{t_k}))`, the law given by the ensemble snapshots.
pub fn convergence_report(traj: &PhaTrajectory, ens: &SdeEnsemble) -> Result<Vec<ConvergenceRow>> {
    if ens.process != Process::Primal {
        return Err(Error::InvalidArgument("expected a primal ensemble".into()));
    }
    if (ens.beta - traj.params.beta).abs() > 1e-12 || (ens.gamma - traj.params.gamma).abs() > 1e-15 {
        return Err(Error::InvalidArgument("ensemble and trajectory use different (beta, gamma)".into()));
    }
    traj.records
        .iter()
        .zip(&traj.iterates)
        .map(|(r, sigma)| {
            let law = ens.snapshot(r.t).map_err(|_| {
                Error::InvalidArgument(format!("ensemble has no snapshot at step time {}", r.t))
            })?;
            Ok(ConvergenceRow { k: r.k, t: r.t, w2: wasserstein2_1d(sigma, law)? })
        })
        .collect()
}

/// `E Λ(q, Y_q) − Λ(0, 0) − β² ∫₀^q s F(s) ds` against `2β² ∫₀^q ∫ₛ¹ F`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntropyReport {
    pub q: f64,
    pub estimate: Estimate,
    /// `target / β`, the energy this identity predicts.
    pub energy: f64,
}

pub fn entropy_along_process(de: &DualEntropy, ens: &SdeEnsemble, q: f64) -> Result<EntropyReport> {
    if ens.process != Process::Primal {
        return Err(Error::InvalidArgument("expected a primal ensemble".into()));
    }
    let mu = de.solution().measure();
    let beta = de.beta();
    let ys = ens.snapshot(q)?;
    let lim = 1.0 - 1e-12;
    let vals: Vec<f64> = ys
        .par_iter()
        .map(|&y| de.eval_lambda(q, y.clamp(-lim, lim)).map(|p| p.value))
        .collect::<Result<_>>()?;
    let m1 = vals.iter().sum::<f64>() / vals.len() as f64;
    let m2 = vals.iter().map(|x| x * x).sum::<f64>() / vals.len() as f64;
    let origin = de.eval_lambda(0.0, 0.0)?.value;
    let radial = beta * beta * mu.integral_sf(0.0, q);
    let target = 2.0 * beta * beta * mu.double_tail_integral(q);
    Ok(EntropyReport {
        q,
        estimate: Estimate { value: m1 - origin - radial, se: standard_error(m1, m2, vals.len()), target },
        energy: if beta > 0.0 { target / beta } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wasserstein_trivial_cases() {
        assert_eq!(wasserstein2_1d(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap(), 0.0);
        assert!((wasserstein2_1d(&[0.5], &[-1.25]).unwrap() - 1.75).abs() < 1e-15);
        assert!(wasserstein2_1d(&[], &[1.0]).is_err());
    }

    fn brute_force(a: &[f64], b: &[f64]) -> f64 {
        fn perms(k: usize, used: &mut Vec<bool>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in 0..k {
                if !used[i] {
                    used[i] = true;
                    cur.push(i);
                    perms(k, used, cur, out);
                    cur.pop();
                    used[i] = false;
                }
            }
        }
        let mut all = Vec::new();
        perms(a.len(), &mut vec![false; a.len()], &mut Vec::new(), &mut all);
        all.iter()
            .map(|p| (p.iter().enumerate().map(|(i, &j)| (a[i] - b[j]).powi(2)).sum::<f64>() / a.len() as f64).sqrt())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn unequal_sizes_use_the_quantile_coupling() {
        // {0, 1} vs {0, 0.5, 1}: quantile functions differ on (1/3, 1/2) and (1/2, 2/3).
        let w = wasserstein2_1d(&[0.0, 1.0], &[0.0, 0.5, 1.0]).unwrap();
        assert!((w * w - (1.0 / 6.0) * 0.25 * 2.0).abs() < 1e-14);
        let doubled = wasserstein2_1d(&[0.0, 1.0, 0.0, 1.0], &[0.2, 0.7]).unwrap();
        let same = wasserstein2_1d(&[0.0, 1.0], &[0.2, 0.7]).unwrap();
        assert!((doubled - same).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn four_points_match_exhaustive_matching(
            a in proptest::collection::vec(-5.0f64..5.0, 4),
            b in proptest::collection::vec(-5.0f64..5.0, 4),
        ) {
            let w = wasserstein2_1d(&a, &b).unwrap();
            prop_assert!((w - brute_force(&a, &b)).abs() <= 1e-12);
        }

        #[test]
        fn wasserstein_is_symmetric(
            a in proptest::collection::vec(-5.0f64..5.0, 1..12),
            b in proptest::collection::vec(-5.0f64..5.0, 1..12),
        ) {
            let ab = wasserstein2_1d(&a, &b).unwrap();
            let ba = wasserstein2_1d(&b, &a).unwrap();
            prop_assert!((ab - ba).abs() <= 1e-12);
        }
    }

    #[test]
    fn off_grid_record_time_is_rejected() {
        let cfg = SimConfig::new(0.5, 10, 0).recording(vec![0.12345]);
        assert!(cfg.validate().is_err());
        let cfg = SimConfig::new(0.5, 10, 0).recording(vec![0.6]);
        assert!(cfg.validate().is_err());
        let cfg = SimConfig::new(0.5, 10, 0).recording(vec![0.0, 0.25, 0.5]);
        assert_eq!(cfg.validate().unwrap(), (1000, vec![0, 500, 1000]));
    }
}
