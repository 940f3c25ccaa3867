//! Potential Hessian ascent: Gaussian steps shaped by the Hessian of the modified
//! objective, followed by truncation to the cube and Bernoulli rounding.

use crate::error::{check_len, Error, Result};
use crate::instance::dot;
use crate::legendre::LambdaPoint;
use crate::potential::Objective;
use crate::rng;
use crate::sampler;
use crate::spectral::{normalize_diagonal, Backend, CovarianceOperator, TraceEstimator};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Which optional per-step diagnostics to compute.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Record `tr_n Q²` and the approximate-eigenvector residual.
    pub spectral: bool,
    /// Hutchinson probes for the matrix-free backend; the dense backend is exact.
    pub probes: usize,
}

impl Default for Diagnostics {
    fn default() -> Self {
        Self { spectral: false, probes: 4 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaParams {
    pub beta: f64,
    pub eta: f64,
    pub delta: f64,
    pub gamma: f64,
    /// Step count; `None` means `⌈q*/η⌉` (capped so that `Kη ≤ 1`).
    pub steps: Option<usize>,
    pub seed: u64,
    pub backend: Backend,
    /// Relative accuracy of iterative sampling.
    pub lanczos_tol: f64,
    pub diagnostics: Diagnostics,
}

impl PhaParams {
    pub fn new(beta: f64) -> Self {
        Self {
            beta,
            eta: 0.01,
            delta: 1.0 / 22.0,
            gamma: 1e-3,
            steps: None,
            seed: 0,
            backend: Backend::MatrixFree,
            lanczos_tol: 1e-5,
            diagnostics: Diagnostics::default(),
        }
    }

    /// Uses `γ = η^{1/8}`.
    pub fn with_linked_gamma(mut self) -> Self {
        self.gamma = self.eta.powf(0.125);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return bad(format!("eta must lie in (0, 1], got {}", self.eta));
        }
        if !(0.0..=1.0 / 22.0 + 1e-15).contains(&self.delta) {
            return bad(format!("delta must lie in [0, 1/22], got {}", self.delta));
        }
        if !(self.gamma >= 0.0) {
            return bad(format!("gamma must be nonnegative, got {}", self.gamma));
        }
        if !(self.lanczos_tol > 0.0) {
            return bad(format!("lanczos tolerance must be positive, got {}", self.lanczos_tol));
        }
        if let Some(k) = self.steps {
            if k as f64 * self.eta > 1.0 + 1e-12 {
                return bad(format!("{k} steps of size {} overshoot t = 1", self.eta));
            }
        }
        Ok(())
    }

    /// Step count for a measure with support edge `q_star`.
    pub fn step_count(&self, q_star: f64) -> usize {
        if let Some(k) = self.steps {
            return k;
        }
        let q = if q_star >= 1.0 { 1.0 - self.eta } else { q_star };
        let k = (q / self.eta - 1e-9).ceil().max(0.0) as usize;
        k.min((1.0 / self.eta + 1e-9).floor() as usize)
    }
}

/// Diagnostics of one iterate `σ_k` and the step taken from it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub k: usize,
    pub t: f64,
    /// `obj(t_k, σ_k)`.
    pub objective: f64,
    /// `(1/n)‖σ_k‖²`.
    pub second_moment: f64,
    /// Fraction of coordinates with `|σ_k,i| > 1`.
    pub escape_fraction: f64,
    /// `tr_n Q²` (NaN unless spectral diagnostics are on).
    pub trace: f64,
    /// Approximate-eigenvector residual (NaN unless spectral diagnostics are on).
    pub residual: f64,
    /// `⟨Δσ, A_sym Δσ⟩` (NaN on the last record).
    pub step_quadratic: f64,
    /// `Σ |Δσᵢ|³` (NaN on the last record).
    pub step_cubic: f64,
    /// `|⟨σ_k, Δσ_k⟩| / (‖σ_k‖ ‖Δσ_k‖)`, or 0 when `σ_k = 0`.
    pub orthogonality: f64,
    pub lanczos_iterations: usize,
    pub condition: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PhaTrajectory {
    pub params: PhaParams,
    pub n: usize,
    /// `σ_0, …, σ_K`.
    pub iterates: Vec<Vec<f64>>,
    /// One record per iterate.
    pub records: Vec<StepRecord>,
    pub truncated: Vec<f64>,
    pub rounded: Vec<f64>,
    /// `H(σ̃)/n` for the truncated iterate.
    pub relaxed_energy: f64,
    /// `H(σ*)/n` for the rounded point.
    pub energy: f64,
}

impl PhaTrajectory {
    pub fn steps(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn times(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.t).collect()
    }

    /// Writes the per-step records as CSV.
    pub fn write_csv(&self, mut w: impl std::io::Write) -> Result<()> {
        writeln!(
            w,
            "k,t,objective,second_moment,escape_fraction,trace,residual,step_quadratic,step_cubic,orthogonality,lanczos_iterations,condition"
        )?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.k,
                r.t,
                r.objective,
                r.second_moment,
                r.escape_fraction,
                r.trace,
                r.residual,
                r.step_quadratic,
                r.step_cubic,
                r.orthogonality,
                r.lanczos_iterations,
                r.condition
            )?;
        }
        Ok(())
    }
}

/// Coordinatewise clamp to `[−1, 1]`.
pub fn truncate(sigma: &[f64]) -> Vec<f64> {
    sigma.iter().map(|x| x.clamp(-1.0, 1.0)).collect()
}

/// Independent signs with `P(σ*ᵢ = 1) = (1 + σᵢ)/2`.
pub fn round_bernoulli(sigma: &[f64], rng: &mut impl Rng) -> Result<Vec<f64>> {
    if let Some((i, x)) = sigma.iter().enumerate().find(|(_, x)| !(x.abs() <= 1.0)) {
        return Err(Error::Domain(format!("coordinate {i} = {x} is outside [-1, 1]; truncate first")));
    }
    Ok(sigma.iter().map(|&x| if rng.gen::<f64>() < 0.5 * (1.0 + x) { 1.0 } else { -1.0 }).collect())
}

fn lambda_points(obj: &Objective, t: f64, sigma: &[f64], hints: &mut [f64]) -> Result<Vec<LambdaPoint>> {
    obj.dual().eval_many(t, sigma, Some(hints)).map_err(|e| match e {
        Error::Domain(msg) => match sigma.iter().position(|y| !(y.abs() < 1.0)) {
            Some(i) => Error::Domain(format!("coordinate {i} at t = {t}: {msg}")),
            None => Error::Domain(msg),
        },
        other => other,
    })
}

fn objective_value(obj: &Objective, t: f64, sigma: &[f64], pts: &[LambdaPoint]) -> Result<f64> {
    let h = obj.instance().hamiltonian_sym(sigma)?;
    let entropy: f64 = pts.iter().map(|p| p.value).sum();
    Ok(obj.beta() * h - entropy - obj.radial_term(t))
}

/// Runs the ascent on `obj`'s instance.
pub fn run_pha(obj: &Objective, p: &PhaParams) -> Result<PhaTrajectory> {
    p.validate()?;
    if (obj.beta() - p.beta).abs() > 1e-12 * p.beta.max(1.0) {
        return Err(Error::InvalidArgument(format!("objective beta {} differs from {}", obj.beta(), p.beta)));
    }
    if (obj.dual().gamma() - p.gamma).abs() > 1e-15 {
        return Err(Error::InvalidArgument(format!(
            "objective gamma {} differs from {}",
            obj.dual().gamma(),
            p.gamma
        )));
    }
    let inst: Arc<_> = obj.instance().clone();
    let n = inst.n();
    let k_max = p.step_count(obj.measure().q_star());
    let sqrt_eta = p.eta.sqrt();

    let mut sigma = vec![0.0; n];
    let mut hints = vec![0.0; n];
    let mut iterates = vec![sigma.clone()];
    let mut records = Vec::with_capacity(k_max + 1);

    for k in 0..=k_max {
        let t = k as f64 * p.eta;
        let pts = lambda_points(obj, t, &sigma, &mut hints)?;
        let norm2 = dot(&sigma, &sigma);
        let mut rec = StepRecord {
            k,
            t,
            objective: objective_value(obj, t, &sigma, &pts)?,
            second_moment: norm2 / n as f64,
            escape_fraction: sigma.iter().filter(|x| x.abs() > 1.0).count() as f64 / n as f64,
            trace: f64::NAN,
            residual: f64::NAN,
            step_quadratic: f64::NAN,
            step_cubic: f64::NAN,
            orthogonality: f64::NAN,
            lanczos_iterations: 0,
            condition: f64::NAN,
        };
        if k == k_max {
            records.push(rec);
            break;
        }

        let curv: Vec<f64> = pts.iter().map(|q| q.d2).collect();
        let (d, s) = normalize_diagonal(&curv, p.beta);
        let mut cov = CovarianceOperator::from_diagonal(inst.clone(), d, s, &sigma, p.beta, p.delta, p.backend)?;
        cov.lanczos_tol = p.lanczos_tol;
        if p.diagnostics.spectral {
            let est = match p.backend {
                Backend::Dense => TraceEstimator::Exact,
                Backend::MatrixFree => {
                    TraceEstimator::Hutchinson { probes: p.diagnostics.probes, seed: p.seed ^ k as u64 }
                }
            };
            rec.trace = cov.trace_normalized(est)?;
            rec.residual = cov.approx_eigvec_residual(est)?;
        }

        let mut r = rng::stream(p.seed, rng::domain::PHA_STEP + k as u64);
        let (u, info) = sampler::sample(&cov, &mut r, p.lanczos_tol)?;
        let step: Vec<f64> = u.iter().map(|x| sqrt_eta * x).collect();
        rec.step_quadratic = dot(&step, &inst.sym_matvec(&step));
        rec.step_cubic = step.iter().map(|x| x.abs().powi(3)).sum();
        let step_norm = dot(&step, &step).sqrt();
        rec.orthogonality =
            if norm2 > 0.0 && step_norm > 0.0 { dot(&sigma, &step).abs() / (norm2.sqrt() * step_norm) } else { 0.0 };
        rec.lanczos_iterations = info.iterations;
        rec.condition = info.condition;
        records.push(rec);

        for (si, di) in sigma.iter_mut().zip(&step) {
            *si += di;
        }
        iterates.push(sigma.clone());
    }

    let truncated = truncate(&sigma);
    let rounded = round_bernoulli(&truncated, &mut rng::stream(p.seed, rng::domain::ROUNDING))?;
    let nf = n as f64;
    Ok(PhaTrajectory {
        params: p.clone(),
        n,
        relaxed_energy: inst.hamiltonian(&truncated)? / nf,
        energy: inst.hamiltonian(&rounded)? / nf,
        iterates,
        records,
        truncated,
        rounded,
    })
}

/// The terms of the second-order expansion of `obj(t_{k+1}, σ_{k+1}) − obj(t_k, σ_k)`.
///
/// The six terms after `increment` add up to it, up to the time quadrature.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorTerms {
    pub k: usize,
    /// `obj(t_{k+1}, σ_{k+1}) − obj(t_k, σ_k)`.
    pub increment: f64,
    /// `⟨2βA_sym σ_k − ∂_yΛ_γ(t_k, σ_k), Δσ_k⟩`.
    pub gradient: f64,
    /// `½⟨Δσ, (2βA_sym − diag ∂_yyΛ_γ) Δσ⟩ − β²η Σ v(t_k, σ_k)`.
    pub hessian: f64,
    /// Actual third-order part of the spatial change.
    pub remainder: f64,
    /// `(2/γ²) Σ |Δσᵢ|³ / 6`.
    pub remainder_bound: f64,
    /// `−β² ∫ F(t)(Σ (σ_{k+1} − γ∂_yΛ_γ)² − nt) dt`.
    pub time: f64,
    /// `β²η Σ v(t_k, σ_k) − β² Σ ∫ v(t, σ_{k+1}) dt`.
    pub telescoping: f64,
    /// `nβ²γη`.
    pub gamma: f64,
}

impl TaylorTerms {
    /// Sum of the expansion terms, to compare with `increment`.
    pub fn total(&self) -> f64 {
        self.gradient + self.hessian + self.remainder + self.time + self.telescoping + self.gamma
    }
}

const TIME_NODES: usize = 4;

/// Expands the objective change of every step of `traj`.
pub fn taylor_diagnostics(traj: &PhaTrajectory, obj: &Objective) -> Result<Vec<TaylorTerms>> {
    let n = obj.n();
    check_len(n, traj.n)?;
    let de = obj.dual();
    let (beta, gamma) = (obj.beta(), de.gamma());
    let b2 = beta * beta;
    let inst = obj.instance();
    let mu = obj.measure();
    let mut hints = vec![0.0; n];
    let mut out = Vec::with_capacity(traj.steps());

    for k in 0..traj.steps() {
        let (t0, t1) = (traj.records[k].t, traj.records[k + 1].t);
        let eta = t1 - t0;
        let (s0, s1) = (&traj.iterates[k], &traj.iterates[k + 1]);
        let ds: Vec<f64> = s1.iter().zip(s0).map(|(a, b)| a - b).collect();

        let p0 = de.eval_many(t0, s0, Some(&mut hints))?;
        let p_mid = de.eval_many(t0, s1, None)?;
        let p_end = de.eval_many(t1, s1, None)?;
        let obj0 = objective_value(obj, t0, s0, &p0)?;
        let obj_mid = objective_value(obj, t0, s1, &p_mid)?;
        let obj1 = objective_value(obj, t1, s1, &p_end)?;

        let a_s0 = inst.sym_matvec(s0);
        let a_ds = inst.sym_matvec(&ds);
        let gradient: f64 = (0..n).map(|i| (2.0 * beta * a_s0[i] - p0[i].d1) * ds[i]).sum();
        let quad = 0.5 * (2.0 * beta * dot(&ds, &a_ds) - (0..n).map(|i| p0[i].d2 * ds[i] * ds[i]).sum::<f64>());
        let v0: f64 = p0.iter().map(|q| 1.0 / q.d2).sum();
        let hessian = quad - b2 * eta * v0;
        let remainder = obj_mid - obj0 - gradient - quad;
        let remainder_bound = if gamma > 0.0 {
            2.0 / (gamma * gamma) * ds.iter().map(|x| x.abs().powi(3)).sum::<f64>() / 6.0
        } else {
            f64::INFINITY
        };

        let mut time = 0.0;
        let mut v_int = 0.0;
        let w = eta / TIME_NODES as f64;
        for j in 0..TIME_NODES {
            let t = t0 + (j as f64 + 0.5) * w;
            let pts = de.eval_many(t, s1, None)?;
            let overlap: f64 = s1.iter().zip(&pts).map(|(y, q)| (y - gamma * q.d1).powi(2)).sum();
            time -= b2 * w * mu.f(t) * (overlap - n as f64 * t);
            v_int += w * pts.iter().map(|q| 1.0 / q.d2).sum::<f64>();
        }
        out.push(TaylorTerms {
            k,
            increment: obj1 - obj0,
            gradient,
            hessian,
            remainder,
            remainder_bound,
            time,
            telescoping: b2 * eta * v0 - b2 * v_int,
            gamma: n as f64 * b2 * gamma * eta,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn truncate_clamps() {
        assert_eq!(truncate(&[1.5, -2.0, 0.3]), vec![1.0, -1.0, 0.3]);
        let inside = [0.2, -0.9, 1.0, -1.0];
        assert_eq!(truncate(&inside), inside.to_vec());
    }

    #[test]
    fn rounding_of_corner_is_deterministic() {
        let s = round_bernoulli(&[1.0; 50], &mut rng::stream(1, 1)).unwrap();
        assert!(s.iter().all(|&x| x == 1.0));
        let s = round_bernoulli(&[-1.0; 50], &mut rng::stream(1, 1)).unwrap();
        assert!(s.iter().all(|&x| x == -1.0));
    }

    #[test]
    fn rounding_rejects_points_outside_the_cube() {
        assert!(matches!(round_bernoulli(&[0.0, 1.2], &mut rng::stream(0, 0)), Err(Error::Domain(_))));
    }

    #[test]
    fn rounding_of_center_is_balanced() {
        let n = 10_000;
        let s = round_bernoulli(&vec![0.0; n], &mut rng::stream(3, 0)).unwrap();
        let mean = s.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() <= 5.0 / (n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn rounding_is_unbiased() {
        let sigma = [0.6, -0.2, 0.0, 0.95];
        let trials = 20_000;
        let mut sum = [0.0; 4];
        let mut r = rng::stream(11, 0);
        for _ in 0..trials {
            for (a, b) in sum.iter_mut().zip(round_bernoulli(&sigma, &mut r).unwrap()) {
                *a += b;
            }
        }
        for i in 0..4 {
            let se = ((1.0 - sigma[i] * sigma[i]) / trials as f64).sqrt();
            assert!((sum[i] / trials as f64 - sigma[i]).abs() <= 5.0 * se + 1e-12);
        }
    }

    #[test]
    fn step_count_defaults() {
        let mut p = PhaParams::new(2.0);
        assert_eq!(p.step_count(0.5), 50);
        assert_eq!(p.step_count(0.505), 51);
        assert_eq!(p.step_count(0.0), 0);
        assert_eq!(p.step_count(1.0), 99);
        p.eta = 0.3;
        assert_eq!(p.step_count(0.95), 3);
        p.steps = Some(7);
        assert!(p.validate().is_err());
    }

    proptest! {
        #[test]
        fn truncation_is_the_box_projection(
            pair in proptest::collection::vec((-3.0f64..3.0, -1.0f64..1.0), 1..20)
        ) {
            let sigma: Vec<f64> = pair.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pair.iter().map(|p| p.1).collect();
            let tr = truncate(&sigma);
            for i in 0..sigma.len() {
                prop_assert!((tr[i] - sigma[i]).abs() <= (sigma[i] - y[i]).abs() + 1e-15);
            }
        }
    }
}
