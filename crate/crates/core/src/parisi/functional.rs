use super::measure::ParisiMeasure;
use super::pde::{solve_pde, ParisiSolution, PdeGrid};
use crate::error::{Error, Result};

/// `P(μ) = Φ(0, 0) − β² ∫₀¹ t F(t) dt`, the integral taken exactly for the step CDF.
pub fn parisi_functional(sol: &ParisiSolution, mu: &ParisiMeasure) -> Result<f64> {
    if sol.measure() != mu {
        return Err(Error::InvalidArgument("solution was computed for a different measure".into()));
    }
    let b2 = sol.beta() * sol.beta();
    Ok(sol.phi_origin() - b2 * mu.integral_sf(0.0, 1.0))
}

/// Moments of the process `dX = √2β dW + 2β²F ∂ₓΦ dt`, `X₀ = 0`, on every time row.
#[derive(Clone, Debug)]
pub struct ProcessMoments {
    pub t: Vec<f64>,
    /// `E[(∂ₓΦ(t, X_t))²]`.
    pub second_moment: Vec<f64>,
    /// `E[∂ₓₓΦ(t, X_t)]`.
    pub mean_curvature: Vec<f64>,
    /// `E[(∂ₓₓΦ(t, X_t))²]`.
    pub mean_curvature_sq: Vec<f64>,
}

/// Propagates the density of `X_t` forward with an implicit conservative scheme
/// (zero flux at the window edges) and integrates the moments against it.
pub fn process_moments(sol: &ParisiSolution) -> ProcessMoments {
    let n = sol.n_x();
    let n_t = sol.n_t();
    let dx = sol.dx();
    let b2 = sol.beta() * sol.beta();
    let mu = sol.measure();
    let mut p = vec![0.0; n];
    p[sol.center()] = 1.0 / dx;

    let moments = |k: usize, p: &[f64]| {
        let (px, pxx) = (sol.phi_x_row(k), sol.phi_xx_row(k));
        let mut m = [0.0; 3];
        for i in 0..n {
            let w = p[i] * dx;
            m[0] += w * px[i] * px[i];
            m[1] += w * pxx[i];
            m[2] += w * pxx[i] * pxx[i];
        }
        m
    };

    let mut out = ProcessMoments {
        t: sol.t_grid().to_vec(),
        second_moment: Vec::with_capacity(n_t),
        mean_curvature: Vec::with_capacity(n_t),
        mean_curvature_sq: Vec::with_capacity(n_t),
    };
    let push = |out: &mut ProcessMoments, m: [f64; 3]| {
        out.second_moment.push(m[0]);
        out.mean_curvature.push(m[1]);
        out.mean_curvature_sq.push(m[2]);
    };
    push(&mut out, moments(0, &p));

    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut scratch = vec![0.0; n];
    for k in 0..n_t - 1 {
        let t = sol.t_grid()[k];
        let h = sol.t_grid()[k + 1] - t;
        let drift = 2.0 * b2 * mu.f(t);
        let px = sol.phi_x_row(k + 1);
        let r = h / dx;
        diag.iter_mut().for_each(|d| *d = 1.0);
        lower.iter_mut().for_each(|d| *d = 0.0);
        upper.iter_mut().for_each(|d| *d = 0.0);
        for i in 0..n - 1 {
            let b = drift * 0.5 * (px[i] + px[i + 1]);
            let alpha = b2 / dx + 0.5 * b;
            let gamma = -b2 / dx + 0.5 * b;
            // Flux through face i+1/2 is alpha*p_i + gamma*p_{i+1}.
            diag[i] += r * alpha;
            upper[i] += r * gamma;
            diag[i + 1] -= r * gamma;
            lower[i + 1] -= r * alpha;
        }
        thomas(&lower, &diag, &upper, &p, &mut next, &mut scratch);
        std::mem::swap(&mut p, &mut next);
        push(&mut out, moments(k + 1, &p));
    }
    out
}

pub(crate) fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64], x: &mut [f64], c: &mut [f64]) {
    let n = diag.len();
    c[0] = upper[0] / diag[0];
    x[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = if i < n - 1 { upper[i] / m } else { 0.0 };
        x[i] = (rhs[i] - lower[i] * x[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
}

/// Gradient of `P` with respect to the CDF value on each measure interval:
/// `β² ∫_{interval} (E[(∂ₓΦ(s, X_s))²] − s) ds`.
pub fn functional_gradient(sol: &ParisiSolution, moments: &ProcessMoments) -> Vec<f64> {
    let mu = sol.measure();
    let b2 = sol.beta() * sol.beta();
    let mut g = vec![0.0; mu.intervals()];
    let t = &moments.t;
    for k in 0..t.len() - 1 {
        let j = mu.interval_of(t[k]);
        let h = t[k + 1] - t[k];
        let a = moments.second_moment[k] - t[k];
        let b = moments.second_moment[k + 1] - t[k + 1];
        g[j] += b2 * 0.5 * h * (a + b);
    }
    g
}

/// Weighted isotonic (nondecreasing) regression by pool-adjacent-violators,
/// then clipped to `[lo, hi]`.
pub fn pav_project(values: &[f64], weights: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() > 1 {
            let (v2, w2, c2) = blocks[blocks.len() - 1];
            let (v1, w1, c1) = blocks[blocks.len() - 2];
            if v1 <= v2 {
                break;
            }
            blocks.pop();
            let w = w1 + w2;
            *blocks.last_mut().unwrap() = ((v1 * w1 + v2 * w2) / w, w, c1 + c2);
        }
    }
    let mut out = Vec::with_capacity(values.len());
    for (v, _, c) in blocks {
        out.extend(std::iter::repeat(v.clamp(lo, hi)).take(c));
    }
    out
}

#[derive(Clone, Debug)]
pub struct MinimizeOptions {
    /// Number of measure intervals on a uniform grid.
    pub m: usize,
    pub grid: PdeGrid,
    pub max_iter: usize,
    /// Stop once an accepted step moves no CDF value by more than this.
    pub step_tol: f64,
    pub initial: Option<ParisiMeasure>,
}

impl MinimizeOptions {
    pub fn new(m: usize) -> Self {
        Self { m, grid: PdeGrid::default(), max_iter: 200, step_tol: 1e-6, initial: None }
    }
}

#[derive(Clone, Debug)]
pub struct MinimizeResult {
    pub measure: ParisiMeasure,
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Functional value after each accepted step, starting with the initial one.
    pub history: Vec<f64>,
}

/// Projected gradient descent over nondecreasing CDFs with Armijo backtracking,
/// so the functional decreases monotonically.
pub fn minimize_measure(beta: f64, opts: &MinimizeOptions) -> Result<MinimizeResult> {
    if !(beta > 0.0) {
        return Err(Error::InvalidArgument("beta must be positive".into()));
    }
    if opts.m < 2 {
        return Err(Error::InvalidArgument("need at least two measure intervals".into()));
    }
    let m = opts.m;
    let mut mu = match &opts.initial {
        Some(mu) => mu.clone(),
        None => ParisiMeasure::uniform(m, (0..=m).map(|i| i as f64 / m as f64).collect())?,
    };
    let weights: Vec<f64> = mu.grid().windows(2).map(|w| w[1] - w[0]).collect();
    let mut sol = solve_pde(&mu, beta, &opts.grid)?;
    let mut value = parisi_functional(&sol, &mu)?;
    let mut history = vec![value];
    let mut step = 1.0 / (beta * beta);
    let mut converged = false;
    let mut iterations = 0;

    while iterations < opts.max_iter {
        iterations += 1;
        let moments = process_moments(&sol);
        let grad = functional_gradient(&sol, &moments);
        let c = &mu.cdf()[..m];
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = c
                .iter()
                .zip(&grad)
                .zip(&weights)
                .map(|((ci, gi), wi)| ci - step * gi / (beta * beta * wi))
                .collect();
            let mut proj = pav_project(&trial, &weights, 0.0, 1.0);
            proj.push(1.0);
            let moved: f64 = proj.iter().zip(c).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if moved == 0.0 {
                accepted = Some(None);
                break;
            }
            let cand = ParisiMeasure::new(mu.grid().to_vec(), proj)?;
            let cand_sol = solve_pde(&cand, beta, &opts.grid)?;
            let cand_value = parisi_functional(&cand_sol, &cand)?;
            let predicted: f64 = grad.iter().zip(cand.cdf()).zip(c).map(|((g, a), b)| g * (a - b)).sum();
            if cand_value <= value + 1e-4 * predicted {
                accepted = Some(Some((cand, cand_sol, cand_value, moved)));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some(Some((cand, cand_sol, cand_value, moved))) => {
                mu = cand;
                sol = cand_sol;
                value = cand_value;
                history.push(value);
                step *= 1.5;
                if moved < opts.step_tol {
                    converged = true;
                    break;
                }
            }
            Some(None) => {
                converged = true;
                break;
            }
            None => {
                converged = step < 1e-9;
                break;
            }
        }
    }
    Ok(MinimizeResult { measure: mu, value, converged, iterations, history })
}

/// `E(β) = 2β ∫₀^{q*} ∫ₜ¹ F(s) ds dt`, the ground-state energy density predicted by `mu`.
pub fn energy_target(mu: &ParisiMeasure, beta: f64) -> f64 {
    2.0 * beta * mu.double_tail_integral(mu.q_star())
}
