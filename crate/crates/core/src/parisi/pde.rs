use super::measure::ParisiMeasure;
use crate::error::{Error, Result};
use crate::io;
use crate::quad::log2cosh;
use serde::{Deserialize, Serialize};
use std::path::Path;

const MAGIC: &[u8; 4] = b"PSOL";
const HEADER_LEN: usize = 256;
const FORMAT_VERSION: u32 = 1;

/// Discretization of the `(t, x)` domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdeGrid {
    /// Target number of time rows; the actual count may differ slightly so that
    /// every measure grid point is a row.
    pub n_t: usize,
    /// Number of space nodes, forced odd so that `x = 0` is a node.
    pub n_x: usize,
    /// Half-width `L` of the space window; `None` derives it from `tail_tol`.
    pub half_width: Option<f64>,
    /// Target size of the tail `1 − |∂ₓΦ|` at `|x| = L`.
    pub tail_tol: f64,
}

impl Default for PdeGrid {
    fn default() -> Self {
        Self { n_t: 2000, n_x: 2001, half_width: None, tail_tol: 1e-8 }
    }
}

impl PdeGrid {
    pub fn with_sizes(n_t: usize, n_x: usize) -> Self {
        Self { n_t, n_x, ..Self::default() }
    }

    pub fn half_width_for(&self, beta: f64) -> f64 {
        self.half_width
            .unwrap_or_else(|| 4.0 * beta * beta + 0.5 * (2.0 / self.tail_tol).ln() + 2.0)
    }
}

/// `Φ` and its first three space derivatives at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PhiPoint {
    pub phi: f64,
    pub phi_x: f64,
    pub phi_xx: f64,
    pub phi_xxx: f64,
}

/// Gridded solution of `∂ₜΦ = −β²(∂ₓₓΦ + F(t)(∂ₓΦ)²)`, `Φ(1, x) = log 2cosh x`.
///
/// Rows are stored in increasing `t`. Off-grid values use quintic Hermite
/// interpolation in `x` on the nodal `(Φ, ∂ₓΦ, ∂ₓₓΦ)` and linear blending in `t`.
/// Beyond `|x| = L` the solution continues with slope `±1`.
#[derive(Clone, Debug)]
pub struct ParisiSolution {
    beta: f64,
    measure: ParisiMeasure,
    t_grid: Vec<f64>,
    half_width: f64,
    n_x: usize,
    dx: f64,
    phi: Vec<f64>,
    phi_x: Vec<f64>,
    phi_xx: Vec<f64>,
    phi_xxx: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Header {
    v: u32,
    beta: f64,
    n_t: usize,
    n_x: usize,
    half_width: f64,
    m: usize,
}

/// Time rows aligned with the measure grid, roughly `n_t` in total.
pub fn time_grid(mu: &ParisiMeasure, n_t: usize) -> Vec<f64> {
    let h = 1.0 / (n_t.max(2) - 1) as f64;
    let g = mu.grid();
    let mut t = vec![0.0];
    for w in g.windows(2) {
        let steps = (((w[1] - w[0]) / h).round() as usize).max(1);
        for j in 1..=steps {
            t.push(if j == steps { w[1] } else { w[0] + (w[1] - w[0]) * j as f64 / steps as f64 });
        }
    }
    t
}

/// Solves the Parisi PDE backward from `t = 1`.
pub fn solve_pde(mu: &ParisiMeasure, beta: f64, grid: &PdeGrid) -> Result<ParisiSolution> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidArgument(format!("beta must be nonnegative, got {beta}")));
    }
    if grid.n_x < 5 || grid.n_t < 2 {
        return Err(Error::InvalidArgument("grid too small".into()));
    }
    let n_x = grid.n_x | 1;
    let half_width = grid.half_width_for(beta);
    let dx = 2.0 * half_width / (n_x - 1) as f64;
    let t_grid = time_grid(mu, grid.n_t);
    let n_t = t_grid.len();
    let b2 = beta * beta;

    for k in 0..n_t - 1 {
        let h = t_grid[k + 1] - t_grid[k];
        let speed = 2.0 * b2 * mu.f(t_grid[k]);
        if h * speed > dx {
            return Err(Error::Stability { dt: h, limit: dx / speed });
        }
    }

    let mut phi = vec![0.0; n_t * n_x];
    let x_at = |i: usize| -half_width + i as f64 * dx;
    {
        let last = &mut phi[(n_t - 1) * n_x..];
        for (i, v) in last.iter_mut().enumerate() {
            *v = log2cosh(x_at(i));
        }
    }

    let mut stepper = Stepper::new(n_x, dx);
    for k in (0..n_t - 1).rev() {
        let h = t_grid[k + 1] - t_grid[k];
        let f = mu.f(t_grid[k]);
        let (lower, upper) = phi.split_at_mut((k + 1) * n_x);
        stepper.step(&upper[..n_x], &mut lower[k * n_x..], h, b2, f);
    }

    let mut sol = ParisiSolution {
        beta,
        measure: mu.clone(),
        t_grid,
        half_width,
        n_x,
        dx,
        phi,
        phi_x: Vec::new(),
        phi_xx: Vec::new(),
        phi_xxx: Vec::new(),
    };
    sol.fill_derivatives();
    Ok(sol)
}

/// One backward step of the IMEX Heun scheme: Crank–Nicolson diffusion with a
/// trapezoidal nonlinear term whose end value comes from a backward-Euler predictor.
struct Stepper {
    n: usize,
    dx: f64,
    rhs: Vec<f64>,
    pred: Vec<f64>,
    n_old: Vec<f64>,
    scratch: Vec<f64>,
}

impl Stepper {
    fn new(n: usize, dx: f64) -> Self {
        Self { n, dx, rhs: vec![0.0; n], pred: vec![0.0; n], n_old: vec![0.0; n], scratch: vec![0.0; n] }
    }

    fn nonlinear(u: &[f64], dx: f64, coef: f64, out: &mut [f64]) {
        let n = u.len();
        out[0] = coef;
        out[n - 1] = coef;
        for i in 1..n - 1 {
            let g = (u[i + 1] - u[i - 1]) / (2.0 * dx);
            out[i] = coef * g * g;
        }
    }

    /// `Dₓₓu` including the slope-`±1` ghost nodes.
    fn laplacian(u: &[f64], dx: f64, i: usize) -> f64 {
        let n = u.len();
        let inv = 1.0 / (dx * dx);
        if i == 0 {
            (2.0 * u[1] - 2.0 * u[0] + 2.0 * dx) * inv
        } else if i == n - 1 {
            (2.0 * u[n - 2] - 2.0 * u[n - 1] + 2.0 * dx) * inv
        } else {
            (u[i + 1] - 2.0 * u[i] + u[i - 1]) * inv
        }
    }

    fn step(&mut self, u: &[f64], out: &mut [f64], h: f64, b2: f64, f: f64) {
        let n = self.n;
        let dx = self.dx;
        let ghost = 2.0 / dx;
        Self::nonlinear(u, dx, b2 * f, &mut self.n_old);

        for i in 0..n {
            self.rhs[i] = u[i] + h * self.n_old[i];
        }
        self.rhs[0] += h * b2 * ghost;
        self.rhs[n - 1] += h * b2 * ghost;
        solve_diffusion(&self.rhs, &mut self.pred, h * b2 / (dx * dx), &mut self.scratch);

        Self::nonlinear(&self.pred, dx, b2 * f, &mut self.rhs);
        for i in 0..n {
            let lap = Self::laplacian(u, dx, i);
            self.rhs[i] = u[i] + 0.5 * h * b2 * lap + 0.5 * h * (self.n_old[i] + self.rhs[i]);
        }
        self.rhs[0] += 0.5 * h * b2 * ghost;
        self.rhs[n - 1] += 0.5 * h * b2 * ghost;
        solve_diffusion(&self.rhs, out, 0.5 * h * b2 / (dx * dx), &mut self.scratch);
    }
}

/// Solves `(I − r·T)x = rhs` where `T` is the second-difference matrix with
/// reflected ghost nodes at both ends (the constant part of the ghost condition
/// is carried by the caller's right-hand side).
fn solve_diffusion(rhs: &[f64], x: &mut [f64], r: f64, c: &mut [f64]) {
    let n = rhs.len();
    let diag = 1.0 + 2.0 * r;
    let upper = |i: usize| if i == 0 { -2.0 * r } else { -r };
    let lower = |i: usize| if i == n - 1 { -2.0 * r } else { -r };
    c[0] = upper(0) / diag;
    x[0] = rhs[0] / diag;
    for i in 1..n {
        let m = diag - lower(i) * c[i - 1];
        if i < n - 1 {
            c[i] = upper(i) / m;
        }
        x[i] = (rhs[i] - lower(i) * x[i - 1]) / m;
    }
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
}

impl ParisiSolution {
    fn fill_derivatives(&mut self) {
        let (n_t, n_x, dx) = (self.t_grid.len(), self.n_x, self.dx);
        self.phi_x = vec![0.0; n_t * n_x];
        self.phi_xx = vec![0.0; n_t * n_x];
        self.phi_xxx = vec![0.0; n_t * n_x];
        for k in 0..n_t {
            let r = k * n_x..(k + 1) * n_x;
            let u = &self.phi[r.clone()];
            let px = &mut self.phi_x[r.clone()];
            px[0] = -1.0;
            px[n_x - 1] = 1.0;
            px[1] = (u[2] - u[0]) / (2.0 * dx);
            px[n_x - 2] = (u[n_x - 1] - u[n_x - 3]) / (2.0 * dx);
            for i in 2..n_x - 2 {
                px[i] = (8.0 * (u[i + 1] - u[i - 1]) - (u[i + 2] - u[i - 2])) / (12.0 * dx);
            }
            let pxx = &mut self.phi_xx[r.clone()];
            for i in 0..n_x {
                // Rounding noise in the far tails can dip just below zero.
                pxx[i] = Stepper::laplacian(u, dx, i).max(0.0);
            }
            let pxx = &self.phi_xx[r.clone()];
            let pxxx = &mut self.phi_xxx[r];
            for i in 1..n_x - 1 {
                pxxx[i] = (pxx[i + 1] - pxx[i - 1]) / (2.0 * dx);
            }
            pxxx[0] = 0.0;
            pxxx[n_x - 1] = 0.0;
        }
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn measure(&self) -> &ParisiMeasure {
        &self.measure
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn n_t(&self) -> usize {
        self.t_grid.len()
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.dx
    }

    pub fn x_grid(&self) -> Vec<f64> {
        (0..self.n_x).map(|i| self.x(i)).collect()
    }

    /// Index of the node `x = 0`.
    pub fn center(&self) -> usize {
        self.n_x / 2
    }

    pub fn phi_row(&self, k: usize) -> &[f64] {
        &self.phi[k * self.n_x..(k + 1) * self.n_x]
    }

    pub fn phi_x_row(&self, k: usize) -> &[f64] {
        &self.phi_x[k * self.n_x..(k + 1) * self.n_x]
    }

    pub fn phi_xx_row(&self, k: usize) -> &[f64] {
        &self.phi_xx[k * self.n_x..(k + 1) * self.n_x]
    }

    pub fn phi_xxx_row(&self, k: usize) -> &[f64] {
        &self.phi_xxx[k * self.n_x..(k + 1) * self.n_x]
    }

    /// Row `k` and blend weight `w` with `t = (1−w)·t_k + w·t_{k+1}`.
    pub fn locate_t(&self, t: f64) -> (usize, f64) {
        let n_t = self.t_grid.len();
        if t <= 0.0 {
            return (0, 0.0);
        }
        if t >= 1.0 {
            return (n_t - 1, 0.0);
        }
        let p = self.t_grid.partition_point(|&s| s <= t);
        let k = p - 1;
        let w = (t - self.t_grid[k]) / (self.t_grid[k + 1] - self.t_grid[k]);
        (k, w)
    }

    /// `Φ` and derivatives at `(t, x)`.
    pub fn eval(&self, t: f64, x: f64) -> PhiPoint {
        let (k, w) = self.locate_t(t);
        let a = self.eval_row(k, x);
        if w == 0.0 {
            return a;
        }
        let b = self.eval_row(k + 1, x);
        PhiPoint {
            phi: a.phi + w * (b.phi - a.phi),
            phi_x: a.phi_x + w * (b.phi_x - a.phi_x),
            phi_xx: a.phi_xx + w * (b.phi_xx - a.phi_xx),
            phi_xxx: a.phi_xxx + w * (b.phi_xxx - a.phi_xxx),
        }
    }

    /// `Φ` and derivatives on row `k` at arbitrary `x`.
    pub fn eval_row(&self, k: usize, x: f64) -> PhiPoint {
        let n_x = self.n_x;
        let l = self.half_width;
        let base = k * n_x;
        if x.abs() >= l {
            let i = if x > 0.0 { n_x - 1 } else { 0 };
            return PhiPoint {
                phi: self.phi[base + i] + (x.abs() - l),
                phi_x: x.signum(),
                phi_xx: 0.0,
                phi_xxx: 0.0,
            };
        }
        let h = self.dx;
        let pos = (x + l) / h;
        let i = (pos.floor() as usize).min(n_x - 2);
        let s = pos - i as f64;
        let (f0, f1) = (self.phi[base + i], self.phi[base + i + 1]);
        let (d0, d1) = (self.phi_x[base + i] * h, self.phi_x[base + i + 1] * h);
        let (c0, c1) = (self.phi_xx[base + i] * h * h, self.phi_xx[base + i + 1] * h * h);
        let a0 = f0;
        let a1 = d0;
        let a2 = 0.5 * c0;
        let r_f = f1 - (a0 + a1 + a2);
        let r_d = d1 - (a1 + 2.0 * a2);
        let r_c = c1 - 2.0 * a2;
        let a3 = 10.0 * r_f - 4.0 * r_d + 0.5 * r_c;
        let a4 = -15.0 * r_f + 7.0 * r_d - r_c;
        let a5 = 6.0 * r_f - 3.0 * r_d + 0.5 * r_c;
        let p = a0 + s * (a1 + s * (a2 + s * (a3 + s * (a4 + s * a5))));
        let p1 = a1 + s * (2.0 * a2 + s * (3.0 * a3 + s * (4.0 * a4 + s * 5.0 * a5)));
        let p2 = 2.0 * a2 + s * (6.0 * a3 + s * (12.0 * a4 + s * 20.0 * a5));
        let p3 = 6.0 * a3 + s * (24.0 * a4 + s * 60.0 * a5);
        PhiPoint {
            phi: p,
            phi_x: (p1 / h).clamp(-1.0, 1.0),
            // Rounding in the far tails can push the interpolant slightly negative.
            phi_xx: (p2 / (h * h)).max(0.0),
            phi_xxx: p3 / (h * h * h),
        }
    }

    /// `Φ(0, 0)`.
    pub fn phi_origin(&self) -> f64 {
        self.phi[self.center()]
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let header = Header {
            v: FORMAT_VERSION,
            beta: self.beta,
            n_t: self.t_grid.len(),
            n_x: self.n_x,
            half_width: self.half_width,
            m: self.measure.intervals(),
        };
        io::write_container(
            path.as_ref(),
            MAGIC,
            HEADER_LEN,
            &header,
            &[&self.t_grid, self.measure.grid(), self.measure.cdf(), &self.phi],
        )
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let c = io::read_container::<Header>(
            path,
            MAGIC,
            HEADER_LEN,
            |h| h.v,
            FORMAT_VERSION,
            |h| h.n_t + 2 * (h.m + 1) + h.n_t * h.n_x,
        )?;
        let h = c.header;
        if h.n_x < 5 || h.n_t < 2 || h.m < 1 {
            return Err(Error::CorruptHeader { path: path.to_path_buf(), reason: "grid too small".into() });
        }
        let mut it = c.payload.into_iter();
        let t_grid: Vec<f64> = it.by_ref().take(h.n_t).collect();
        let mg: Vec<f64> = it.by_ref().take(h.m + 1).collect();
        let mc: Vec<f64> = it.by_ref().take(h.m + 1).collect();
        let phi: Vec<f64> = it.collect();
        let measure = ParisiMeasure::new(mg, mc).map_err(|e| Error::CorruptHeader {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        let mut sol = ParisiSolution {
            beta: h.beta,
            measure,
            t_grid,
            half_width: h.half_width,
            n_x: h.n_x,
            dx: 2.0 * h.half_width / (h.n_x - 1) as f64,
            phi,
            phi_x: Vec::new(),
            phi_xx: Vec::new(),
            phi_xxx: Vec::new(),
        };
        sol.fill_derivatives();
        Ok(sol)
    }
}
