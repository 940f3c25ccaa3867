//! Free-probability quantities for `√2β·semicircle − D` and the step covariance
//! `Q² = 2βn^δ b̃ Π (b̃² + (ã − 2βA_sym + D)²)⁻¹ Π`, with `Π` the projector
//! orthogonal to the current iterate.

use crate::error::{check_len, Error, Result};
use crate::instance::{dot, SkInstance};
use crate::lanczos::{lanczos_apply, LanczosResult};
use crate::legendre::DualEntropy;
use crate::rng;
use num_complex::Complex64;
use rand::Rng;
use std::sync::Arc;

/// Largest `n` accepted by the dense backend.
pub const DENSE_CUTOFF: usize = 4096;

/// `g_{−D}(z) = (1/n) Σ 1/(z + Dᵢ)`.
pub fn cauchy_transform(d: &[f64], z: Complex64) -> Result<Complex64> {
    if d.is_empty() {
        return Err(Error::InvalidArgument("empty diagonal".into()));
    }
    let mut s = Complex64::new(0.0, 0.0);
    for &di in d {
        let w = z + di;
        if w.norm() == 0.0 {
            return Err(Error::Domain(format!("pole of the Cauchy transform at z = {z}")));
        }
        s += w.inv();
    }
    Ok(s / d.len() as f64)
}

/// The unique `a > −min D` with `2β² (1/n) Σ (a + Dᵢ)⁻² = 1`.
pub fn solve_shift_a(d: &[f64], beta: f64) -> Result<f64> {
    if d.is_empty() || !(beta > 0.0) {
        return Err(Error::InvalidArgument("need a nonempty diagonal and beta > 0".into()));
    }
    let dmin = d.iter().copied().fold(f64::INFINITY, f64::min);
    let b2 = 2.0 * beta * beta;
    let n = d.len() as f64;
    let excess = |a: f64| b2 * d.iter().map(|&x| (a + x).powi(-2)).sum::<f64>() / n - 1.0;
    // Every term is at most (a + min D)⁻², so the root lies within √2β of −min D.
    let (mut lo, mut hi) = (-dmin, -dmin + b2.sqrt());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut a = hi;
    for _ in 0..3 {
        let f = excess(a);
        let df = -2.0 * b2 * d.iter().map(|&x| (a + x).powi(-3)).sum::<f64>() / n;
        let next = a - f / df;
        if next > -dmin && excess(next).abs() < f.abs() {
            a = next;
        }
    }
    Ok(a)
}

/// `a + 2β² (1/n) Σ (a + Dᵢ)⁻¹`, the right edge of the limiting spectrum.
pub fn free_edge(d: &[f64], beta: f64) -> Result<f64> {
    let a = solve_shift_a(d, beta)?;
    Ok(a + 2.0 * beta * beta * d.iter().map(|&x| 1.0 / (a + x)).sum::<f64>() / d.len() as f64)
}

/// The point `z̃ = ã + ib̃ = ib + 2β² g_{−D}(ib)` with `b = βn^{−δ}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TildeZ {
    pub a_tilde: f64,
    pub b_tilde: f64,
    pub b: f64,
}

pub fn compute_tilde_z(d: &[f64], beta: f64, delta: f64) -> Result<TildeZ> {
    let n = d.len();
    let resid = normalization_residual(d, beta);
    if resid > 1e-8 {
        return Err(Error::InvalidArgument(format!("diagonal is not normalized (residual {resid:.2e})")));
    }
    let b = beta * (n as f64).powf(-delta);
    let g = cauchy_transform(d, Complex64::new(0.0, b))?;
    let a_tilde = 2.0 * beta * beta * g.re;
    let b_tilde = b + 2.0 * beta * beta * g.im;
    if !(b_tilde > 0.0) {
        return Err(Error::Internal(format!("b̃ = {b_tilde} is not positive")));
    }
    Ok(TildeZ { a_tilde, b_tilde, b })
}

/// `|2β² (1/n) Σ Dᵢ⁻² − 1|`.
pub fn normalization_residual(d: &[f64], beta: f64) -> f64 {
    (2.0 * beta * beta * d.iter().map(|x| x.powi(-2)).sum::<f64>() / d.len() as f64 - 1.0).abs()
}

/// Rescales positive curvatures `c` to `D = s·c` with `2β² (1/n) Σ Dᵢ⁻² = 1`,
/// returning `(D, s)`.
pub fn normalize_diagonal(c: &[f64], beta: f64) -> (Vec<f64>, f64) {
    let s = (2.0 * beta * beta * c.iter().map(|x| x.powi(-2)).sum::<f64>() / c.len() as f64).sqrt();
    (c.iter().map(|x| s * x).collect(), s)
}

/// Normalized `D(t, σ)` built from `∂_yyΛ_γ(t, σᵢ)`. `hints` warm-starts the roots.
pub fn build_normalized_d(
    de: &DualEntropy,
    t: f64,
    sigma: &[f64],
    hints: Option<&mut [f64]>,
) -> Result<(Vec<f64>, f64)> {
    let pts = de.eval_many(t, sigma, hints)?;
    let c: Vec<f64> = pts.iter().map(|p| p.d2).collect();
    Ok(normalize_diagonal(&c, de.beta()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Dense,
    #[serde(rename = "iterative")]
    MatrixFree,
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::Dense => "dense",
            Backend::MatrixFree => "iterative",
        })
    }
}

impl std::str::FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Backend::Dense),
            "iterative" | "matrix-free" => Ok(Backend::MatrixFree),
            other => Err(Error::InvalidArgument(format!("unknown backend `{other}`"))),
        }
    }
}

/// Trace estimation strategy for the matrix-free backend.
#[derive(Clone, Copy, Debug)]
pub enum TraceEstimator {
    /// Probe with every basis vector (exact up to the Lanczos tolerance).
    Exact,
    /// Hutchinson's estimator with Rademacher probes.
    Hutchinson { probes: usize, seed: u64 },
}

#[derive(Clone, Debug)]
struct DenseSpectrum {
    eigvals: Vec<f64>,
    /// Column-major eigenvectors.
    eigvecs: Vec<f64>,
}

/// The step covariance `Q²` at one iterate.
#[derive(Clone, Debug)]
pub struct CovarianceOperator {
    inst: Arc<SkInstance>,
    beta: f64,
    delta: f64,
    d: Vec<f64>,
    norm_factor: f64,
    tilde: TildeZ,
    /// Unit vector along σ, or `None` when σ = 0.
    direction: Option<Vec<f64>>,
    sigma: Vec<f64>,
    dense: Option<DenseSpectrum>,
    /// Relative accuracy of matrix-free resolvent applications.
    pub lanczos_tol: f64,
    pub lanczos_max_iter: usize,
}

/// Assembles `Q²` at `(t, σ)`.
pub fn build_covariance(
    inst: Arc<SkInstance>,
    de: &DualEntropy,
    t: f64,
    sigma: &[f64],
    delta: f64,
    backend: Backend,
    hints: Option<&mut [f64]>,
) -> Result<CovarianceOperator> {
    check_len(inst.n(), sigma.len())?;
    let (d, s) = build_normalized_d(de, t, sigma, hints)?;
    CovarianceOperator::from_diagonal(inst, d, s, sigma, de.beta(), delta, backend)
}

impl CovarianceOperator {
    /// Builds the operator from an already normalized `D`.
    pub fn from_diagonal(
        inst: Arc<SkInstance>,
        d: Vec<f64>,
        norm_factor: f64,
        sigma: &[f64],
        beta: f64,
        delta: f64,
        backend: Backend,
    ) -> Result<Self> {
        let n = inst.n();
        check_len(n, d.len())?;
        check_len(n, sigma.len())?;
        if !(0.0..=1.0 / 22.0 + 1e-15).contains(&delta) {
            return Err(Error::InvalidArgument(format!("delta = {delta} outside [0, 1/22]")));
        }
        if backend == Backend::Dense && n > DENSE_CUTOFF {
            return Err(Error::Backend(format!(
                "dense backend is limited to n ≤ {DENSE_CUTOFF}; use the iterative backend for n = {n}"
            )));
        }
        let tilde = compute_tilde_z(&d, beta, delta)?;
        let norm = dot(sigma, sigma).sqrt();
        let direction = (norm > 0.0).then(|| sigma.iter().map(|x| x / norm).collect());
        let mut op = Self {
            inst,
            beta,
            delta,
            d,
            norm_factor,
            tilde,
            direction,
            sigma: sigma.to_vec(),
            dense: None,
            lanczos_tol: 1e-6,
            lanczos_max_iter: 1000,
        };
        if backend == Backend::Dense {
            op.dense = Some(op.eigendecompose()?);
        }
        Ok(op)
    }

    fn eigendecompose(&self) -> Result<DenseSpectrum> {
        let n = self.n();
        let a = self.inst.a_sym();
        let two_beta = 2.0 * self.beta;
        let h = faer::Mat::<f64>::from_fn(n, n, |i, j| {
            two_beta * a[i * n + j] - if i == j { self.d[i] } else { 0.0 }
        });
        let eig = h
            .self_adjoint_eigen(faer::Side::Lower)
            .map_err(|e| Error::Internal(format!("eigendecomposition failed: {e:?}")))?;
        let u = eig.U();
        let mut eigvecs = vec![0.0; n * n];
        for k in 0..n {
            for i in 0..n {
                eigvecs[k * n + i] = u[(i, k)];
            }
        }
        Ok(DenseSpectrum { eigvals: (0..n).map(|k| eig.S()[k]).collect(), eigvecs })
    }

    pub fn n(&self) -> usize {
        self.inst.n()
    }

    pub fn instance(&self) -> &Arc<SkInstance> {
        &self.inst
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn backend(&self) -> Backend {
        if self.dense.is_some() {
            Backend::Dense
        } else {
            Backend::MatrixFree
        }
    }

    pub fn a_tilde(&self) -> f64 {
        self.tilde.a_tilde
    }

    pub fn b_tilde(&self) -> f64 {
        self.tilde.b_tilde
    }

    pub fn b(&self) -> f64 {
        self.tilde.b
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn norm_factor(&self) -> f64 {
        self.norm_factor
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `2βn^δ b̃`, the scalar in front of the projected resolvent square.
    pub fn prefactor(&self) -> f64 {
        2.0 * self.beta * (self.n() as f64).powf(self.delta) * self.tilde.b_tilde
    }

    /// `1/(b̃² + (ã − λ)²)` for an eigenvalue `λ` of `2βA_sym − D`.
    pub fn resolvent_weight(&self, lambda: f64) -> f64 {
        let (a, b) = (self.tilde.a_tilde, self.tilde.b_tilde);
        1.0 / (b * b + (a - lambda) * (a - lambda))
    }

    /// `(2βA_sym − D) v`.
    pub fn shifted_matvec(&self, v: &[f64], out: &mut [f64]) {
        self.inst.sym_matvec_into(v, out);
        let two_beta = 2.0 * self.beta;
        for i in 0..out.len() {
            out[i] = two_beta * out[i] - self.d[i] * v[i];
        }
    }

    /// `Π v`.
    pub fn project(&self, v: &mut [f64]) {
        if let Some(s) = &self.direction {
            let c = dot(s, v);
            for (vi, si) in v.iter_mut().zip(s) {
                *vi -= c * si;
            }
        }
    }

    /// `f(2βA_sym − D) v` by eigendecomposition or Lanczos.
    pub fn apply_function(&self, v: &[f64], f: impl Fn(f64) -> f64, tol: f64) -> Result<LanczosResult> {
        if let Some(ds) = &self.dense {
            let n = self.n();
            let mut y = vec![0.0; n];
            for k in 0..n {
                let col = &ds.eigvecs[k * n..(k + 1) * n];
                let c = f(ds.eigvals[k]) * dot(col, v);
                for (yi, ui) in y.iter_mut().zip(col) {
                    *yi += c * ui;
                }
            }
            let info = crate::lanczos::LanczosInfo {
                iterations: 0,
                achieved: 0.0,
                ritz_min: ds.eigvals[0],
                ritz_max: ds.eigvals[n - 1],
            };
            return Ok(LanczosResult { y, info, ritz: ds.eigvals.clone() });
        }
        lanczos_apply(|x, out| self.shifted_matvec(x, out), v, f, tol, self.lanczos_max_iter)
    }

    /// `Q² v`.
    pub fn apply_q2(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut w = v.to_vec();
        self.project(&mut w);
        let mut y = self.apply_function(&w, |l| self.resolvent_weight(l), self.lanczos_tol)?.y;
        self.project(&mut y);
        let c = self.prefactor();
        y.iter_mut().for_each(|x| *x *= c);
        Ok(y)
    }

    fn dense_spectrum(&self) -> Result<&DenseSpectrum> {
        self.dense.as_ref().ok_or_else(|| Error::Backend("operation needs the dense backend".into()))
    }

    /// Weights `r_k` and squared components `w_k²` of the direction in the eigenbasis.
    fn dense_weights(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let ds = self.dense_spectrum()?;
        let n = self.n();
        let r: Vec<f64> = ds.eigvals.iter().map(|&l| self.resolvent_weight(l)).collect();
        let w2 = match &self.direction {
            Some(s) => (0..n).map(|k| dot(&ds.eigvecs[k * n..(k + 1) * n], s).powi(2)).collect(),
            None => vec![0.0; n],
        };
        Ok((r, w2))
    }

    /// `Q²` as a dense row-major matrix.
    pub fn materialize(&self) -> Result<Vec<f64>> {
        let n = self.n();
        let mut m = vec![0.0; n * n];
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = self.apply_q2(&e)?;
            for i in 0..n {
                m[i * n + j] = col[i];
            }
        }
        Ok(m)
    }

    /// `(1/n) tr Q²`.
    pub fn trace_normalized(&self, estimator: TraceEstimator) -> Result<f64> {
        let n = self.n() as f64;
        if self.dense.is_some() {
            let (r, w2) = self.dense_weights()?;
            let tr: f64 = r.iter().sum::<f64>() - r.iter().zip(&w2).map(|(a, b)| a * b).sum::<f64>();
            return Ok(self.prefactor() * tr / n);
        }
        self.probe_trace(estimator, |v| Ok(v.to_vec()))
    }

    /// Estimates `(1/n) tr(X Q² X)` for the operator `X` applied by `left`.
    fn probe_trace(&self, estimator: TraceEstimator, left: impl Fn(&[f64]) -> Result<Vec<f64>>) -> Result<f64> {
        let n = self.n();
        let probes: Vec<Vec<f64>> = match estimator {
            TraceEstimator::Exact => (0..n)
                .map(|j| {
                    let mut e = vec![0.0; n];
                    e[j] = 1.0;
                    e
                })
                .collect(),
            TraceEstimator::Hutchinson { probes, seed } => (0..probes)
                .map(|p| {
                    let mut r = rng::stream(seed, rng::domain::PROBE + p as u64);
                    (0..n).map(|_| if r.gen::<bool>() { 1.0 } else { -1.0 }).collect()
                })
                .collect(),
        };
        let count = probes.len() as f64;
        let mut total = 0.0;
        for g in &probes {
            let xg = left(g)?;
            total += dot(&xg, &self.apply_q2(&xg)?);
        }
        let scale = match estimator {
            TraceEstimator::Exact => 1.0,
            TraceEstimator::Hutchinson { .. } => n as f64 / count,
        };
        Ok(total * scale / n as f64)
    }

    /// Diagonal of `Q²` (dense backend).
    pub fn diag_q2(&self) -> Result<Vec<f64>> {
        let ds = self.dense_spectrum()?;
        let n = self.n();
        let (r, _) = self.dense_weights()?;
        let mut rii = vec![0.0; n];
        for k in 0..n {
            let col = &ds.eigvecs[k * n..(k + 1) * n];
            for i in 0..n {
                rii[i] += r[k] * col[i] * col[i];
            }
        }
        let c = self.prefactor();
        let Some(s) = &self.direction else {
            return Ok(rii.iter().map(|x| c * x).collect());
        };
        let rs = self.apply_function(s, |l| self.resolvent_weight(l), 0.0)?.y;
        let srs = dot(s, &rs);
        Ok((0..n).map(|i| c * (rii[i] - 2.0 * s[i] * rs[i] + s[i] * s[i] * srs)).collect())
    }

    /// `‖diag Q² − 2β² D⁻²‖₂` with the normalized norm `((1/n) Σ ·²)^{1/2}`.
    pub fn diag_error(&self) -> Result<f64> {
        let diag = self.diag_q2()?;
        let b2 = 2.0 * self.beta * self.beta;
        Ok(normalized_norm(diag.iter().zip(&self.d).map(|(q, d)| q - b2 / (d * d))))
    }

    /// `‖diag(b̃ R) − b(b² + D²)⁻¹‖₂` (normalized), where `R` is the unprojected
    /// resolvent square.
    pub fn resolvent_diag_error(&self) -> Result<f64> {
        let ds = self.dense_spectrum()?;
        let n = self.n();
        let (r, _) = self.dense_weights()?;
        let mut rii = vec![0.0; n];
        for k in 0..n {
            let col = &ds.eigvecs[k * n..(k + 1) * n];
            for i in 0..n {
                rii[i] += r[k] * col[i] * col[i];
            }
        }
        let (b, bt) = (self.tilde.b, self.tilde.b_tilde);
        Ok(normalized_norm(rii.iter().zip(&self.d).map(|(x, d)| bt * x - b / (b * b + d * d))))
    }

    /// `‖(2βA_sym − D − 2β² tr_n D⁻¹) Q‖₂` in the normalized Hilbert–Schmidt norm.
    pub fn approx_eigvec_residual(&self, estimator: TraceEstimator) -> Result<f64> {
        let n = self.n();
        let shift = 2.0 * self.beta * self.beta * self.d.iter().map(|x| 1.0 / x).sum::<f64>() / n as f64;
        if self.dense.is_some() {
            let ds = self.dense_spectrum()?;
            let (r, w2) = self.dense_weights()?;
            let m: Vec<f64> = ds.eigvals.iter().map(|l| (l - shift) * (l - shift)).collect();
            let tr_mr: f64 = m.iter().zip(&r).map(|(a, b)| a * b).sum();
            let cross: f64 = (0..n).map(|k| w2[k] * m[k] * r[k]).sum();
            let sm: f64 = (0..n).map(|k| w2[k] * m[k]).sum();
            let sr: f64 = (0..n).map(|k| w2[k] * r[k]).sum();
            let tr = tr_mr - 2.0 * cross + sm * sr;
            return Ok((self.prefactor() * tr.max(0.0) / n as f64).sqrt());
        }
        let tr = self.probe_trace(estimator, |v| {
            let mut out = vec![0.0; n];
            self.shifted_matvec(v, &mut out);
            for i in 0..n {
                out[i] -= shift * v[i];
            }
            Ok(out)
        })?;
        Ok(tr.max(0.0).sqrt())
    }

    /// `2βn^δ b̃ · max_λ 1/(b̃² + (ã − λ)²) ≥ ‖Q²‖_op`. Uses the dense spectrum, or
    /// `1/b̃²` as a spectrum-free bound.
    pub fn op_norm_bound(&self) -> f64 {
        let peak = match &self.dense {
            Some(ds) => ds.eigvals.iter().map(|&l| self.resolvent_weight(l)).fold(0.0, f64::max),
            None => 1.0 / (self.tilde.b_tilde * self.tilde.b_tilde),
        };
        self.prefactor() * peak
    }
}

fn normalized_norm(it: impl Iterator<Item = f64>) -> f64 {
    let (s, c) = it.fold((0.0, 0usize), |(s, c), x| (s + x * x, c + 1));
    (s / c as f64).sqrt()
}
