//! Lanczos approximation of `f(H)v` for symmetric `H` given only by matvecs.

use crate::error::{Error, Result};
use crate::instance::dot;

#[derive(Clone, Copy, Debug)]
pub struct LanczosInfo {
    pub iterations: usize,
    /// Norm of the last change of the estimate relative to its norm.
    pub achieved: f64,
    pub ritz_min: f64,
    pub ritz_max: f64,
}

#[derive(Clone, Debug)]
pub struct LanczosResult {
    pub y: Vec<f64>,
    pub info: LanczosInfo,
    /// Ritz values of the final Krylov space.
    pub ritz: Vec<f64>,
}

const FIRST_CHECK: usize = 4;

/// Approximates `f(H)v` with full reorthogonalization, stopping when successive
/// estimates differ by less than `tol / 4` relative to the estimate.
///
/// Estimates are compared at geometrically spaced Krylov dimensions (about 15%
/// apart), which keeps the cost of the small eigensolves below that of the matvecs.
pub fn lanczos_apply(
    matvec: impl Fn(&[f64], &mut [f64]),
    v: &[f64],
    f: impl Fn(f64) -> f64,
    tol: f64,
    max_iter: usize,
) -> Result<LanczosResult> {
    let n = v.len();
    let beta0 = dot(v, v).sqrt();
    if beta0 == 0.0 {
        return Ok(LanczosResult {
            y: vec![0.0; n],
            info: LanczosInfo { iterations: 0, achieved: 0.0, ritz_min: 0.0, ritz_max: 0.0 },
            ritz: Vec::new(),
        });
    }
    let max_iter = max_iter.min(n).max(1);
    let mut basis: Vec<Vec<f64>> = vec![v.iter().map(|x| x / beta0).collect()];
    let mut alpha = Vec::new();
    let mut offd: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut prev: Vec<f64> = Vec::new();
    let mut next_check = FIRST_CHECK;

    loop {
        let j = basis.len() - 1;
        matvec(&basis[j], &mut w);
        let a = dot(&basis[j], &w);
        alpha.push(a);
        for (wi, qi) in w.iter_mut().zip(&basis[j]) {
            *wi -= a * qi;
        }
        if j > 0 {
            let b = offd[j - 1];
            for (wi, qi) in w.iter_mut().zip(&basis[j - 1]) {
                *wi -= b * qi;
            }
        }
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let b = dot(&w, &w).sqrt();
        let k = alpha.len();
        let breakdown = b <= 1e-13 * a.abs().max(offd.last().copied().unwrap_or(0.0)).max(1e-300);
        let last = breakdown || k >= max_iter;
        if k >= next_check || last {
            next_check = (k + FIRST_CHECK).max((k as f64 * 1.15).ceil() as usize);
            let (coef, ritz) = tridiagonal_function(&alpha, &offd, &f, beta0)?;
            let norm = dot(&coef, &coef).sqrt();
            let diff: f64 = coef
                .iter()
                .enumerate()
                .map(|(i, c)| (c - prev.get(i).copied().unwrap_or(0.0)).powi(2))
                .sum::<f64>()
                .sqrt();
            let achieved = if norm > 0.0 { diff / norm } else { 0.0 };
            let done = breakdown || achieved <= 0.25 * tol;
            if done || last {
                if !done {
                    return Err(Error::NotConverged { iterations: k, achieved });
                }
                let mut y = vec![0.0; n];
                for (c, q) in coef.iter().zip(&basis) {
                    for (yi, qi) in y.iter_mut().zip(q) {
                        *yi += c * qi;
                    }
                }
                let info = LanczosInfo {
                    iterations: k,
                    achieved: if breakdown { 0.0 } else { achieved },
                    ritz_min: ritz.iter().copied().fold(f64::INFINITY, f64::min),
                    ritz_max: ritz.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                };
                return Ok(LanczosResult { y, info, ritz });
            }
            prev = coef;
        }
        offd.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
}

/// `β₀ · f(T) e₁` for the tridiagonal `T`, and the eigenvalues of `T`.
fn tridiagonal_function(alpha: &[f64], offd: &[f64], f: &impl Fn(f64) -> f64, beta0: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let k = alpha.len();
    let t = faer::Mat::<f64>::from_fn(k, k, |i, j| {
        if i == j {
            alpha[i]
        } else if i.abs_diff(j) == 1 {
            offd[i.min(j)]
        } else {
            0.0
        }
    });
    let eig = t
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Internal(format!("tridiagonal eigensolve failed: {e:?}")))?;
    let u = eig.U();
    let theta: Vec<f64> = (0..k).map(|i| eig.S()[i]).collect();
    let mut coef = vec![0.0; k];
    for m in 0..k {
        let s = beta0 * f(theta[m]) * u[(0, m)];
        for i in 0..k {
            coef[i] += u[(i, m)] * s;
        }
    }
    Ok((coef, theta))
}
