//! Gaussian steps with covariance `Q²`.
//!
//! Both samplers apply the factor `L = √c · Π R^{1/2}` to a standard normal vector,
//! where `Q² = c · Π R Π` and `R = (b̃² + (ã − H)²)⁻¹` with `H = 2βA_sym − D`.
//! Since `L Lᵀ = Q²` the draws have exactly the covariance `Q²`. The exact sampler
//! evaluates `R^{1/2}` in the eigenbasis of `H`; the iterative one uses Lanczos on `H`.

use crate::error::{Error, Result};
use crate::lanczos::lanczos_apply;
use crate::spectral::CovarianceOperator;
use rand::Rng;
use rand_distr::StandardNormal;

/// Cost and conditioning of one factor application.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SampleInfo {
    /// Lanczos iterations (0 for the exact sampler).
    pub iterations: usize,
    /// Relative change of the last Lanczos refinement.
    pub achieved: f64,
    /// Estimated condition number of `M = b̃² + (ã − H)²` over the Ritz interval.
    pub condition: f64,
}

pub fn standard_normal(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// `κ(M)` when the spectrum of `H` lies in `[lo, hi]`.
pub fn condition_estimate(cov: &CovarianceOperator, lo: f64, hi: f64) -> f64 {
    let (a, b) = (cov.a_tilde(), cov.b_tilde());
    let m = |l: f64| b * b + (a - l) * (a - l);
    let min = if (lo..=hi).contains(&a) { b * b } else { m(lo).min(m(hi)) };
    m(lo).max(m(hi)) / min
}

fn finish(cov: &CovarianceOperator, mut y: Vec<f64>) -> Vec<f64> {
    cov.project(&mut y);
    let c = cov.prefactor().sqrt();
    y.iter_mut().for_each(|x| *x *= c);
    y
}

fn root_weight(cov: &CovarianceOperator) -> impl Fn(f64) -> f64 + '_ {
    move |l| cov.resolvent_weight(l).sqrt()
}

/// `L g` using the dense eigendecomposition.
pub fn apply_factor_exact(cov: &CovarianceOperator, g: &[f64]) -> Result<(Vec<f64>, SampleInfo)> {
    if cov.backend() != crate::spectral::Backend::Dense {
        return Err(Error::Backend("exact sampling needs the dense backend".into()));
    }
    crate::error::check_len(cov.n(), g.len())?;
    let r = cov.apply_function(g, root_weight(cov), 0.0)?;
    let info = SampleInfo {
        iterations: 0,
        achieved: 0.0,
        condition: condition_estimate(cov, r.info.ritz_min, r.info.ritz_max),
    };
    Ok((finish(cov, r.y), info))
}

/// `L g` by Lanczos, with relative application error about `tol`.
pub fn apply_factor_iterative(cov: &CovarianceOperator, g: &[f64], tol: f64) -> Result<(Vec<f64>, SampleInfo)> {
    crate::error::check_len(cov.n(), g.len())?;
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let r = lanczos_apply(|x, out| cov.shifted_matvec(x, out), g, root_weight(cov), tol, cov.lanczos_max_iter)?;
    let info = SampleInfo {
        iterations: r.info.iterations,
        achieved: r.info.achieved,
        condition: condition_estimate(cov, r.info.ritz_min, r.info.ritz_max),
    };
    Ok((finish(cov, r.y), info))
}

pub fn sample_exact(cov: &CovarianceOperator, rng: &mut impl Rng) -> Result<Vec<f64>> {
    let g = standard_normal(cov.n(), rng);
    Ok(apply_factor_exact(cov, &g)?.0)
}

pub fn sample_iterative(cov: &CovarianceOperator, rng: &mut impl Rng, tol: f64) -> Result<(Vec<f64>, SampleInfo)> {
    let g = standard_normal(cov.n(), rng);
    apply_factor_iterative(cov, &g, tol)
}

/// Draws with whichever method matches the operator's backend.
pub fn sample(cov: &CovarianceOperator, rng: &mut impl Rng, tol: f64) -> Result<(Vec<f64>, SampleInfo)> {
    let g = standard_normal(cov.n(), rng);
    match cov.backend() {
        crate::spectral::Backend::Dense => apply_factor_exact(cov, &g),
        crate::spectral::Backend::MatrixFree => apply_factor_iterative(cov, &g, tol),
    }
}
