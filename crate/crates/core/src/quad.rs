//! Gauss–Hermite quadrature for Gaussian expectations.

use crate::error::{Error, Result};

/// Nodes and weights for `∫ f(x) e^{−x²} dx`, from the Golub–Welsch eigenproblem.
#[derive(Clone, Debug)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument("quadrature order must be positive".into()));
        }
        let jacobi = faer::Mat::<f64>::from_fn(order, order, |i, j| {
            if i.abs_diff(j) == 1 {
                (i.max(j) as f64 / 2.0).sqrt()
            } else {
                0.0
            }
        });
        let eig = jacobi
            .self_adjoint_eigen(faer::Side::Lower)
            .map_err(|e| Error::Internal(format!("Golub-Welsch eigensolve failed: {e:?}")))?;
        let u = eig.U();
        let sqrt_pi = std::f64::consts::PI.sqrt();
        let nodes = (0..order).map(|k| eig.S()[k]).collect();
        let weights = (0..order).map(|k| sqrt_pi * u[(0, k)] * u[(0, k)]).collect();
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `E f(Z)` for `Z ~ N(0, sd²)`.
    pub fn expect_normal(&self, sd: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let scale = std::f64::consts::SQRT_2 * sd;
        let s: f64 = self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(scale * x)).sum();
        s / std::f64::consts::PI.sqrt()
    }

    /// Nodes `z_k` and probability weights `p_k` with `E f(Z) ≈ Σ p_k f(z_k)`.
    pub fn normal_rule(&self, sd: f64) -> (Vec<f64>, Vec<f64>) {
        let scale = std::f64::consts::SQRT_2 * sd;
        let inv = 1.0 / std::f64::consts::PI.sqrt();
        (
            self.nodes.iter().map(|x| scale * x).collect(),
            self.weights.iter().map(|w| w * inv).collect(),
        )
    }
}

/// `log(2 cosh x)` without overflow.
pub fn log2cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p()
}
