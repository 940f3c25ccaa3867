//! The modified objective `obj(t, σ) = β⟨σ, Aσ⟩ − Σᵢ Λ_γ(t, σᵢ) − β²n ∫ₜ¹ F(s) s ds`.

use crate::error::{check_len, Error, Result};
use crate::instance::SkInstance;
use crate::legendre::{DualEntropy, LambdaPoint};
use crate::parisi::ParisiMeasure;
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct Objective {
    inst: Arc<SkInstance>,
    de: DualEntropy,
    beta: f64,
}

impl Objective {
    pub fn new(inst: Arc<SkInstance>, de: DualEntropy, beta: f64) -> Result<Self> {
        if (de.beta() - beta).abs() > 1e-12 * beta.max(1.0) {
            return Err(Error::InvalidArgument(format!(
                "objective beta {beta} differs from the solution's beta {}",
                de.beta()
            )));
        }
        Ok(Self { inst, de, beta })
    }

    pub fn instance(&self) -> &Arc<SkInstance> {
        &self.inst
    }

    pub fn dual(&self) -> &DualEntropy {
        &self.de
    }

    pub fn measure(&self) -> &ParisiMeasure {
        self.de.solution().measure()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n(&self) -> usize {
        self.inst.n()
    }

    /// `β²n ∫ₜ¹ F(s) s ds`.
    pub fn radial_term(&self, t: f64) -> f64 {
        self.beta * self.beta * self.n() as f64 * self.measure().integral_sf(t, 1.0)
    }

    fn points(&self, t: f64, sigma: &[f64]) -> Result<Vec<LambdaPoint>> {
        check_len(self.n(), sigma.len())?;
        self.de.eval_many(t, sigma, None)
    }

    pub fn eval_obj(&self, t: f64, sigma: &[f64]) -> Result<f64> {
        let pts = self.points(t, sigma)?;
        let h = self.inst.hamiltonian(sigma)?;
        let entropy: f64 = pts.iter().map(|p| p.value).sum();
        Ok(self.beta * h - entropy - self.radial_term(t))
    }

    /// `2βA_sym σ − (∂_yΛ_γ(t, σᵢ))ᵢ`.
    pub fn grad_obj(&self, t: f64, sigma: &[f64]) -> Result<Vec<f64>> {
        let pts = self.points(t, sigma)?;
        let mut g = self.inst.sym_matvec(sigma);
        for (gi, p) in g.iter_mut().zip(&pts) {
            *gi = 2.0 * self.beta * *gi - p.d1;
        }
        Ok(g)
    }

    /// The diagonal `(∂_yyΛ_γ(t, σᵢ))ᵢ`; the Hessian is `2βA_sym − diag(·)`.
    pub fn hess_diag(&self, t: f64, sigma: &[f64]) -> Result<Vec<f64>> {
        Ok(self.points(t, sigma)?.iter().map(|p| p.d2).collect())
    }

    /// Hessian–vector product.
    pub fn hess_vec(&self, t: f64, sigma: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n(), v.len())?;
        let d = self.hess_diag(t, sigma)?;
        let mut out = self.inst.sym_matvec(v);
        for i in 0..out.len() {
            out[i] = 2.0 * self.beta * out[i] - d[i] * v[i];
        }
        Ok(out)
    }
}
