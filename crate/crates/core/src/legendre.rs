//! The regularized dual entropy `Λ_γ(t, y) = sup_x (xy − Φ(t, x) − γx²/2)`.
//!
//! The maximizer solves `∂ₓΦ(t, x) + γx = y`; it is found by Newton's method
//! safeguarded by a bracket that always contains the root.

use crate::error::{Error, Result};
use crate::parisi::ParisiSolution;
use rayon::prelude::*;
use std::sync::Arc;

const MAX_ITER: usize = 200;

/// `Λ_γ` and its `y` derivatives at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaPoint {
    pub value: f64,
    /// `∂_yΛ_γ`, equal to the maximizer `x`.
    pub d1: f64,
    /// `∂_yyΛ_γ = 1/(∂ₓₓΦ + γ)`.
    pub d2: f64,
    /// `∂_yyyΛ_γ = −∂ₓₓₓΦ/(∂ₓₓΦ + γ)³`.
    pub d3: f64,
}

#[derive(Clone, Debug)]
pub struct DualEntropy {
    sol: Arc<ParisiSolution>,
    gamma: f64,
    tol: f64,
}

impl DualEntropy {
    pub fn new(sol: Arc<ParisiSolution>, gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidArgument(format!("gamma must be nonnegative, got {gamma}")));
        }
        Ok(Self { sol, gamma, tol: 1e-13 })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn beta(&self) -> f64 {
        self.sol.beta()
    }

    pub fn solution(&self) -> &Arc<ParisiSolution> {
        &self.sol
    }

    /// Same solution, different regularization.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Ok(Self::new(self.sol.clone(), gamma)?.with_tolerance(self.tol))
    }

    pub fn eval_lambda(&self, t: f64, y: f64) -> Result<LambdaPoint> {
        self.eval_lambda_from(t, y, None)
    }

    /// As [`eval_lambda`](Self::eval_lambda), starting Newton from `hint` when given.
    pub fn eval_lambda_from(&self, t: f64, y: f64, hint: Option<f64>) -> Result<LambdaPoint> {
        let x = self.solve_root(t, y, hint)?;
        let p = self.sol.eval(t, x);
        let curv = p.phi_xx + self.gamma;
        let d2 = 1.0 / curv;
        Ok(LambdaPoint {
            value: x * y - p.phi - 0.5 * self.gamma * x * x,
            d1: x,
            d2,
            d3: -p.phi_xxx * d2 * d2 * d2,
        })
    }

    /// `v(t, y) = ∂ₓₓΦ(t, x(y)) + γ = 1/∂_yyΛ_γ`.
    pub fn eval_v(&self, t: f64, y: f64) -> Result<f64> {
        self.eval_v_from(t, y, None).map(|(v, _)| v)
    }

    /// `v` and the root `x`, warm-started from `hint`.
    pub fn eval_v_from(&self, t: f64, y: f64, hint: Option<f64>) -> Result<(f64, f64)> {
        let x = self.solve_root(t, y, hint)?;
        Ok((self.sol.eval(t, x).phi_xx + self.gamma, x))
    }

    /// Evaluates every coordinate of `ys`; `hints` carries roots between calls.
    pub fn eval_many(&self, t: f64, ys: &[f64], hints: Option<&mut [f64]>) -> Result<Vec<LambdaPoint>> {
        match hints {
            Some(h) => ys
                .par_iter()
                .zip(h.par_iter_mut())
                .map(|(&y, hx)| {
                    let p = self.eval_lambda_from(t, y, Some(*hx))?;
                    *hx = p.d1;
                    Ok(p)
                })
                .collect(),
            None => ys.par_iter().map(|&y| self.eval_lambda(t, y)).collect(),
        }
    }

    fn solve_root(&self, t: f64, y: f64, hint: Option<f64>) -> Result<f64> {
        let gamma = self.gamma;
        if !y.is_finite() {
            return Err(Error::Domain(format!("non-finite argument y = {y}")));
        }
        if gamma == 0.0 && y.abs() >= 1.0 {
            return Err(Error::Domain(format!("|y| = {} ≥ 1 is outside the domain of Λ", y.abs())));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        let g = |x: f64| {
            let p = self.sol.eval(t, x);
            (p.phi_x + gamma * x - y, p.phi_xx + gamma)
        };
        let (mut lo, mut hi) = if gamma > 0.0 {
            ((y - 1.0) / gamma, (y + 1.0) / gamma)
        } else {
            // Φₓ is odd and increasing with |Φₓ| < 1 only inside the window.
            let l = self.sol.half_width();
            if y > 0.0 {
                (0.0, l)
            } else {
                (-l, 0.0)
            }
        };
        let guess = hint.unwrap_or_else(|| y.clamp(-1.0 + 1e-12, 1.0 - 1e-12).atanh());
        let mut x = guess.clamp(lo, hi);
        let mut last_step = hi - lo;
        for _ in 0..MAX_ITER {
            let (gx, dg) = g(x);
            if gx.abs() <= self.tol {
                return Ok(x);
            }
            if gx < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            if hi - lo <= 1e-15 * x.abs().max(1.0) {
                return Ok(x);
            }
            let newton = x - gx / dg;
            let step = (newton - x).abs();
            x = if dg > 0.0 && newton > lo && newton < hi && step < 0.75 * last_step {
                last_step = step;
                newton
            } else {
                last_step = hi - lo;
                0.5 * (lo + hi)
            };
        }
        Err(Error::RootFinding { y, reason: format!("no convergence in {MAX_ITER} iterations") })
    }
}

/// `Λ(1, y) = ½[(1−y)log(1−y) + (1+y)log(1+y)] − log 2` for `|y| ≤ 1`.
pub fn terminal_entropy(y: f64) -> f64 {
    let xlogx = |u: f64| if u == 0.0 { 0.0 } else { u * u.ln() };
    0.5 * (xlogx(1.0 - y) + xlogx(1.0 + y)) - std::f64::consts::LN_2
}

/// Result of minimizing `Λ(t, y') + (y' − y)²/(2γ)` over `y' ∈ (−1, 1)` directly.
#[derive(Clone, Copy, Debug)]
pub struct InfConvolution {
    pub value: f64,
    pub argmin: f64,
}

/// Inf-convolution of the unregularized `Λ(t, ·)` with a quadratic of width `γ`,
/// computed by a grid scan followed by golden-section refinement. Test oracle for
/// [`DualEntropy::eval_lambda`].
pub fn inf_convolution_check(de: &DualEntropy, t: f64, y: f64) -> Result<InfConvolution> {
    let gamma = de.gamma();
    if !(gamma > 0.0) {
        return Err(Error::InvalidArgument("inf-convolution needs gamma > 0".into()));
    }
    let plain = de.with_gamma(0.0)?;
    let edge = 1.0 - 1e-9;
    let h = |yp: f64| -> Result<f64> {
        Ok(plain.eval_lambda(t, yp)?.value + (yp - y).powi(2) / (2.0 * gamma))
    };
    let n = 4000;
    let pts: Vec<f64> = (0..=n).map(|i| -edge + 2.0 * edge * i as f64 / n as f64).collect();
    let vals: Vec<f64> = pts.par_iter().map(|&p| h(p)).collect::<Result<_>>()?;
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    let (mut a, mut b) = (pts[best.saturating_sub(1)], pts[(best + 1).min(n)]);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (h(c)?, h(d)?);
    while b - a > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = h(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = h(d)?;
        }
    }
    let argmin = 0.5 * (a + b);
    Ok(InfConvolution { value: h(argmin)?, argmin })
}
