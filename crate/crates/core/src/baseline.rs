//! Reference maximizers: exhaustive search, the sign of the top eigenvector, and
//! random signs.

use crate::error::{Error, Result};
use crate::instance::SkInstance;
use crate::rng;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Largest `n` accepted by the exhaustive searches.
pub const BRUTE_FORCE_MAX_N: usize = 22;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub sigma: Vec<f64>,
    /// `H(σ) = ⟨σ, Aσ⟩`.
    pub hamiltonian: f64,
    /// `H(σ)/n`.
    pub energy: f64,
}

impl BaselineResult {
    fn new(inst: &SkInstance, sigma: Vec<f64>) -> Result<Self> {
        let h = inst.hamiltonian(&sigma)?;
        Ok(Self { energy: h / inst.n() as f64, hamiltonian: h, sigma })
    }
}

/// Signs of the leading eigenvector of `A_sym` (zero entries map to `+1`).
pub fn baseline_top_eigvec(inst: &SkInstance) -> Result<BaselineResult> {
    let n = inst.n();
    let eig = inst
        .a_sym_mat()
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| Error::Internal(format!("eigendecomposition failed: {e:?}")))?;
    let u = eig.U();
    let sigma = (0..n).map(|i| if u[(i, n - 1)] < 0.0 { -1.0 } else { 1.0 }).collect();
    BaselineResult::new(inst, sigma)
}

fn check_small(n: usize) -> Result<()> {
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::InvalidArgument(format!(
            "exhaustive search is limited to n ≤ {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }
    Ok(())
}

/// Exact maximum of `H` over `{±1}ⁿ` by a Gray-code walk with incremental fields.
///
/// Only half the cube is visited since `H(σ) = H(−σ)`; the last coordinate stays `+1`.
pub fn brute_force_max(inst: &SkInstance) -> Result<BaselineResult> {
    let n = inst.n();
    check_small(n)?;
    let a = inst.a_sym();
    let mut sigma = vec![1.0; n];
    let mut field: Vec<f64> = (0..n).map(|i| a[i * n..(i + 1) * n].iter().sum()).collect();
    let mut h: f64 = field.iter().sum();
    let (mut best, mut best_code) = (h, 0u64);
    let free = n.saturating_sub(1);
    let mut code = 0u64;
    for step in 1..(1u64 << free) {
        let i = step.trailing_zeros() as usize;
        code ^= 1 << i;
        let s = sigma[i];
        h -= 4.0 * s * (field[i] - a[i * n + i] * s);
        for j in 0..n {
            field[j] -= 2.0 * s * a[j * n + i];
        }
        sigma[i] = -s;
        if h > best {
            best = h;
            best_code = code;
        }
    }
    let sigma: Vec<f64> = (0..n).map(|i| if i < free && best_code >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
    BaselineResult::new(inst, sigma)
}

/// Exact maximum by evaluating `H` at every sign vector.
pub fn naive_max(inst: &SkInstance) -> Result<BaselineResult> {
    let n = inst.n();
    check_small(n)?;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for code in 0..(1u64 << n) {
        let s: Vec<f64> = (0..n).map(|i| if code >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
        let h = inst.hamiltonian(&s)?;
        if best.as_ref().is_none_or(|(b, _)| h > *b) {
            best = Some((h, s));
        }
    }
    let (_, sigma) = best.expect("cube is nonempty");
    BaselineResult::new(inst, sigma)
}

/// Energies of independent uniform sign vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomSigns {
    pub trials: usize,
    pub mean_energy: f64,
    pub best: BaselineResult,
}

pub fn random_signs(inst: &SkInstance, trials: usize, seed: u64) -> Result<RandomSigns> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let n = inst.n();
    let mut total = 0.0;
    let mut best: Option<BaselineResult> = None;
    for k in 0..trials {
        let mut r = rng::stream(seed, rng::domain::BASELINE + k as u64);
        let sigma: Vec<f64> = (0..n).map(|_| if r.gen::<bool>() { 1.0 } else { -1.0 }).collect();
        let res = BaselineResult::new(inst, sigma)?;
        total += res.energy;
        if best.as_ref().is_none_or(|b| res.energy > b.energy) {
            best = Some(res);
        }
    }
    Ok(RandomSigns { trials, mean_energy: total / trials as f64, best: best.expect("trials > 0") })
}
