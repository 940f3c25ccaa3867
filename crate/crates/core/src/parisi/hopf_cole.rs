use crate::error::{Error, Result};
use crate::quad::{log2cosh, GaussHermite};

/// `Φ(t0, x)` for an atomic measure by the Hopf–Cole recursion
/// `Φ(t_{j−1}, x) = (1/ζ_j) log E exp(ζ_j Φ(t_j, x + Z_j))`, `Var Z_j = 2β²(t_j − t_{j−1})`,
/// with `t_0 = t0`. Atom `(t_j, ζ_j)` gives the value of `F` on `[t_{j−1}, t_j)`;
/// `ζ_j = 0` reduces to a plain Gaussian expectation.
pub fn hopf_cole_atomic(atoms: &[(f64, f64)], beta: f64, t0: f64, x: f64, order: usize) -> Result<f64> {
    validate(atoms, t0)?;
    let gh = GaussHermite::new(order)?;
    let mut prev = t0;
    let mut rules = Vec::with_capacity(atoms.len());
    for &(t, z) in atoms {
        let sd = (2.0 * beta * beta * (t - prev)).sqrt();
        let (nodes, weights) = gh.normal_rule(sd);
        rules.push((nodes, weights, z));
        prev = t;
    }
    Ok(level(&rules, 0, x))
}

/// As [`hopf_cole_atomic`], but also evaluates at twice the order and fails if the
/// two disagree by more than `tol`.
pub fn hopf_cole_checked(
    atoms: &[(f64, f64)],
    beta: f64,
    t0: f64,
    x: f64,
    order: usize,
    tol: f64,
) -> Result<f64> {
    let coarse = hopf_cole_atomic(atoms, beta, t0, x, order)?;
    let fine = hopf_cole_atomic(atoms, beta, t0, x, 2 * order)?;
    let estimate = (coarse - fine).abs();
    if estimate > tol {
        return Err(Error::Quadrature { order, tol, estimate });
    }
    Ok(fine)
}

fn validate(atoms: &[(f64, f64)], t0: f64) -> Result<()> {
    if atoms.is_empty() {
        return Err(Error::InvalidArgument("no atoms".into()));
    }
    if !(0.0..1.0).contains(&t0) {
        return Err(Error::InvalidArgument(format!("t0 = {t0} outside [0, 1)")));
    }
    let mut prev_t = t0;
    let mut prev_z = 0.0;
    for &(t, z) in atoms {
        if t <= prev_t {
            return Err(Error::InvalidArgument("atom times must increase past t0".into()));
        }
        if !(0.0..=1.0).contains(&z) || z < prev_z {
            return Err(Error::InvalidArgument("atom weights must be nondecreasing in [0, 1]".into()));
        }
        prev_t = t;
        prev_z = z;
    }
    if prev_t != 1.0 {
        return Err(Error::InvalidArgument("last atom must sit at t = 1".into()));
    }
    Ok(())
}

fn level(rules: &[(Vec<f64>, Vec<f64>, f64)], j: usize, x: f64) -> f64 {
    if j == rules.len() {
        return log2cosh(x);
    }
    let (nodes, weights, z) = &rules[j];
    let vals: Vec<f64> = nodes.iter().map(|dz| level(rules, j + 1, x + dz)).collect();
    if *z == 0.0 {
        return vals.iter().zip(weights).map(|(v, w)| v * w).sum();
    }
    let top = vals.iter().fold(f64::NEG_INFINITY, |m, v| m.max(z * v));
    let s: f64 = vals.iter().zip(weights).map(|(v, w)| w * (z * v - top).exp()).sum();
    (top + s.ln()) / z
}

/// `E log 2cosh(x + Z)`, `Z ~ N(0, 2β²(1 − t))`: the solution for `F ≡ 0`.
pub fn heat_solution(beta: f64, t: f64, x: f64, gh: &GaussHermite) -> f64 {
    let sd = (2.0 * beta * beta * (1.0 - t)).sqrt();
    gh.expect_normal(sd, |z| log2cosh(x + z))
}

/// `E tanh(x + Z)`, the space derivative of [`heat_solution`].
pub fn heat_solution_x(beta: f64, t: f64, x: f64, gh: &GaussHermite) -> f64 {
    let sd = (2.0 * beta * beta * (1.0 - t)).sqrt();
    gh.expect_normal(sd, |z| (x + z).tanh())
}
