//! Python bindings: instances, Parisi measures and solutions, the dual entropy,
//! the ascent itself and the baselines.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use skpha::parisi::{self, ParisiMeasure, ParisiSolution, PdeGrid};
use skpha::pha::PhaParams;
use skpha::potential::Objective;
use skpha::spectral::Backend;
use std::sync::Arc;

fn to_py(e: skpha::Error) -> PyErr {
    use skpha::Error as E;
    match e {
        E::InvalidArgument(_) | E::DimensionMismatch { .. } | E::Domain(_) => PyValueError::new_err(e.to_string()),
        E::Io(_) | E::BadMagic { .. } | E::CorruptHeader { .. } | E::VersionMismatch { .. } | E::Truncated { .. } => {
            PyIOError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// A Sherrington-Kirkpatrick coupling matrix with i.i.d. N(0, 1/n) entries.
#[pyclass(name = "Instance", module = "pyskpha", frozen)]
struct PyInstance {
    inner: Arc<skpha::SkInstance>,
}

#[pymethods]
impl PyInstance {
    #[new]
    #[pyo3(signature = (n, seed = 0))]
    fn new(n: usize, seed: u64) -> PyResult<Self> {
        Ok(Self { inner: Arc::new(skpha::SkInstance::sample(n, seed).map_err(to_py)?) })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self { inner: Arc::new(skpha::SkInstance::load(path).map_err(to_py)?) })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(to_py)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed()
    }

    /// Row-major couplings as a flat list of length n².
    fn couplings(&self) -> Vec<f64> {
        self.inner.a().to_vec()
    }

    /// `σᵀAσ`.
    fn hamiltonian(&self, sigma: Vec<f64>) -> PyResult<f64> {
        self.inner.hamiltonian(&sigma).map_err(to_py)
    }

    /// `σᵀAσ / n`.
    fn energy(&self, sigma: Vec<f64>) -> PyResult<f64> {
        Ok(self.hamiltonian(sigma)? / self.inner.n() as f64)
    }

    fn __repr__(&self) -> String {
        format!("Instance(n={}, seed={})", self.inner.n(), self.inner.seed())
    }
}

/// A probability measure on [0, 1] stored as a step CDF.
#[pyclass(name = "Measure", module = "pyskpha", frozen)]
struct PyMeasure {
    inner: ParisiMeasure,
}

#[pymethods]
impl PyMeasure {
    /// Parses `delta0`, `delta1`, `atoms:t:F,...` or a CSV path.
    #[staticmethod]
    fn parse(spec: &str) -> PyResult<Self> {
        Ok(Self { inner: ParisiMeasure::parse(spec).map_err(to_py)? })
    }

    #[staticmethod]
    fn delta0() -> Self {
        Self { inner: ParisiMeasure::delta0() }
    }

    #[staticmethod]
    fn delta1() -> Self {
        Self { inner: ParisiMeasure::delta1() }
    }

    /// Minimizes the Parisi functional at `beta`; returns `(measure, value)`.
    #[staticmethod]
    #[pyo3(signature = (beta, intervals = 100))]
    fn minimize(py: Python<'_>, beta: f64, intervals: usize) -> PyResult<(Self, f64)> {
        let r = py
            .detach(|| parisi::minimize_measure(beta, &parisi::MinimizeOptions::new(intervals)))
            .map_err(to_py)?;
        Ok((Self { inner: r.measure }, r.value))
    }

    #[getter]
    fn q_star(&self) -> f64 {
        self.inner.q_star()
    }

    #[getter]
    fn grid(&self) -> Vec<f64> {
        self.inner.grid().to_vec()
    }

    #[getter]
    fn cdf(&self) -> Vec<f64> {
        self.inner.cdf().to_vec()
    }

    /// The CDF value at `t`.
    fn f(&self, t: f64) -> f64 {
        self.inner.f(t)
    }

    fn energy_target(&self, beta: f64) -> f64 {
        parisi::energy_target(&self.inner, beta)
    }

    /// The Parisi functional at `beta` on the default grid.
    fn functional(&self, py: Python<'_>, beta: f64) -> PyResult<f64> {
        py.detach(|| {
            let sol = parisi::solve_pde(&self.inner, beta, &PdeGrid::default())?;
            parisi::parisi_functional(&sol, &self.inner)
        })
        .map_err(to_py)
    }

    fn write_csv(&self, path: &str) -> PyResult<()> {
        self.inner.write_csv(path).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        format!("Measure(intervals={}, q_star={})", self.inner.intervals(), self.inner.q_star())
    }
}

/// Numerical solution of the Parisi PDE for one measure and temperature.
#[pyclass(name = "Solution", module = "pyskpha", frozen)]
struct PySolution {
    inner: Arc<ParisiSolution>,
}

#[pymethods]
impl PySolution {
    #[new]
    #[pyo3(signature = (measure, beta, n_t = None, n_x = None))]
    fn new(py: Python<'_>, measure: PyRef<'_, PyMeasure>, beta: f64, n_t: Option<usize>, n_x: Option<usize>) -> PyResult<Self> {
        let d = PdeGrid::default();
        let grid = PdeGrid::with_sizes(n_t.unwrap_or(d.n_t), n_x.unwrap_or(d.n_x));
        let mu = measure.inner.clone();
        let sol = py.detach(|| parisi::solve_pde(&mu, beta, &grid)).map_err(to_py)?;
        Ok(Self { inner: Arc::new(sol) })
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta()
    }

    /// `(Φ, ∂ₓΦ, ∂ₓₓΦ, ∂ₓₓₓΦ)` at `(t, x)`.
    fn eval(&self, t: f64, x: f64) -> (f64, f64, f64, f64) {
        let p = self.inner.eval(t, x);
        (p.phi, p.phi_x, p.phi_xx, p.phi_xxx)
    }

    /// The functional value for the measure the solution was built from.
    fn functional(&self) -> PyResult<f64> {
        parisi::parisi_functional(&self.inner, self.inner.measure()).map_err(to_py)
    }
}

/// The regularized dual entropy `Λ_γ`.
#[pyclass(name = "DualEntropy", module = "pyskpha", frozen)]
struct PyDualEntropy {
    inner: skpha::legendre::DualEntropy,
}

#[pymethods]
impl PyDualEntropy {
    #[new]
    #[pyo3(signature = (solution, gamma = 1e-3))]
    fn new(solution: PyRef<'_, PySolution>, gamma: f64) -> PyResult<Self> {
        Ok(Self { inner: skpha::legendre::DualEntropy::new(solution.inner.clone(), gamma).map_err(to_py)? })
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma()
    }

    /// `(Λ, ∂_yΛ, ∂_yyΛ, ∂_yyyΛ)` at `(t, y)`.
    fn eval(&self, t: f64, y: f64) -> PyResult<(f64, f64, f64, f64)> {
        let p = self.inner.eval_lambda(t, y).map_err(to_py)?;
        Ok((p.value, p.d1, p.d2, p.d3))
    }

    /// `1/∂_yyΛ_γ`.
    fn v(&self, t: f64, y: f64) -> PyResult<f64> {
        self.inner.eval_v(t, y).map_err(to_py)
    }
}

/// Outcome of one ascent run.
#[pyclass(name = "PhaResult", module = "pyskpha", frozen, get_all)]
struct PyPhaResult {
    /// `H(σ*)/n` of the rounded point.
    energy: f64,
    /// `H(σ̃)/n` of the truncated iterate.
    relaxed_energy: f64,
    rounded: Vec<f64>,
    truncated: Vec<f64>,
    times: Vec<f64>,
    second_moments: Vec<f64>,
    objective: Vec<f64>,
    steps: usize,
}

#[pymethods]
impl PyPhaResult {
    fn __repr__(&self) -> String {
        format!("PhaResult(steps={}, energy={:.6}, relaxed_energy={:.6})", self.steps, self.energy, self.relaxed_energy)
    }
}

/// Runs potential Hessian ascent on `instance` with the dual entropy of `measure`.
#[pyfunction]
#[pyo3(signature = (instance, measure, beta, eta = 0.01, gamma = 1e-3, delta = 1.0 / 22.0, seed = 0, backend = "iterative", steps = None))]
#[allow(clippy::too_many_arguments)]
fn run_pha(
    py: Python<'_>,
    instance: PyRef<'_, PyInstance>,
    measure: PyRef<'_, PyMeasure>,
    beta: f64,
    eta: f64,
    gamma: f64,
    delta: f64,
    seed: u64,
    backend: &str,
    steps: Option<usize>,
) -> PyResult<PyPhaResult> {
    let backend = match backend {
        "dense" => Backend::Dense,
        "iterative" => Backend::MatrixFree,
        other => return Err(PyValueError::new_err(format!("unknown backend {other:?}; use dense or iterative"))),
    };
    let inst = instance.inner.clone();
    let mu = measure.inner.clone();
    let traj = py
        .detach(|| {
            let sol = Arc::new(parisi::solve_pde(&mu, beta, &PdeGrid::default())?);
            let de = skpha::legendre::DualEntropy::new(sol, gamma)?;
            let obj = Objective::new(inst, de, beta)?;
            let p = PhaParams { eta, gamma, delta, seed, backend, steps, ..PhaParams::new(beta) };
            skpha::pha::run_pha(&obj, &p)
        })
        .map_err(to_py)?;
    Ok(PyPhaResult {
        energy: traj.energy,
        relaxed_energy: traj.relaxed_energy,
        times: traj.times(),
        second_moments: traj.records.iter().map(|r| r.second_moment).collect(),
        objective: traj.records.iter().map(|r| r.objective).collect(),
        steps: traj.steps(),
        rounded: traj.rounded,
        truncated: traj.truncated,
    })
}

/// Right edge of the spectrum of `√2β·semicircle − D`.
#[pyfunction]
fn free_edge(d: Vec<f64>, beta: f64) -> PyResult<f64> {
    skpha::spectral::free_edge(&d, beta).map_err(to_py)
}

/// Exact 2-Wasserstein distance between two samples on the line.
#[pyfunction]
fn wasserstein2(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    skpha::sde::wasserstein2_1d(&a, &b).map_err(to_py)
}

/// Exhaustive maximum of `H`; returns `(sigma, H)`.
#[pyfunction]
fn brute_force_max(instance: PyRef<'_, PyInstance>) -> PyResult<(Vec<f64>, f64)> {
    let r = skpha::baseline::brute_force_max(&instance.inner).map_err(to_py)?;
    Ok((r.sigma, r.hamiltonian))
}

/// Signs of the top eigenvector; returns `(sigma, H/n)`.
#[pyfunction]
fn top_eigvec_baseline(py: Python<'_>, instance: PyRef<'_, PyInstance>) -> PyResult<(Vec<f64>, f64)> {
    let inst = instance.inner.clone();
    let r = py.detach(|| skpha::baseline::baseline_top_eigvec(&inst)).map_err(to_py)?;
    Ok((r.sigma, r.energy))
}

/// Best and mean `H/n` over `trials` uniform sign vectors.
#[pyfunction]
#[pyo3(signature = (instance, trials = 100, seed = 0))]
fn random_signs_baseline(instance: PyRef<'_, PyInstance>, trials: usize, seed: u64) -> PyResult<(f64, f64)> {
    let r = skpha::baseline::random_signs(&instance.inner, trials, seed).map_err(to_py)?;
    Ok((r.best.energy, r.mean_energy))
}

#[pymodule]
fn pyskpha(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyInstance>()?;
    m.add_class::<PyMeasure>()?;
    m.add_class::<PySolution>()?;
    m.add_class::<PyDualEntropy>()?;
    m.add_class::<PyPhaResult>()?;
    m.add_function(wrap_pyfunction!(run_pha, m)?)?;
    m.add_function(wrap_pyfunction!(free_edge, m)?)?;
    m.add_function(wrap_pyfunction!(wasserstein2, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_max, m)?)?;
    m.add_function(wrap_pyfunction!(top_eigvec_baseline, m)?)?;
    m.add_function(wrap_pyfunction!(random_signs_baseline, m)?)?;
    Ok(())
}
