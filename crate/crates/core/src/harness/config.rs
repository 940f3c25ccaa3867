//! Run configuration: defaults, a flat `key = value` file, then command-line flags.

use crate::error::{Error, Result};
use crate::instance::Diagonal;
use crate::spectral::Backend;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    #[default]
    Fast,
    Full,
}

impl std::str::FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Suite::Fast),
            "full" => Ok(Suite::Full),
            other => Err(Error::InvalidArgument(format!("unknown suite `{other}` (expected fast or full)"))),
        }
    }
}

impl std::fmt::Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Suite::Fast => "fast",
            Suite::Full => "full",
        })
    }
}

/// Every tunable of a run. Serialized verbatim into the manifest so that a run can
/// be repeated from it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub n: usize,
    pub beta: f64,
    pub eta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub seed: u64,
    /// `delta0`, `delta1`, `atoms:t:z,...` or a CSV path; `None` minimizes.
    pub measure: Option<String>,
    /// Intervals of the uniform grid used when minimizing.
    pub measure_intervals: usize,
    pub backend: Backend,
    pub diagonal: Diagonal,
    pub lanczos_tol: f64,
    /// Instance file to load instead of sampling.
    pub instance: Option<PathBuf>,
    pub out: PathBuf,
    pub suite: Suite,
    pub paths: usize,
    pub dt: f64,
    /// Number of consecutive seeds for `bench`.
    pub seeds: usize,
    /// Random sign vectors per instance for the baseline.
    pub trials: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 500,
            beta: 2.0,
            eta: 0.01,
            gamma: 1e-3,
            delta: 1.0 / 22.0,
            seed: 0,
            measure: None,
            measure_intervals: 100,
            backend: Backend::MatrixFree,
            diagonal: Diagonal::Iid,
            lanczos_tol: 1e-5,
            instance: None,
            out: PathBuf::from("out"),
            suite: Suite::Fast,
            paths: 10_000,
            dt: 5e-4,
            seeds: 3,
            trials: 100,
        }
    }
}

pub const KEYS: &[&str] = &[
    "n",
    "beta",
    "eta",
    "gamma",
    "delta",
    "seed",
    "measure",
    "measure_intervals",
    "backend",
    "diagonal",
    "lanczos_tol",
    "instance",
    "out",
    "suite",
    "paths",
    "dt",
    "seeds",
    "trials",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::InvalidArgument(format!("invalid value `{value}` for `{key}`")))
}

impl RunConfig {
    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "n" => self.n = parse(key, value)?,
            "beta" => self.beta = parse(key, value)?,
            "eta" => self.eta = parse(key, value)?,
            "gamma" => self.gamma = parse(key, value)?,
            "delta" => self.delta = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "measure" => self.measure = (!value.is_empty()).then(|| value.to_string()),
            "measure_intervals" => self.measure_intervals = parse(key, value)?,
            "backend" => self.backend = value.parse()?,
            "diagonal" => self.diagonal = value.parse()?,
            "lanczos_tol" => self.lanczos_tol = parse(key, value)?,
            "instance" => self.instance = (!value.is_empty()).then(|| PathBuf::from(value)),
            "out" => self.out = PathBuf::from(value),
            "suite" => self.suite = value.parse()?,
            "paths" => self.paths = parse(key, value)?,
            "dt" => self.dt = parse(key, value)?,
            "seeds" => self.seeds = parse(key, value)?,
            "trials" => self.trials = parse(key, value)?,
            other => return Err(Error::InvalidArgument(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies a flat key/value text: one `key = value` per line, `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("config line {}: expected `key = value`, got `{raw}`", lineno + 1))
            })?;
            self.set(k.trim(), v)
                .map_err(|e| Error::InvalidArgument(format!("config line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read config {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    /// Rejects combinations no command can run with.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return bad(format!("eta must lie in (0, 1], got {}", self.eta));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be nonnegative, got {}", self.gamma));
        }
        if !(0.0..=1.0 / 22.0 + 1e-15).contains(&self.delta) {
            return bad(format!("delta must lie in [0, 1/22], got {}", self.delta));
        }
        if self.measure_intervals < 2 {
            return bad("measure_intervals must be at least 2".into());
        }
        if self.backend == Backend::Dense && self.n > crate::spectral::DENSE_CUTOFF {
            return bad(format!(
                "dense backend is limited to n ≤ {}; use --backend iterative",
                crate::spectral::DENSE_CUTOFF
            ));
        }
        if !(self.dt > 0.0 && self.dt < 1.0) {
            return bad(format!("dt must lie in (0, 1), got {}", self.dt));
        }
        if self.paths == 0 || self.seeds == 0 || self.trials == 0 {
            return bad("paths, seeds and trials must be positive".into());
        }
        if !(self.lanczos_tol > 0.0) {
            return bad("lanczos_tol must be positive".into());
        }
        Ok(())
    }

    /// As `key = value` lines, readable by [`apply_text`](Self::apply_text).
    pub fn to_text(&self) -> String {
        let opt = |o: &Option<String>| o.clone().unwrap_or_default();
        let mut s = String::new();
        let mut line = |k: &str, v: String| s.push_str(&format!("{k} = {v}\n"));
        line("n", self.n.to_string());
        line("beta", self.beta.to_string());
        line("eta", self.eta.to_string());
        line("gamma", self.gamma.to_string());
        line("delta", self.delta.to_string());
        line("seed", self.seed.to_string());
        line("measure", opt(&self.measure));
        line("measure_intervals", self.measure_intervals.to_string());
        line("backend", self.backend.to_string());
        line("diagonal", self.diagonal.to_string());
        line("lanczos_tol", self.lanczos_tol.to_string());
        line("instance", self.instance.as_ref().map(|p| p.display().to_string()).unwrap_or_default());
        line("out", self.out.display().to_string());
        line("suite", self.suite.to_string());
        line("paths", self.paths.to_string());
        line("dt", self.dt.to_string());
        line("seeds", self.seeds.to_string());
        line("trials", self.trials.to_string());
        s
    }
}
