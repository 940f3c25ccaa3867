//! Fixtures, pinned thresholds and PASS/FAIL reporting for the acceptance tests.

use skpha::legendre::DualEntropy;
use skpha::parisi::{minimize_measure, solve_pde, MinimizeOptions, ParisiMeasure, ParisiSolution, PdeGrid};
use std::io::Write;
use std::sync::{Arc, Mutex, MutexGuard, OnceLock};
use std::time::Instant;

/// Thresholds, frozen.
pub mod tol {
    pub const TERMINAL_ORIGIN: f64 = 1e-8;
    pub const TERMINAL_EDGE: f64 = 1e-6;
    pub const PDE_CLOSED_FORM: f64 = 1e-3;
    pub const HOPF_COLE: f64 = 2e-3;
    pub const ORACLE_SE: f64 = 3.0;
    pub const EDGE_GAP: f64 = 0.15;
    pub const EDGE_PASS_RATE: f64 = 0.9;
    pub const TRACE_DEVIATION: f64 = 0.1;
    pub const LAMBDA_SLACK: f64 = 1e-9;
    pub const LIPSCHITZ_RATIO: f64 = 1.1;
    pub const FRSB_SE: f64 = 3.0;
    pub const FRSB_DT_MULTIPLE: f64 = 2.0;
    pub const CLOSENESS_SE: f64 = 3.0;
    pub const ROUNDING_FAILURE_RATE: f64 = 0.05;
    pub const BASELINE_FACTOR: f64 = 5.0;
    pub const ENERGY_RELATIVE: f64 = 0.25;
    pub const EXHAUSTIVE_RELATIVE: f64 = 1e-9;
    pub const SECOND_MOMENT_GAP: f64 = 0.15;
    pub const MAX_W2: f64 = 0.2;
}

/// Wall-clock budgets in seconds.
pub mod budget {
    pub const TERMINAL: f64 = 1.0;
    pub const PDE: f64 = 30.0;
    pub const HOPF_COLE: f64 = 60.0;
    pub const ORACLE: f64 = 120.0;
    pub const EDGE: f64 = 300.0;
    pub const COVARIANCE: f64 = 900.0;
    pub const LAMBDA: f64 = 60.0;
    pub const FRSB: f64 = 300.0;
    pub const CLOSENESS: f64 = 120.0;
    pub const CONVERGENCE: f64 = 1800.0;
    pub const ROUNDING: f64 = 120.0;
    pub const END_TO_END: f64 = 3600.0;
    pub const EXHAUSTIVE: f64 = 600.0;
}

pub const BETA: f64 = 2.0;
pub const GAMMA: f64 = 1e-3;
pub const DT: f64 = 5e-4;
pub const MEASURE_INTERVALS: usize = 100;

/// Holds criteria to one at a time so their clocks do not overlap.
pub fn serial() -> MutexGuard<'static, ()> {
    static LOCK: Mutex<()> = Mutex::new(());
    LOCK.lock().unwrap_or_else(|e| e.into_inner())
}

pub struct LowTemperature {
    pub measure: ParisiMeasure,
    pub solution: Arc<ParisiSolution>,
    pub seconds: f64,
}

impl LowTemperature {
    pub fn dual(&self, gamma: f64) -> DualEntropy {
        DualEntropy::new(self.solution.clone(), gamma).expect("gamma is nonnegative")
    }
}

/// The minimized measure at `BETA` and its solution, computed once per process.
pub fn low_temperature() -> &'static LowTemperature {
    static CELL: OnceLock<LowTemperature> = OnceLock::new();
    CELL.get_or_init(|| {
        let clock = Instant::now();
        let measure = minimize_measure(BETA, &MinimizeOptions::new(MEASURE_INTERVALS)).unwrap().measure;
        let solution = Arc::new(solve_pde(&measure, BETA, &PdeGrid::default()).unwrap());
        LowTemperature { measure, solution, seconds: clock.elapsed().as_secs_f64() }
    })
}

/// Writes to the real stdout so the line shows even when the harness captures output.
pub fn emit(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

/// A criterion verdict: the numeric check and the runtime budget must both hold.
pub struct Verdict {
    pub label: String,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
    pub budget: f64,
}

impl Verdict {
    pub fn new(label: impl Into<String>, pass: bool, detail: impl Into<String>, seconds: f64, budget: f64) -> Self {
        Self { label: label.into(), pass, detail: detail.into(), seconds, budget }
    }

    pub fn ok(&self) -> bool {
        self.pass && self.seconds <= self.budget
    }

    /// Prints the PASS/FAIL line and fails the test if the verdict is negative.
    pub fn finish(self) {
        let tag = if self.ok() { "PASS" } else { "FAIL" };
        let slow = if self.seconds > self.budget { " [over budget]" } else { "" };
        emit(&format!(
            "{tag} {}: {} ({:.1} s of {:.0} s{slow})",
            self.label, self.detail, self.seconds, self.budget
        ));
        assert!(self.ok(), "{} failed: {}", self.label, self.detail);
    }
}

/// Mean and sample standard deviation.
pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = if v.len() > 1 { v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    (m, var.sqrt())
}

pub fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_needs_both_parts() {
        assert!(Verdict::new("x", true, "", 1.0, 2.0).ok());
        assert!(!Verdict::new("x", true, "", 3.0, 2.0).ok());
        assert!(!Verdict::new("x", false, "", 1.0, 2.0).ok());
    }

    #[test]
    fn helpers() {
        assert!(strictly_decreasing(&[3.0, 2.0, 1.0]));
        assert!(!strictly_decreasing(&[3.0, 3.0]));
        let (m, s) = mean_sd(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }
}
