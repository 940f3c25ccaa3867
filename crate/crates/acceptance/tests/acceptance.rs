use skpha::baseline::{brute_force_max, random_signs};
use skpha::harness::checks::{self, CovarianceDiagnostics};
use skpha::legendre::DualEntropy;
use skpha::parisi::{energy_target, solve_pde, ParisiMeasure, PdeGrid};
use skpha::pha::{run_pha, taylor_diagnostics, PhaParams, PhaTrajectory};
use skpha::potential::Objective;
use skpha::sde::{self, SimConfig};
use skpha::SkInstance;
use skpha_acceptance::*;
use std::sync::{Arc, OnceLock};
use std::time::Instant;

fn on_grid(t: f64) -> f64 {
    (t / DT).round() * DT
}

fn objective(n: usize, seed: u64) -> Objective {
    let inst = Arc::new(SkInstance::sample(n, seed).unwrap());
    Objective::new(inst, low_temperature().dual(GAMMA), BETA).unwrap()
}

fn default_params(seed: u64) -> PhaParams {
    PhaParams { seed, ..PhaParams::new(BETA) }
}

#[test]
fn criterion_01_terminal_entropy() {
    let _g = serial();
    let clock = Instant::now();
    let sol = Arc::new(solve_pde(&ParisiMeasure::delta0(), 1.0, &PdeGrid::default()).unwrap());
    let (zero, edge) = checks::terminal_entropy_errors(sol).unwrap();
    Verdict::new(
        "criterion 1 (terminal entropy)",
        zero <= tol::TERMINAL_ORIGIN && edge <= tol::TERMINAL_EDGE,
        format!("|Λ(1,0) + log 2| = {zero:.2e}, edge error {edge:.2e}"),
        clock.elapsed().as_secs_f64(),
        budget::TERMINAL,
    )
    .finish();
}

#[test]
fn criterion_02_pde_closed_forms() {
    let _g = serial();
    let clock = Instant::now();
    let grid = PdeGrid::default();
    let rs = checks::replica_symmetric_error(1.0, &grid).unwrap();
    let heat = checks::heat_error(1.0, &grid, 1).unwrap();
    Verdict::new(
        "criterion 2 (PDE closed forms)",
        rs <= tol::PDE_CLOSED_FORM && heat <= tol::PDE_CLOSED_FORM,
        format!("replica-symmetric sup error {rs:.2e}, heat-kernel sup error {heat:.2e}"),
        clock.elapsed().as_secs_f64(),
        budget::PDE,
    )
    .finish();
}

#[test]
fn criterion_03_hopf_cole() {
    let _g = serial();
    let clock = Instant::now();
    let points: Vec<(f64, f64)> = [0.0, 0.5].iter().flat_map(|&t| [0.0, 1.0, 3.0].map(|x| (t, x))).collect();
    let errs = checks::hopf_cole_errors(&[(0.5, 0.4), (1.0, 1.0)], 1.0, &PdeGrid::default(), &points).unwrap();
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    Verdict::new(
        "criterion 3 (Hopf-Cole)",
        worst <= tol::HOPF_COLE,
        format!("max error {worst:.2e} over {} points", points.len()),
        clock.elapsed().as_secs_f64(),
        budget::HOPF_COLE,
    )
    .finish();
}

#[test]
fn criterion_04_derivative_oracle() {
    let _g = serial();
    let clock = Instant::now();
    let sol = solve_pde(&ParisiMeasure::delta1(), 1.0, &PdeGrid::default()).unwrap();
    let est = sde::sde_derivative_oracle(&sol, 0.5, 1.0, DT, 100_000, 0).unwrap();
    Verdict::new(
        "criterion 4 (derivative oracle)",
        est.within(tol::ORACLE_SE, 0.0),
        format!("E tanh(X₁) = {:.5} ± {:.1e}, ∂ₓΦ = {:.5}", est.value, est.se, est.target),
        clock.elapsed().as_secs_f64(),
        budget::ORACLE,
    )
    .finish();
}

#[test]
fn criterion_05_free_convolution_edge() {
    let _g = serial();
    let clock = Instant::now();
    let gaps: Vec<f64> = (0..10)
        .map(|seed| {
            let (top, edge) = checks::free_edge_trial(2000, 1.0, 0.5, 2.0, seed).unwrap();
            top - edge
        })
        .collect();
    let rate = gaps.iter().filter(|g| g.abs() <= tol::EDGE_GAP).count() as f64 / gaps.len() as f64;
    let gap_text: Vec<String> = gaps.iter().map(|g| format!("{g:+.3}")).collect();
    Verdict::new(
        "criterion 5 (free-convolution edge)",
        rate >= tol::EDGE_PASS_RATE,
        format!("pass rate {rate:.1}, gaps [{}]", gap_text.join(", ")),
        clock.elapsed().as_secs_f64(),
        budget::EDGE,
    )
    .finish();
}

#[test]
fn criterion_06_covariance_diagnostics() {
    let _g = serial();
    let clock = Instant::now();
    let sizes = [500, 1000, 2000];
    let mut means = Vec::new();
    for &n in &sizes {
        let rows: Vec<CovarianceDiagnostics> = (0..3)
            .map(|seed| checks::covariance_diagnostics(&objective(n, seed), &default_params(seed)).unwrap())
            .collect();
        for (seed, r) in rows.iter().enumerate() {
            emit(&format!(
                "  criterion 6 n={n} seed={seed}: t={:.2} trace={:.4} diag_error={:.4} residual={:.4}",
                r.t, r.trace, r.diag_error, r.residual
            ));
        }
        means.push(CovarianceDiagnostics::mean(&rows));
    }
    let trace = means[2].trace;
    let diag: Vec<f64> = means.iter().map(|m| m.diag_error).collect();
    let resid: Vec<f64> = means.iter().map(|m| m.residual).collect();
    let trace_ok = (trace - 1.0).abs() <= tol::TRACE_DEVIATION;
    let pass = trace_ok && strictly_decreasing(&diag) && strictly_decreasing(&resid);
    Verdict::new(
        "criterion 6 (covariance diagnostics)",
        pass,
        format!(
            "trace at n=2000 {trace:.4} (|·−1| ≤ {}: {trace_ok}), mean diag error {diag:.4?}, mean residual {resid:.4?}",
            tol::TRACE_DEVIATION
        ),
        clock.elapsed().as_secs_f64(),
        budget::COVARIANCE,
    )
    .finish();
}

#[test]
fn criterion_07_lambda_bounds() {
    let _g = serial();
    let clock = Instant::now();
    let linear = ParisiMeasure::uniform(20, (0..=20).map(|i| i as f64 / 20.0).collect()).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for beta in [1.0, 2.0] {
        let sol = Arc::new(solve_pde(&linear, beta, &PdeGrid::default()).unwrap());
        for gamma in [1e-2, 1e-3] {
            let de = DualEntropy::new(sol.clone(), gamma).unwrap();
            let s = checks::lambda_bound_scan(&de, 50, 50, tol::LAMBDA_SLACK).unwrap();
            pass &= s.curvature_violations == 0
                && s.third_violations == 0
                && s.space_lipschitz_ratio <= tol::LIPSCHITZ_RATIO
                && s.time_lipschitz_ratio <= tol::LIPSCHITZ_RATIO;
            parts.push(format!(
                "β={beta} γ={gamma}: {}+{} violations, ratios {:.3}/{:.3}",
                s.curvature_violations, s.third_violations, s.space_lipschitz_ratio, s.time_lipschitz_ratio
            ));
        }
    }
    Verdict::new(
        "criterion 7 (Λ_γ derivative bounds)",
        pass,
        parts.join("; "),
        clock.elapsed().as_secs_f64(),
        budget::LAMBDA,
    )
    .finish();
}

#[test]
fn criterion_08_frsb_identities() {
    let _g = serial();
    let clock = Instant::now();
    let lt = low_temperature();
    let q = lt.measure.q_star();
    let times: Vec<f64> = [0.1, 0.5, 0.9].iter().map(|f| on_grid(f * q)).collect();
    let de = lt.dual(GAMMA);
    let cfg = SimConfig::new(times[2], 100_000, 0).with_dt(DT).recording(times.clone());
    let ens = sde::simulate_primal(&de, &cfg).unwrap();
    let slack = tol::FRSB_DT_MULTIPLE * DT;
    let plain = de.with_gamma(0.0).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for &t in &times {
        let c = sde::frsb_identities(&ens, &lt.measure, t);
        pass &= c.all_within(tol::FRSB_SE, slack);
        let z = |e: sde::Estimate| (e.value - e.target) / (tol::FRSB_SE * e.se + slack);
        parts.push(format!(
            "t={t:.4}: E Y²={:.4} (t), 2β²E v²={:.4} (1), E v={:.4} ({:.4}); scaled gaps {:+.2}/{:+.2}/{:+.2}",
            c.second_moment.value,
            c.scaled_coef_sq.value,
            c.coef_mean.value,
            c.coef_mean.target,
            z(c.second_moment),
            z(c.scaled_coef_sq),
            z(c.coef_mean)
        ));
        let s = sde::frsb_identities_with(&ens, &plain, t).unwrap();
        emit(&format!(
            "  criterion 8 supplementary, unregularized coefficient on the same paths at t={t:.4}: 2β²E v²={:.4} ± {:.1e}, E v={:.4}, within: {}",
            s.scaled_coef_sq.value,
            s.scaled_coef_sq.se,
            s.coef_mean.value,
            s.all_within(tol::FRSB_SE, slack)
        ));
    }
    Verdict::new(
        "criterion 8 (fRSB identities, γ = 1e-3)",
        pass,
        format!("q* = {q:.3}; {}", parts.join("; ")),
        clock.elapsed().as_secs_f64(),
        budget::FRSB,
    )
    .finish();
}

/// Two ensembles of this size fit the runtime budget with room to spare.
const CLOSENESS_PATHS: usize = 20_000;

#[test]
fn criterion_09_gamma_closeness() {
    let _g = serial();
    let clock = Instant::now();
    let sol = Arc::new(solve_pde(&ParisiMeasure::delta0(), 1.0, &PdeGrid::default()).unwrap());
    let de = DualEntropy::new(sol, GAMMA).unwrap();
    let cfg = SimConfig::new(0.5, CLOSENESS_PATHS, 0).with_dt(DT).recording(vec![0.5]);
    let row = sde::gamma_closeness_check(&de, &cfg).unwrap()[0];
    let limit = row.bound + tol::CLOSENESS_SE * row.se;
    Verdict::new(
        "criterion 9 (γ-closeness)",
        row.distance <= limit,
        format!("‖Y^γ − Y‖ = {:.3e} ≤ {:.3e} (bound {:.3e})", row.distance, limit, row.bound),
        clock.elapsed().as_secs_f64(),
        budget::CLOSENESS,
    )
    .finish();
}

struct RunSummary {
    n: usize,
    seed: u64,
    max_w2: f64,
    final_second_moment: f64,
}

struct ConvergenceRuns {
    runs: Vec<RunSummary>,
    largest: PhaTrajectory,
    seconds: f64,
}

/// Full default runs at n ∈ {500, 1000, 2000} over three seeds, against one shared
/// 10⁵-path ensemble.
fn convergence_runs() -> &'static ConvergenceRuns {
    static CELL: OnceLock<ConvergenceRuns> = OnceLock::new();
    CELL.get_or_init(|| {
        let clock = Instant::now();
        let mut runs = Vec::new();
        let mut ens: Option<sde::SdeEnsemble> = None;
        let mut largest = None;
        for n in [500, 1000, 2000] {
            for seed in 0..3 {
                let obj = objective(n, seed);
                let traj = run_pha(&obj, &default_params(seed)).unwrap();
                let ens = ens.get_or_insert_with(|| {
                    let times = traj.times();
                    let cfg = SimConfig::new(*times.last().unwrap(), 100_000, 0).with_dt(DT).recording(times);
                    sde::simulate_primal(obj.dual(), &cfg).unwrap()
                });
                let rows = sde::convergence_report(&traj, ens).unwrap();
                runs.push(RunSummary {
                    n,
                    seed,
                    max_w2: rows.iter().map(|r| r.w2).fold(0.0, f64::max),
                    final_second_moment: traj.records.last().unwrap().second_moment,
                });
                if n == 2000 && seed == 0 {
                    largest = Some(traj);
                }
            }
        }
        ConvergenceRuns { runs, largest: largest.unwrap(), seconds: clock.elapsed().as_secs_f64() }
    })
}

#[test]
fn criterion_10_convergence_trend() {
    let _g = serial();
    let data = convergence_runs();
    let mut means = Vec::new();
    for n in [500, 1000, 2000] {
        let v: Vec<f64> = data.runs.iter().filter(|r| r.n == n).map(|r| r.max_w2).collect();
        emit(&format!("  criterion 10 n={n}: max_k W₂ per seed {v:.4?}"));
        means.push(mean_sd(&v).0);
    }
    Verdict::new(
        "criterion 10 (convergence trend)",
        strictly_decreasing(&means),
        format!("mean max_k W₂ over 3 seeds at n = 500/1000/2000: {means:.4?}"),
        data.seconds,
        budget::CONVERGENCE,
    )
    .finish();
}

#[test]
fn criterion_11_rounding_bound() {
    let _g = serial();
    let clock = Instant::now();
    let obj = objective(500, 0);
    let traj = run_pha(&obj, &default_params(0)).unwrap();
    let rate = checks::rounding_failure_rate(obj.instance(), &traj.truncated, 0.25, 200, 0).unwrap();
    Verdict::new(
        "criterion 11 (rounding bound)",
        rate <= tol::ROUNDING_FAILURE_RATE,
        format!("failure frequency {rate:.3} over 200 roundings of the truncated PHA iterate"),
        clock.elapsed().as_secs_f64(),
        budget::ROUNDING,
    )
    .finish();
}

#[test]
fn criterion_12_end_to_end() {
    let _g = serial();
    let clock = Instant::now();
    let lt = low_temperature();
    let target = energy_target(&lt.measure, BETA);
    let mut pha = Vec::new();
    let mut random = Vec::new();
    for seed in 0..5 {
        let obj = objective(2000, seed);
        let traj = run_pha(&obj, &default_params(seed)).unwrap();
        let base = random_signs(obj.instance(), 100, seed).unwrap();
        emit(&format!(
            "  criterion 12 seed={seed}: PHA {:.4} (relaxed {:.4}), random best of 100 {:.4}",
            traj.energy, traj.relaxed_energy, base.best.energy
        ));
        pha.push(traj.energy);
        random.push(base.best.energy);
    }
    let (p, _) = mean_sd(&pha);
    let (r, _) = mean_sd(&random);
    let factor_ok = p >= tol::BASELINE_FACTOR * r;
    let rel = (p - target).abs() / target;
    let target_ok = rel <= tol::ENERGY_RELATIVE;
    Verdict::new(
        "criterion 12 (end-to-end)",
        factor_ok && target_ok,
        format!(
            "mean PHA energy {p:.4}, random baseline {r:.4} (ratio {:.1}, ≥ {}: {factor_ok}); target E(β) = {target:.4}, relative gap {rel:.3} (≤ {}: {target_ok})",
            p / r,
            tol::BASELINE_FACTOR,
            tol::ENERGY_RELATIVE
        ),
        clock.elapsed().as_secs_f64(),
        budget::END_TO_END,
    )
    .finish();
}

#[test]
fn criterion_13_exhaustive_oracle() {
    let _g = serial();
    let clock = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for seed in 0..5 {
        let (gray, naive) = checks::exhaustive_agreement(18, seed).unwrap();
        let agree = (gray - naive).abs() <= tol::EXHAUSTIVE_RELATIVE * naive.abs().max(1.0);
        let obj = objective(18, seed);
        let exact = brute_force_max(obj.instance()).unwrap().hamiltonian;
        let traj = run_pha(&obj, &default_params(seed)).unwrap();
        let ratio = traj.energy * 18.0 / exact;
        pass &= agree && ratio > 0.0;
        parts.push(format!("seed {seed}: agree {agree}, ratio {ratio:.3}"));
    }
    Verdict::new(
        "criterion 13 (exhaustive oracle, n = 18)",
        pass,
        parts.join("; "),
        clock.elapsed().as_secs_f64(),
        budget::EXHAUSTIVE,
    )
    .finish();
}

#[test]
fn target_second_moment_tracks_q_star() {
    let _g = serial();
    let q = low_temperature().measure.q_star();
    let data = convergence_runs();
    let r = data.runs.iter().find(|r| r.n == 1000 && r.seed == 0).unwrap();
    let gap = (r.final_second_moment - q).abs();
    Verdict::new(
        "target (PHA second moment at n = 1000)",
        gap <= tol::SECOND_MOMENT_GAP,
        format!("(1/n)‖σ_K‖² = {:.4}, q* = {q:.4}, gap {gap:.4} (≤ {})", r.final_second_moment, tol::SECOND_MOMENT_GAP),
        0.0,
        f64::INFINITY,
    )
    .finish();
}

#[test]
fn target_w2_at_the_largest_size() {
    let _g = serial();
    let data = convergence_runs();
    let r = data.runs.iter().find(|r| r.n == 2000 && r.seed == 0).unwrap();
    let obj = objective(2000, 0);
    let hess: Vec<f64> = taylor_diagnostics(&data.largest, &obj)
        .unwrap()
        .iter()
        .map(|t| t.hessian.abs() / (data.largest.params.eta * 2000.0))
        .collect();
    emit(&format!(
        "  recorded: max_k |Hessian term| / (ηn) at n = 2000 is {:.4}",
        hess.iter().cloned().fold(0.0, f64::max)
    ));
    Verdict::new(
        "target (max_k W₂ at n = 2000)",
        r.max_w2 <= tol::MAX_W2,
        format!("max_k W₂ = {:.4} (≤ {})", r.max_w2, tol::MAX_W2),
        0.0,
        f64::INFINITY,
    )
    .finish();
}
