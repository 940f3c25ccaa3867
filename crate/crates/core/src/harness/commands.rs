use super::config::RunConfig;
use super::verify;
use crate::baseline;
use crate::error::{Error, Result};
use crate::instance::SkInstance;
use crate::legendre::DualEntropy;
use crate::parisi::{energy_target, minimize_measure, parisi_functional, solve_pde, MinimizeOptions, ParisiMeasure, PdeGrid};
use crate::pha::{run_pha, PhaParams, PhaTrajectory};
use crate::potential::Objective;
use crate::sde::{self, SimConfig};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Gen,
    Parisi,
    Optimize,
    Verify,
    Sde,
    Bench,
}

impl std::fmt::Display for Command {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        f.write_str(&s)
    }
}

/// Record of one run, written as `manifest.json` in the output directory.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub config: RunConfig,
    /// Every seed the run consumed.
    pub seeds: Vec<u64>,
    pub platform: String,
    pub threads: usize,
    pub started_unix: u64,
    pub elapsed_seconds: f64,
    /// Files written next to the manifest.
    pub outputs: Vec<String>,
    pub results: Value,
    /// False when a verification check failed.
    pub ok: bool,
}

/// Where the Parisi measure came from.
#[derive(Clone, Debug, Serialize)]
pub enum MeasureSource {
    Given(String),
    Minimized { intervals: usize, value: f64, iterations: usize, converged: bool },
}

/// The measure named by the config, or a minimized one when none is given.
pub fn resolve_measure(cfg: &RunConfig) -> Result<(ParisiMeasure, MeasureSource)> {
    match &cfg.measure {
        Some(spec) => Ok((ParisiMeasure::parse(spec)?, MeasureSource::Given(spec.clone()))),
        None => {
            let r = minimize_measure(cfg.beta, &MinimizeOptions::new(cfg.measure_intervals))?;
            let src = MeasureSource::Minimized {
                intervals: cfg.measure_intervals,
                value: r.value,
                iterations: r.iterations,
                converged: r.converged,
            };
            Ok((r.measure, src))
        }
    }
}

struct Outputs {
    dir: PathBuf,
    names: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), names: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.names.push(name.to_string());
        self.dir.join(name)
    }

    fn create(&mut self, name: &str) -> Result<std::io::BufWriter<std::fs::File>> {
        Ok(std::io::BufWriter::new(std::fs::File::create(self.path(name))?))
    }
}

fn load_instance(cfg: &RunConfig, seed: u64) -> Result<SkInstance> {
    match &cfg.instance {
        Some(p) => {
            if !p.exists() {
                return Err(Error::InvalidArgument(format!("instance file {} not found", p.display())));
            }
            let inst = SkInstance::load(p)?;
            if inst.n() != cfg.n {
                return Err(Error::InvalidArgument(format!(
                    "instance {} has n = {}, but the config asks for n = {}",
                    p.display(),
                    inst.n(),
                    cfg.n
                )));
            }
            Ok(inst)
        }
        None => SkInstance::sample_with(cfg.n, seed, cfg.diagonal),
    }
}

fn pha_params(cfg: &RunConfig, seed: u64) -> PhaParams {
    let mut p = PhaParams::new(cfg.beta);
    p.eta = cfg.eta;
    p.gamma = cfg.gamma;
    p.delta = cfg.delta;
    p.seed = seed;
    p.backend = cfg.backend;
    p.lanczos_tol = cfg.lanczos_tol;
    p
}

fn summary(traj: &PhaTrajectory) -> Value {
    let last = traj.records.last();
    json!({
        "n": traj.n,
        "steps": traj.steps(),
        "energy": traj.energy,
        "relaxed_energy": traj.relaxed_energy,
        "final_time": last.map(|r| r.t),
        "final_second_moment": last.map(|r| r.second_moment),
        "final_escape_fraction": last.map(|r| r.escape_fraction),
        "max_lanczos_iterations": traj.records.iter().map(|r| r.lanczos_iterations).max(),
    })
}

/// Runs `command`, writing its outputs and `manifest.json` under `cfg.out`.
pub fn run(command: Command, cfg: &RunConfig) -> Result<Manifest> {
    cfg.validate()?;
    let clock = Instant::now();
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut out = Outputs::new(&cfg.out)?;
    let mut seeds = vec![cfg.seed];
    let mut ok = true;

    let results = match command {
        Command::Gen => {
            let inst = SkInstance::sample_with(cfg.n, cfg.seed, cfg.diagonal)?;
            inst.save(out.path("instance.bin"))?;
            json!({ "n": inst.n(), "seed": inst.seed(), "diagonal": inst.diagonal(), "op_norm": inst.op_norm() })
        }
        Command::Parisi => {
            let (mu, source) = resolve_measure(cfg)?;
            let sol = solve_pde(&mu, cfg.beta, &PdeGrid::default())?;
            let functional = parisi_functional(&sol, &mu)?;
            mu.write_csv(out.path("measure.csv"))?;
            json!({
                "beta": cfg.beta,
                "functional": functional,
                "energy_target": energy_target(&mu, cfg.beta),
                "q_star": mu.q_star(),
                "measure": source,
            })
        }
        Command::Optimize => {
            let (mu, source) = resolve_measure(cfg)?;
            mu.write_csv(out.path("measure.csv"))?;
            let sol = Arc::new(solve_pde(&mu, cfg.beta, &PdeGrid::default())?);
            let inst = Arc::new(load_instance(cfg, cfg.seed)?);
            let obj = Objective::new(inst, DualEntropy::new(sol, cfg.gamma)?, cfg.beta)?;
            let traj = run_pha(&obj, &pha_params(cfg, cfg.seed))?;
            traj.write_csv(out.create("trajectory.csv")?)?;
            let mut w = out.create("solution.csv")?;
            writeln!(w, "i,relaxed,rounded")?;
            for (i, (a, b)) in traj.truncated.iter().zip(&traj.rounded).enumerate() {
                writeln!(w, "{i},{a},{b}")?;
            }
            w.flush()?;
            let mut s = summary(&traj);
            s["energy_target"] = json!(energy_target(&mu, cfg.beta));
            s["q_star"] = json!(mu.q_star());
            s["measure"] = json!(source);
            s
        }
        Command::Verify => {
            let report = verify::run_suite(cfg.suite, cfg.seed)?;
            ok = report.passed();
            seeds = report.seeds.clone();
            serde_json::to_writer_pretty(out.create("verify_report.json")?, &report)
                .map_err(|e| Error::Internal(e.to_string()))?;
            serde_json::to_value(report.summary()).map_err(|e| Error::Internal(e.to_string()))?
        }
        Command::Sde => {
            let (mu, source) = resolve_measure(cfg)?;
            mu.write_csv(out.path("measure.csv"))?;
            let sol = Arc::new(solve_pde(&mu, cfg.beta, &PdeGrid::default())?);
            let de = DualEntropy::new(sol.clone(), cfg.gamma)?;
            let obj = Objective::new(Arc::new(load_instance(cfg, cfg.seed)?), de.clone(), cfg.beta)?;
            let params = pha_params(cfg, cfg.seed);
            let traj = run_pha(&obj, &params)?;
            let t_end = traj.records.last().map(|r| r.t).unwrap_or(0.0);
            let sim = SimConfig::new(t_end, cfg.paths, cfg.seed).with_dt(cfg.dt).recording(traj.times());
            let ens = sde::simulate_primal(&de, &sim)?;
            ens.write_summary_csv(out.create("sde_summary.csv")?)?;
            traj.write_csv(out.create("trajectory.csv")?)?;
            let rows = sde::convergence_report(&traj, &ens)?;
            let mut w = out.create("convergence.csv")?;
            writeln!(w, "k,t,w2")?;
            for r in &rows {
                writeln!(w, "{},{},{}", r.k, r.t, r.w2)?;
            }
            w.flush()?;
            let q = mu.q_star();
            let frsb: Vec<_> = [0.1, 0.5, 0.9]
                .iter()
                .map(|f| sde::frsb_identities(&ens, &mu, (f * t_end / cfg.eta).round() * cfg.eta))
                .collect();
            json!({
                "paths": cfg.paths,
                "dt": cfg.dt,
                "clamp_events": ens.clamp_events,
                "max_w2": rows.iter().map(|r| r.w2).fold(0.0, f64::max),
                "final_w2": rows.last().map(|r| r.w2),
                "frsb": frsb,
                "q_star": q,
                "energy_target": energy_target(&mu, cfg.beta),
                "pha": summary(&traj),
                "measure": source,
            })
        }
        Command::Bench => {
            let (mu, source) = resolve_measure(cfg)?;
            mu.write_csv(out.path("measure.csv"))?;
            let sol = Arc::new(solve_pde(&mu, cfg.beta, &PdeGrid::default())?);
            let de = DualEntropy::new(sol, cfg.gamma)?;
            seeds = (0..cfg.seeds as u64).map(|s| cfg.seed + s).collect();
            let mut w = out.create("bench.csv")?;
            writeln!(w, "seed,pha,pha_relaxed,top_eigvec,random_best,random_mean")?;
            let mut rows = Vec::new();
            for &seed in &seeds {
                let inst = Arc::new(SkInstance::sample_with(cfg.n, seed, cfg.diagonal)?);
                let obj = Objective::new(inst.clone(), de.clone(), cfg.beta)?;
                let traj = run_pha(&obj, &pha_params(cfg, seed))?;
                let eig = baseline::baseline_top_eigvec(&inst)?;
                let rnd = baseline::random_signs(&inst, cfg.trials, seed)?;
                writeln!(
                    w,
                    "{seed},{},{},{},{},{}",
                    traj.energy, traj.relaxed_energy, eig.energy, rnd.best.energy, rnd.mean_energy
                )?;
                rows.push([traj.energy, traj.relaxed_energy, eig.energy, rnd.best.energy, rnd.mean_energy]);
            }
            w.flush()?;
            let avg = |j: usize| rows.iter().map(|r| r[j]).sum::<f64>() / rows.len() as f64;
            json!({
                "n": cfg.n,
                "seeds": seeds,
                "mean_pha": avg(0),
                "mean_pha_relaxed": avg(1),
                "mean_top_eigvec": avg(2),
                "mean_random_best": avg(3),
                "mean_random": avg(4),
                "energy_target": energy_target(&mu, cfg.beta),
                "measure": source,
            })
        }
    };

    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command,
        config: cfg.clone(),
        seeds,
        platform: format!("{}-{}", std::env::consts::ARCH, std::env::consts::OS),
        threads: rayon::current_num_threads(),
        started_unix,
        elapsed_seconds: clock.elapsed().as_secs_f64(),
        outputs: out.names.clone(),
        results,
        ok,
    };
    let file = std::fs::File::create(out.dir.join("manifest.json"))?;
    serde_json::to_writer_pretty(file, &manifest).map_err(|e| Error::Internal(e.to_string()))?;
    Ok(manifest)
}

/// Repeats the run recorded in a manifest, optionally into another directory.
pub fn replay(manifest: &Path, out: Option<PathBuf>) -> Result<Manifest> {
    let text = std::fs::read_to_string(manifest)
        .map_err(|e| Error::InvalidArgument(format!("cannot read manifest {}: {e}", manifest.display())))?;
    let old: Manifest = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidArgument(format!("malformed manifest {}: {e}", manifest.display())))?;
    let mut cfg = old.config;
    if let Some(dir) = out {
        cfg.out = dir;
    }
    run(old.command, &cfg)
}
