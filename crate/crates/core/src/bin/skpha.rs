use clap::{Args, Parser, Subcommand};
use skpha::harness::{self, Command, RunConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Potential Hessian ascent for the Sherrington–Kirkpatrick model.
#[derive(Parser)]
#[command(name = "skpha", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Sample an instance and save it.
    Gen(Flags),
    /// Minimize the Parisi functional and report it with the energy target.
    Parisi(Flags),
    /// Run the ascent end to end.
    Optimize(Flags),
    /// Run the invariant suite.
    Verify(Flags),
    /// Simulate the primal SDE and compare it with an ascent run.
    Sde(Flags),
    /// Compare the ascent with baselines over several seeds.
    Bench(Flags),
    /// Repeat a run from its manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Settings shared by every run. Flags override the config file, which overrides
/// the defaults.
#[derive(Args, Default)]
struct Flags {
    /// Flat `key = value` file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    eta: Option<String>,
    #[arg(long)]
    gamma: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// `delta0`, `delta1`, `atoms:t1:z1,...` or a CSV file; minimized when absent.
    #[arg(long)]
    measure: Option<String>,
    #[arg(long)]
    measure_intervals: Option<String>,
    /// `dense` or `iterative`.
    #[arg(long)]
    backend: Option<String>,
    /// `iid` or `goe`.
    #[arg(long)]
    diagonal: Option<String>,
    #[arg(long)]
    lanczos_tol: Option<String>,
    /// Instance file written by `gen`.
    #[arg(long)]
    instance: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// `fast` or `full`.
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    paths: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long)]
    trials: Option<String>,
}

impl Flags {
    fn resolve(&self) -> skpha::Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let pairs = [
            ("n", &self.n),
            ("beta", &self.beta),
            ("eta", &self.eta),
            ("gamma", &self.gamma),
            ("delta", &self.delta),
            ("seed", &self.seed),
            ("measure", &self.measure),
            ("measure_intervals", &self.measure_intervals),
            ("backend", &self.backend),
            ("diagonal", &self.diagonal),
            ("lanczos_tol", &self.lanczos_tol),
            ("instance", &self.instance),
            ("out", &self.out),
            ("suite", &self.suite),
            ("paths", &self.paths),
            ("dt", &self.dt),
            ("seeds", &self.seeds),
            ("trials", &self.trials),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Sub::Replay { manifest, out } => harness::replay(&manifest, out),
        sub => {
            let (command, flags) = match sub {
                Sub::Gen(f) => (Command::Gen, f),
                Sub::Parisi(f) => (Command::Parisi, f),
                Sub::Optimize(f) => (Command::Optimize, f),
                Sub::Verify(f) => (Command::Verify, f),
                Sub::Sde(f) => (Command::Sde, f),
                Sub::Bench(f) => (Command::Bench, f),
                Sub::Replay { .. } => unreachable!(),
            };
            flags.resolve().and_then(|cfg| harness::run(command, &cfg))
        }
    };
    match outcome {
        Ok(m) => {
            println!("{}", serde_json::to_string_pretty(&m.results).unwrap_or_default());
            if m.ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("skpha: verification failed, see {}", m.config.out.join("verify_report.json").display());
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("skpha: {e}");
            ExitCode::from(2)
        }
    }
}
