use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use popart_cli::config::{parse_config_file, ExperimentConfig, Mode, Settings};
use popart_cli::{run_experiment, CliError};

#[derive(Parser)]
#[command(
    name = "bench",
    version,
    about = "Run sparse-estimation and sparse-bandit experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the H^2 and C_min design problems
    Design(Opts),
    /// l1 error of popart and the Lasso baselines over a grid of sample sizes
    Estimate(Opts),
    /// Regret of the bandit algorithms
    Bandit(Opts),
    /// Whatever the preset runs by default
    Sweep(Opts),
}

/// Values are kept as text here and checked when the config is resolved, so
/// flag and file values share one set of error messages.
#[derive(Args)]
struct Opts {
    /// case1-l1, case1-bandit, case2-l1, case2-bandit, design-diagnostics or custom
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    s: Option<String>,
    /// Number of arms (sphere presets)
    #[arg(long)]
    k: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    /// Bandit horizon; for estimate runs, the largest grid point
    #[arg(long)]
    n: Option<String>,
    /// Comma-separated sample sizes
    #[arg(long)]
    n_grid: Option<String>,
    #[arg(long)]
    reps: Option<String>,
    /// Base seed; rep k uses seed + k
    #[arg(long)]
    seed: Option<String>,
    /// Reward bound, or `auto`
    #[arg(long)]
    r_max: Option<String>,
    /// Minimum signal strength
    #[arg(long)]
    m: Option<String>,
    /// Divide the bandit horizon by this factor
    #[arg(long)]
    scale: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Actions matrix file (custom preset)
    #[arg(long)]
    actions: Option<String>,
    /// Theta vector file (custom preset)
    #[arg(long)]
    theta: Option<String>,
    /// `key = value` file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Opts {
    fn settings(&self) -> Result<Settings, CliError> {
        let mut settings = match &self.config {
            Some(path) => parse_config_file(path)?,
            None => Vec::new(),
        };
        let flags = [
            ("preset", &self.preset),
            ("d", &self.d),
            ("s", &self.s),
            ("k", &self.k),
            ("sigma", &self.sigma),
            ("delta", &self.delta),
            ("n", &self.n),
            ("n_grid", &self.n_grid),
            ("reps", &self.reps),
            ("seed", &self.seed),
            ("r_max", &self.r_max),
            ("m", &self.m),
            ("scale", &self.scale),
            ("out", &self.out),
            ("actions", &self.actions),
            ("theta", &self.theta),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                settings.push((key.to_string(), v.clone()));
            }
        }
        Ok(settings)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (mode, opts) = match &cli.command {
        Command::Design(o) => (Some(Mode::Design), o),
        Command::Estimate(o) => (Some(Mode::Estimate), o),
        Command::Bandit(o) => (Some(Mode::Bandit), o),
        Command::Sweep(o) => (None, o),
    };
    let cfg = ExperimentConfig::resolve(mode, &opts.settings()?)?;
    eprintln!(
        "{} ({:?}): {} reps from seed {}",
        cfg.preset, cfg.mode, cfg.reps, cfg.base_seed
    );
    let (outcome, files) = run_experiment(&cfg)?;
    for line in &outcome.report {
        println!("{line}");
    }
    if !outcome.failures.is_empty() {
        eprintln!(
            "{} failed runs recorded as NaN, first: {}",
            outcome.failures.len(),
            outcome.failures[0]
        );
    }
    println!("wrote {}", files.raw.display());
    println!("wrote {}", files.summary.display());
    println!("wrote {}", files.timing.display());
    for c in &files.charts {
        println!("wrote {}", c.display());
    }
    if let Some(r) = &files.report {
        println!("wrote {}", r.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
