//! `cubic-lab`: named experiments with config files, deterministic CSV/JSON
//! artifacts and the consolidated verification report.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Outcome;
use config::{ExperimentConfig, Layers};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("{0}")]
    Other(String),
}

impl CliError {
    pub fn other(e: impl std::fmt::Display) -> Self {
        CliError::Other(e.to_string())
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) | CliError::Other(_) => 3,
        }
    }
}

/// Numerical experiments on cubic homoclinic tangencies.
///
/// Exit status: 0 when the run's checks pass, 1 when a check fails (artifacts
/// are still written), 2 for usage or config errors, 3 for runtime errors.
#[derive(Debug, Parser)]
#[command(name = "cubic-lab", version)]
struct Cli {
    /// Worker threads for parameter sweeps [default: logical CPU count].
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Experiment config: TOML, or the manifest.json of an earlier run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [env: CUBIC_LAB_OUT; default: cubic-lab-out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Config override: `key=value` for params, `tolerances.key=value` or `grids.key=value` otherwise.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact generations of the Cantor set K_m and their thickness.
    Cantor {
        /// Even m >= 6.
        #[arg(long)]
        m: Option<usize>,
        /// Number of generations.
        #[arg(long = "gen")]
        generation: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Residual of the renormalized map over a range of n and its decay rate.
    Renorm {
        #[arg(long)]
        n_min: Option<u32>,
        #[arg(long)]
        n_max: Option<u32>,
        /// `quartic` or `none`.
        #[arg(long)]
        perturbation: Option<String>,
        /// Coefficient of the quartic perturbation.
        #[arg(long, allow_negative_numbers = true)]
        epsilon: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Orbit sample, fixed points and Lyapunov exponent of the cubic Henon-like map.
    Attractor {
        #[arg(long, allow_negative_numbers = true)]
        a: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        b: Option<f64>,
        /// Steps of the Lyapunov run.
        #[arg(long)]
        steps: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Scan of the renormalized family along (mu_bar, nu_bar + t) for tangencies.
    Tangency {
        #[arg(long, allow_negative_numbers = true)]
        mu_bar: Option<f64>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long, allow_negative_numbers = true)]
        t_min: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        t_max: Option<f64>,
        /// Number of scan points; 0 gives an empty scan.
        #[arg(long)]
        t_steps: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Runs every acceptance criterion and writes the consolidated report.
    Verify {
        /// Criterion or sub-check keys to skip (repeatable or comma-separated).
        #[arg(long, value_delimiter = ',')]
        skip: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
}

/// Flag values that were given, as a params override layer.
#[derive(Default)]
struct Flags(toml::Table);

impl Flags {
    fn set<V: Into<toml::Value>>(mut self, key: &str, v: Option<V>) -> Self {
        if let Some(v) = v {
            self.0.insert(key.into(), v.into());
        }
        self
    }
}

fn invocation(experiment: &str, common: &Common) -> Result<commands::Invocation, CliError> {
    let config = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(name) = &config.experiment {
        if name != experiment {
            return Err(CliError::Usage(format!("config is for experiment `{name}`, not `{experiment}`")));
        }
    }
    let mut layers = Layers::default();
    layers.push_config(&config);
    layers.push_sets(&common.set)?;
    let dir = config::output_dir(common.out.clone(), &config);
    Ok(commands::Invocation { seed: config.seed, layers, dir })
}

fn int(v: Option<impl Into<i64>>) -> Option<i64> {
    v.map(Into::into)
}

fn count(v: Option<usize>) -> Result<Option<i64>, CliError> {
    v.map(|x| i64::try_from(x).map_err(|_| CliError::Usage(format!("{x} is too large"))))
        .transpose()
}

fn dispatch(command: Command) -> Result<Outcome, CliError> {
    match command {
        Command::Cantor { m, generation, common } => {
            let flags = Flags::default().set("m", count(m)?).set("generation", count(generation)?);
            commands::cantor::run(invocation("cantor", &common)?, flags.0)
        }
        Command::Renorm { n_min, n_max, perturbation, epsilon, common } => {
            let flags = Flags::default()
                .set("n_min", int(n_min))
                .set("n_max", int(n_max))
                .set("perturbation", perturbation)
                .set("epsilon", epsilon);
            commands::renorm::run(invocation("renorm", &common)?, flags.0)
        }
        Command::Attractor { a, b, steps, common } => {
            let flags = Flags::default().set("a", a).set("b", b).set("steps", count(steps)?);
            commands::attractor::run(invocation("attractor", &common)?, flags.0)
        }
        Command::Tangency { mu_bar, n, t_min, t_max, t_steps, common } => {
            let flags = Flags::default()
                .set("mu_bar", mu_bar)
                .set("n", int(n))
                .set("t_min", t_min)
                .set("t_max", t_max)
                .set("t_steps", count(t_steps)?);
            commands::tangency::run(invocation("tangency", &common)?, flags.0)
        }
        Command::Verify { skip, common } => {
            let skip = (!skip.is_empty()).then(|| toml::Value::Array(skip.into_iter().map(Into::into).collect()));
            let flags = Flags::default().set("skip", skip);
            commands::verify::run(invocation("verify", &common)?, flags.0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: usage: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    match dispatch(cli.command) {
        Ok(outcome) if outcome.passed => ExitCode::SUCCESS,
        Ok(outcome) => {
            eprintln!("failed: {}", outcome.message);
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
