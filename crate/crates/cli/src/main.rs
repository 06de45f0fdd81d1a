use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

use config::{ExperimentConfig, FileConfig};

/// Experiments for the weighted two-phase thin free boundary problem.
#[derive(Debug, Parser)]
#[command(name = "fbxlab", version)]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML file with flat keys; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output root (default: $FBXLAB_OUT, else ./fbxlab-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    a: Option<f64>,
    /// Sets both phase coefficients.
    #[arg(long, global = true)]
    lambda: Option<String>,
    #[arg(long, global = true)]
    lambda_plus: Option<f64>,
    #[arg(long, global = true)]
    lambda_minus: Option<f64>,
    /// Nodes per axis (odd).
    #[arg(long, global = true)]
    n: Option<usize>,
    /// linear, const:<c>, profile:<alpha>[:negative|:positive] or file:<path>.
    #[arg(long, global = true)]
    bc: Option<String>,
    #[arg(long, global = true)]
    eps_start: Option<f64>,
    #[arg(long, global = true)]
    eps_end: Option<f64>,
    #[arg(long, global = true)]
    eps_factor: Option<f64>,
    /// `default` or a comma-separated increasing list.
    #[arg(long, global = true)]
    radii: Option<String>,
    /// Thin center for the diagnostics.
    #[arg(long, global = true, allow_hyphen_values = true)]
    x0: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Minimize the two-phase functional.
    Solve,
    /// Solve the weighted equation with the boundary data only.
    Aharmonic,
    /// Monotonicity and blow-up diagnostics of a stored field.
    Diagnose {
        /// Field file written by solve or aharmonic.
        #[arg(long, conflicts_with = "preset")]
        field: Option<PathBuf>,
        /// Closed-form field: x1, odd, quadratic, mixed, slit, zero.
        #[arg(long)]
        preset: Option<String>,
    },
    /// Weighted eigenvalues on the circle or an arc domain.
    Spectrum {
        /// full, upper, slit or arcs:<lo>:<hi>[;<lo>:<hi>...].
        #[arg(long, default_value = "upper")]
        domain: String,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 512)]
        elements: usize,
    },
    /// Minimize over a parameter grid.
    Sweep {
        /// Comma-separated weight exponents (default: the configured a).
        #[arg(long = "a-values", allow_hyphen_values = true)]
        a_values: Option<String>,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Energy of the collapsing barrier.
    Barrier {
        #[arg(long, default_value = "0.04,0.01,0.0025")]
        eps: String,
    },
    /// Steiner symmetrization of a stored field.
    Symmetrize {
        #[arg(long)]
        field: PathBuf,
        /// Boundary level M.
        #[arg(long, allow_hyphen_values = true)]
        level: f64,
    },
    /// Quick internal consistency checks.
    Selftest,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input; exit code 2.
    #[error("{0}")]
    Usage(String),
    /// Numerical failure or warning; exit code 3.
    #[error("{0}")]
    Numerical(String),
}

impl From<fbxlab::Error> for CliError {
    fn from(e: fbxlab::Error) -> Self {
        use fbxlab::Error as E;
        match e {
            E::InvalidParameter(_) | E::GridMismatch(_) | E::Format(_) | E::Io(_) => Self::Usage(e.to_string()),
            _ => Self::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Usage(e.to_string())
    }
}

fn build_config(c: &CommonArgs, lambda_sweep: bool) -> Result<(ExperimentConfig, Option<Vec<f64>>), CliError> {
    let file = match &c.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let mut lambdas = None;
    let (mut lp, mut lm) = (c.lambda_plus, c.lambda_minus);
    if let Some(l) = &c.lambda {
        let list = config::parse_list(l, "--lambda")?;
        match list.as_slice() {
            [single] => {
                lp = lp.or(Some(*single));
                lm = lm.or(Some(*single));
            }
            _ if lambda_sweep => lambdas = Some(list),
            _ => return Err(CliError::Usage("--lambda takes one value outside sweep".into())),
        }
    }
    let over = FileConfig {
        a: c.a,
        lambda_plus: lp,
        lambda_minus: lm,
        grid_n: c.n,
        bc: c.bc.clone(),
        eps_start: c.eps_start,
        eps_end: c.eps_end,
        eps_factor: c.eps_factor,
        radii: c.radii.clone(),
        x0: c.x0,
        seed: c.seed,
        output: c.out.clone(),
    };
    let default_out = std::env::var_os("FBXLAB_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("fbxlab-out"));
    let cfg = ExperimentConfig::from_file_config(&file.merge(over), default_out)?;
    Ok((cfg, lambdas))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let sweep = matches!(cli.command, Command::Sweep { .. });
    let (cfg, lambdas) = build_config(&cli.common, sweep)?;
    match cli.command {
        Command::Solve => commands::solve(&cfg),
        Command::Aharmonic => commands::aharmonic(&cfg),
        Command::Diagnose { field, preset } => commands::diagnose(&cfg, field.as_deref(), preset.as_deref()),
        Command::Spectrum { domain, k, elements } => commands::spectrum(&cfg, &domain, k, elements),
        Command::Sweep { a_values, jobs } => {
            let a_list = match a_values {
                Some(s) => config::parse_list(&s, "--a-values")?,
                None => vec![cfg.params.a],
            };
            let l_list = lambdas.unwrap_or_else(|| vec![cfg.params.lambda_plus]);
            commands::sweep(&cfg, &a_list, &l_list, jobs)
        }
        Command::Barrier { eps } => commands::barrier(&cfg, &config::parse_list(&eps, "--eps")?),
        Command::Symmetrize { field, level } => commands::symmetrize(&cfg, &field, level),
        Command::Selftest => commands::selftest(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
