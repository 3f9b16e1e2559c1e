//! Command-line driver for the driven-XXZ steady-state simulator.
//!
//! Verbs: `run` (preset or config file), `check` (oracle self-checks),
//! `sweep` (custom one-axis sweep), `version`.

mod config;
mod output;
mod runner;
mod selfcheck;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{Experiment, FileConfig, Format, Overrides, Point, PointKind};
use xxz_ness::propagator::PropagatorSettings;
use xxz_ness::{BathPotentials, ChainCouplings, ChainSpec};

/// Error carrying the process exit code contract:
/// 1 usage, 2 check failure, 3 I/O, 4 numerical failure.
#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn usage(message: String) -> Self {
        Self { code: 1, message }
    }

    pub fn check(message: String) -> Self {
        Self { code: 2, message }
    }

    pub fn io(message: String) -> Self {
        Self { code: 3, message }
    }

    pub fn numerical(message: String) -> Self {
        Self { code: 4, message }
    }

    pub fn from_core(e: xxz_ness::Error) -> Self {
        match e {
            xxz_ness::Error::InvalidConfig(_) => Self::usage(e.to_string()),
            _ => Self::numerical(e.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "xxz-ness",
    about = "Steady-state spin transport in bath-driven XXZ chains",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args, Debug, Default)]
struct CommonFlags {
    /// Base RNG seed (per-point seeds derive from it)
    #[arg(long)]
    seed: Option<u64>,
    /// Steps per trajectory
    #[arg(long)]
    steps: Option<usize>,
    /// Steps discarded before averaging
    #[arg(long)]
    burn_in: Option<usize>,
    /// Trajectories per ensemble
    #[arg(long)]
    trajectories: Option<usize>,
    /// Worker threads for the ensemble (default: all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Output file stem; extensions .csv/.json are appended
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv, json, or both
    #[arg(long)]
    format: Option<String>,
    /// Enable the N=16 pathway in presets that have one
    #[arg(long)]
    large: bool,
}

#[derive(Subcommand)]
enum Verb {
    /// Run a preset experiment or a config-file experiment
    Run {
        /// Preset name: fig1a, fig1b, fig2, fig3, zeno
        #[arg(long)]
        preset: Option<String>,
        /// TOML config file (fields override the preset; flags override both)
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Run the built-in oracle cross-validation suite
    Check,
    /// Sweep one axis of a custom chain
    Sweep {
        /// Axis to sweep: mu, delta, tau, or n
        #[arg(long)]
        axis: String,
        /// Comma-separated, strictly increasing grid values
        #[arg(long)]
        grid: String,
        /// Number of sites (fixed unless axis = n)
        #[arg(long, default_value_t = 8)]
        n_sites: usize,
        #[arg(long, default_value_t = 1.0)]
        j_x: f64,
        #[arg(long, default_value_t = 0.5)]
        j_z: f64,
        /// Symmetric field strength (fixed unless axis = mu)
        #[arg(long, default_value_t = 0.3)]
        mu: f64,
        /// Mean lag (fixed unless axis = tau)
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        /// Lag law: constant, uniform, or exponential
        #[arg(long, default_value = "constant")]
        lag: String,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Print the version
    Version,
}

fn overrides_from(common: &CommonFlags) -> Result<Overrides, CliError> {
    Ok(Overrides {
        seed: common.seed,
        steps: common.steps,
        burn_in: common.burn_in,
        trajectories: common.trajectories,
        out: common.out.clone(),
        format: common.format.as_deref().map(Format::parse).transpose()?,
        large: common.large,
    })
}

fn configure_threads(common: &CommonFlags) -> Result<(), CliError> {
    if let Some(threads) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::usage(format!("cannot configure {threads} threads: {e}")))?;
    }
    Ok(())
}

fn load_config(path: &PathBuf) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| CliError::usage(format!("bad config {}: {e}", path.display())))
}

fn cmd_run(
    preset: Option<String>,
    config_path: Option<PathBuf>,
    common: &CommonFlags,
) -> Result<(), CliError> {
    configure_threads(common)?;
    let mut ov = overrides_from(common)?;
    let file = config_path.as_ref().map(load_config).transpose()?;
    if let Some(f) = &file {
        config::merge_file(&mut ov, f)?;
    }
    let preset_name = preset.or_else(|| file.as_ref().and_then(|f| f.preset.clone()));
    let exp = match (preset_name, &file) {
        (Some(name), _) => config::preset(&name, &ov)?,
        (None, Some(f)) => config::custom(f, &ov)?,
        (None, None) => {
            return Err(CliError::usage(
                "run needs --preset or --config".into(),
            ))
        }
    };
    let records = runner::run_experiment(&exp)?;
    output::emit(&exp.name, &records, exp.format, exp.out.as_deref())
}

#[allow(clippy::too_many_arguments)]
fn cmd_sweep(
    axis: &str,
    grid: &str,
    n_sites: usize,
    j_x: f64,
    j_z: f64,
    mu: f64,
    tau: f64,
    lag: &str,
    common: &CommonFlags,
) -> Result<(), CliError> {
    configure_threads(common)?;
    let ov = overrides_from(common)?;
    let grid: Vec<f64> = grid
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::usage(format!("bad grid value '{s}': {e}")))
        })
        .collect::<Result<_, _>>()?;
    config::validate_grid(&grid)?;
    let steps = ov.steps.unwrap_or(10_000);
    let burn_in = ov.burn_in.unwrap_or(steps / 10);
    let base_seed = ov.seed.unwrap_or(42);
    let mut points = Vec::new();
    for (i, &v) in grid.iter().enumerate() {
        let (n, couplings, mu_here, tau_here) = match axis {
            "mu" => (n_sites, ChainCouplings::new(j_x, j_z), v, tau),
            "delta" => (n_sites, ChainCouplings::from_delta(j_x, v), mu, tau),
            "tau" => (n_sites, ChainCouplings::new(j_x, j_z), mu, v),
            "n" => {
                if v.fract() != 0.0 || v < 3.0 {
                    return Err(CliError::usage(format!(
                        "axis n needs integer grid values >= 3, got {v}"
                    )));
                }
                (v as usize, ChainCouplings::new(j_x, j_z), mu, tau)
            }
            other => {
                return Err(CliError::usage(format!(
                    "unknown sweep axis '{other}' (expected mu, delta, tau, or n)"
                )))
            }
        };
        points.push(Point {
            label: format!("{axis}-sweep"),
            chain: ChainSpec {
                n_sites: n,
                couplings,
                potentials: BathPotentials::symmetric(mu_here)
                    .map_err(|e| CliError::usage(e.to_string()))?,
                lag: config::lag_from_kind(lag, tau_here)?,
                propagator: PropagatorSettings::default(),
            },
            steps,
            burn_in,
            trajectories: ov.trajectories.unwrap_or(4),
            seed: base_seed.wrapping_add(i as u64),
            kind: PointKind::MonteCarlo,
        });
    }
    let exp = Experiment {
        name: format!("sweep-{axis}"),
        points,
        out: ov.out,
        format: ov.format.unwrap_or(Format::Csv),
    };
    let records = runner::run_experiment(&exp)?;
    output::emit(&exp.name, &records, exp.format, exp.out.as_deref())
}

fn run() -> Result<(), CliError> {
    let cli = Cli::try_parse().map_err(|e| {
        // help/version requests are not errors
        if e.use_stderr() {
            CliError::usage(e.to_string())
        } else {
            print!("{e}");
            CliError {
                code: 0,
                message: String::new(),
            }
        }
    })?;
    match cli.verb {
        Verb::Run {
            preset,
            config,
            common,
        } => cmd_run(preset, config, &common),
        Verb::Check => {
            if selfcheck::run() {
                Ok(())
            } else {
                Err(CliError::check("self-check failed".into()))
            }
        }
        Verb::Sweep {
            axis,
            grid,
            n_sites,
            j_x,
            j_z,
            mu,
            tau,
            lag,
            common,
        } => cmd_sweep(&axis, &grid, n_sites, j_x, j_z, mu, tau, &lag, &common),
        Verb::Version => {
            println!("xxz-ness {}", env!("CARGO_PKG_VERSION"));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !e.message.is_empty() {
                eprintln!("error: {}", e.message);
            }
            ExitCode::from(e.code)
        }
    }
}
