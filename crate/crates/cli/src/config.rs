//! Experiment configuration: presets, config-file parsing, and the
//! command-line > file > preset precedence chain.

use std::path::PathBuf;

use serde::Deserialize;
use xxz_ness::{BathPotentials, ChainCouplings, ChainSpec, LagDistribution};
use xxz_ness::propagator::PropagatorSettings;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "both" => Ok(Self::Both),
            other => Err(CliError::usage(format!(
                "unknown format '{other}' (expected csv, json, or both)"
            ))),
        }
    }
}

/// What a single sweep point computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    /// Trajectory ensemble simulation.
    MonteCarlo,
    /// Exact master-operator fixed point (dense propagator, small chains).
    FixedPoint,
    /// Closed-form four-site small-lag current per unit lag.
    Analytic,
}

/// One fully resolved unit of work.
#[derive(Debug, Clone)]
pub struct Point {
    /// Curve label carried into the output records.
    pub label: String,
    pub chain: ChainSpec,
    pub steps: usize,
    pub burn_in: usize,
    pub trajectories: usize,
    pub seed: u64,
    pub kind: PointKind,
}

/// A resolved experiment: a list of points plus emission settings.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub name: String,
    pub points: Vec<Point>,
    pub out: Option<PathBuf>,
    pub format: Format,
}

/// Overridable knobs shared by every preset; populated from the config
/// file and then the command line, in that order.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub steps: Option<usize>,
    pub burn_in: Option<usize>,
    pub trajectories: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub large: bool,
}

/// On-disk config document (TOML). Every field optional; `preset` picks the
/// baseline, the rest override it.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub preset: Option<String>,
    pub n_sites: Option<usize>,
    pub j_x: Option<f64>,
    pub j_z: Option<f64>,
    /// Symmetric field strength: mu_left = (1-mu)/2, mu_right = (1+mu)/2.
    pub mu: Option<f64>,
    pub mu_left: Option<f64>,
    pub mu_right: Option<f64>,
    pub lag_kind: Option<String>,
    pub tau: Option<f64>,
    pub seed: Option<u64>,
    pub steps: Option<usize>,
    pub burn_in: Option<usize>,
    pub trajectories: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub large: Option<bool>,
}

pub fn lag_from_kind(kind: &str, mean: f64) -> Result<LagDistribution, CliError> {
    match kind {
        "constant" => Ok(LagDistribution::Constant { mean }),
        "uniform" => Ok(LagDistribution::Uniform { mean }),
        "exponential" => Ok(LagDistribution::Exponential { mean }),
        other => Err(CliError::usage(format!(
            "unknown lag kind '{other}' (expected constant, uniform, or exponential)"
        ))),
    }
}

fn chain(
    n_sites: usize,
    couplings: ChainCouplings,
    mu: f64,
    lag: LagDistribution,
) -> ChainSpec {
    ChainSpec {
        n_sites,
        couplings,
        potentials: BathPotentials::symmetric(mu).expect("preset mu out of range"),
        lag,
        propagator: PropagatorSettings::default(),
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Derive a per-point seed from the base seed and the point index so that
/// every record can be replayed independently.
fn point_seed(base: u64, index: u64) -> u64 {
    base.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

const CONDUCTING: ChainCouplings = ChainCouplings { j_x: 1.0, j_z: 0.5 };
const INSULATING: ChainCouplings = ChainCouplings { j_x: 0.25, j_z: 0.5 };

struct PresetDefaults {
    steps: usize,
    burn_in: usize,
    trajectories: usize,
    seed: u64,
}

impl PresetDefaults {
    fn apply(&self, ov: &Overrides) -> Self {
        let steps = ov.steps.unwrap_or(self.steps);
        Self {
            steps,
            // keep the default burn-in fraction when only steps change
            burn_in: ov.burn_in.unwrap_or(self.burn_in.min(steps / 10)),
            trajectories: ov.trajectories.unwrap_or(self.trajectories),
            seed: ov.seed.unwrap_or(self.seed),
        }
    }
}

/// Build the point list for a named preset.
pub fn preset(name: &str, ov: &Overrides) -> Result<Experiment, CliError> {
    let d = PresetDefaults {
        steps: 10_000,
        burn_in: 1_000,
        trajectories: 4,
        seed: 42,
    }
    .apply(ov);
    let mu_grid = linspace(0.0, 1.0, 21);
    let mut points = Vec::new();
    let mut idx = 0u64;
    let mut push = |points: &mut Vec<Point>,
                    label: String,
                    chain: ChainSpec,
                    kind: PointKind,
                    d: &PresetDefaults| {
        points.push(Point {
            label,
            chain,
            steps: d.steps,
            burn_in: d.burn_in,
            trajectories: d.trajectories,
            seed: point_seed(d.seed, idx),
            kind,
        });
        idx += 1;
    };

    match name {
        "fig1a" => {
            // current-field characteristics at N=12: conducting with
            // constant lag, insulating with all three lag laws
            let lag_a = LagDistribution::Constant { mean: 1.0 };
            for &mu in &mu_grid {
                push(
                    &mut points,
                    "delta-0.5-constant".into(),
                    chain(12, CONDUCTING, mu, lag_a),
                    PointKind::MonteCarlo,
                    &d,
                );
            }
            for (tag, lag) in [
                ("constant", lag_a),
                ("uniform", LagDistribution::Uniform { mean: 1.0 }),
                ("exponential", LagDistribution::Exponential { mean: 1.0 }),
            ] {
                for &mu in &mu_grid {
                    push(
                        &mut points,
                        format!("delta-2-{tag}"),
                        chain(12, INSULATING, mu, lag),
                        PointKind::MonteCarlo,
                        &d,
                    );
                }
            }
        }
        "fig1b" => {
            // insulating current-field characteristics across sizes, plus
            // the closed-form four-site small-lag curve per unit lag
            let lag = LagDistribution::Constant { mean: 1.0 };
            let mut sizes = vec![4usize, 8, 12];
            if ov.large {
                sizes.push(16);
            }
            for n in sizes {
                // the largest chain defaults to a reduced step count
                let steps = if n == 16 { (d.steps / 4).max(2) } else { d.steps };
                let dn = PresetDefaults {
                    steps,
                    burn_in: d.burn_in.min(steps / 2),
                    trajectories: d.trajectories,
                    seed: d.seed,
                };
                for &mu in &mu_grid {
                    push(
                        &mut points,
                        format!("N-{n}"),
                        chain(n, INSULATING, mu, lag),
                        PointKind::MonteCarlo,
                        &dn,
                    );
                }
            }
            for &mu in &mu_grid {
                push(
                    &mut points,
                    "analytic-n4-per-unit-lag".into(),
                    chain(4, INSULATING, mu, lag),
                    PointKind::Analytic,
                    &d,
                );
            }
        }
        "fig2" => {
            // spin-density profiles across sizes
            let lag = LagDistribution::Constant { mean: 1.0 };
            let mut sizes = vec![8usize, 12];
            if ov.large {
                sizes.push(16);
            }
            for &n in &sizes {
                for (tag, couplings, mu) in [
                    ("delta-0.5-mu-0.3", CONDUCTING, 0.3),
                    ("delta-2-mu-0.3", INSULATING, 0.3),
                    ("delta-2-mu-1", INSULATING, 1.0),
                ] {
                    push(
                        &mut points,
                        format!("{tag}-N-{n}"),
                        chain(n, couplings, mu, lag),
                        PointKind::MonteCarlo,
                        &d,
                    );
                }
            }
        }
        "fig3" => {
            // order parameter theta(Delta) at maximal driving, J_z fixed
            let lag = LagDistribution::Constant { mean: 1.0 };
            for &n in &[4usize, 6, 8, 10] {
                for delta in linspace(0.2, 3.0, 25) {
                    let couplings = ChainCouplings::from_delta(0.5 / delta, delta);
                    push(
                        &mut points,
                        format!("N-{n}"),
                        chain(n, couplings, 1.0, lag),
                        PointKind::MonteCarlo,
                        &d,
                    );
                }
            }
        }
        "zeno" => {
            // exact fixed-point current on a shrinking-lag grid at N=4
            for &tau in &[0.01, 0.02, 0.05, 0.1, 0.15, 0.2] {
                push(
                    &mut points,
                    "fixed-point".into(),
                    chain(
                        4,
                        ChainCouplings::from_delta(1.0, 2.0),
                        0.6,
                        LagDistribution::Constant { mean: tau },
                    ),
                    PointKind::FixedPoint,
                    &d,
                );
            }
        }
        other => {
            return Err(CliError::usage(format!(
                "unknown preset '{other}' (expected fig1a, fig1b, fig2, fig3, or zeno)"
            )))
        }
    }
    Ok(Experiment {
        name: name.to_string(),
        points,
        out: ov.out.clone(),
        format: ov.format.unwrap_or(Format::Csv),
    })
}

/// Build a single-point custom experiment from a config document.
pub fn custom(file: &FileConfig, ov: &Overrides) -> Result<Experiment, CliError> {
    let n_sites = file
        .n_sites
        .ok_or_else(|| CliError::usage("custom run needs n_sites".into()))?;
    let j_x = file.j_x.unwrap_or(1.0);
    let j_z = file.j_z.unwrap_or(0.5);
    let potentials = match (file.mu, file.mu_left, file.mu_right) {
        (Some(mu), None, None) => BathPotentials::symmetric(mu),
        (None, Some(l), Some(r)) => BathPotentials::new(l, r),
        (None, None, None) => BathPotentials::symmetric(0.3),
        _ => {
            return Err(CliError::usage(
                "give either mu or both mu_left and mu_right".into(),
            ))
        }
    }
    .map_err(|e| CliError::usage(e.to_string()))?;
    let lag = lag_from_kind(
        file.lag_kind.as_deref().unwrap_or("constant"),
        file.tau.unwrap_or(1.0),
    )?;
    let steps = ov.steps.or(file.steps).unwrap_or(10_000);
    let burn_in = ov.burn_in.or(file.burn_in).unwrap_or(steps / 10);
    let point = Point {
        label: "custom".into(),
        chain: ChainSpec {
            n_sites,
            couplings: ChainCouplings::new(j_x, j_z),
            potentials,
            lag,
            propagator: PropagatorSettings::default(),
        },
        steps,
        burn_in,
        trajectories: ov.trajectories.or(file.trajectories).unwrap_or(4),
        seed: ov.seed.or(file.seed).unwrap_or(42),
        kind: PointKind::MonteCarlo,
    };
    Ok(Experiment {
        name: "custom".into(),
        points: vec![point],
        out: ov.out.clone(),
        format: ov.format.unwrap_or(Format::Csv),
    })
}

/// Merge a config file underneath command-line overrides.
pub fn merge_file(ov: &mut Overrides, file: &FileConfig) -> Result<(), CliError> {
    if ov.seed.is_none() {
        ov.seed = file.seed;
    }
    if ov.steps.is_none() {
        ov.steps = file.steps;
    }
    if ov.burn_in.is_none() {
        ov.burn_in = file.burn_in;
    }
    if ov.trajectories.is_none() {
        ov.trajectories = file.trajectories;
    }
    if ov.out.is_none() {
        ov.out = file.out.clone();
    }
    if ov.format.is_none() {
        ov.format = file.format.as_deref().map(Format::parse).transpose()?;
    }
    ov.large |= file.large.unwrap_or(false);
    Ok(())
}

/// Validate a user-supplied sweep grid.
pub fn validate_grid(grid: &[f64]) -> Result<(), CliError> {
    if grid.is_empty() {
        return Err(CliError::usage("sweep grid is empty".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::usage(
            "sweep grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}
