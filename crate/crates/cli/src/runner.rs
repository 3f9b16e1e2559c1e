//! Executes resolved experiment points and collects result records.

use std::time::Instant;

use serde::Serialize;
use xxz_ness::master::{analytic_current_n4, interior_profile, MasterOperator};
use xxz_ness::trajectory::run_ensemble;
use xxz_ness::RunPlan;

use crate::config::{Experiment, Point, PointKind};
use crate::CliError;

/// One emitted sweep point: configuration echo plus results. Optional
/// fields stay empty when the branch that produces them did not run
/// (relaxation gap is exact-solver-only, theta needs maximal driving).
#[derive(Debug, Clone, Serialize)]
pub struct ResultRecord {
    pub label: String,
    pub n_sites: usize,
    pub j_x: f64,
    pub j_z: f64,
    pub delta: f64,
    pub mu_left: f64,
    pub mu_right: f64,
    pub tau_kind: String,
    pub tau_mean: f64,
    pub steps: usize,
    pub burn_in: usize,
    pub trajectories: usize,
    pub seed: u64,
    pub version: String,
    pub j_left: f64,
    pub j_right: f64,
    pub sigma_j: f64,
    /// Size-scaled current `N j`, the quantity the current-field plots use.
    pub n_j: f64,
    /// Order parameter `N j`; only populated at maximal driving.
    pub theta: Option<f64>,
    /// Relaxation gap of the master operator; exact-solver branch only.
    pub gap: Option<f64>,
    /// Site-resolved `<sigma^z_n>`, length `n_sites`; empty for the
    /// closed-form branch.
    pub profile: Vec<f64>,
    pub wall_time_s: f64,
}

fn base_record(p: &Point) -> ResultRecord {
    ResultRecord {
        label: p.label.clone(),
        n_sites: p.chain.n_sites,
        j_x: p.chain.couplings.j_x,
        j_z: p.chain.couplings.j_z,
        delta: p.chain.couplings.j_z / p.chain.couplings.j_x,
        mu_left: p.chain.potentials.mu_left,
        mu_right: p.chain.potentials.mu_right,
        tau_kind: p.chain.lag.kind_label().to_string(),
        tau_mean: p.chain.lag.mean(),
        steps: p.steps,
        burn_in: p.burn_in,
        trajectories: p.trajectories,
        seed: p.seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        j_left: 0.0,
        j_right: 0.0,
        sigma_j: 0.0,
        n_j: 0.0,
        theta: None,
        gap: None,
        profile: Vec::new(),
        wall_time_s: 0.0,
    }
}

fn maximal_drive(p: &Point) -> bool {
    p.chain.potentials.mu_left == 0.0 && p.chain.potentials.mu_right == 1.0
}

/// Run one point.
pub fn run_point(p: &Point) -> Result<ResultRecord, CliError> {
    let t0 = Instant::now();
    let mut rec = base_record(p);
    match p.kind {
        PointKind::MonteCarlo => {
            let plan = RunPlan {
                chain: p.chain,
                total_steps: p.steps,
                burn_in_steps: p.burn_in,
                seed: p.seed,
                n_trajectories: p.trajectories,
            };
            let est = run_ensemble(&plan).map_err(CliError::from_core)?;
            rec.j_left = est.j_left;
            rec.j_right = est.j_right;
            rec.sigma_j = est.sigma_j;
            rec.n_j = p.chain.n_sites as f64 * est.current();
            rec.profile = est.profile;
            if maximal_drive(p) {
                rec.theta = Some(rec.n_j);
            }
        }
        PointKind::FixedPoint => {
            let tau = p.chain.lag.mean();
            let op = MasterOperator::build(
                p.chain.n_sites,
                p.chain.couplings,
                &p.chain.potentials,
                tau,
            )
            .map_err(CliError::from_core)?;
            let fp = op.fixed_point().map_err(CliError::from_core)?;
            let probs = op.measurement_probs(&fp.rho);
            let j = op.steady_current(&probs).map_err(CliError::from_core)?;
            rec.j_left = j;
            rec.j_right = j;
            rec.n_j = p.chain.n_sites as f64 * j;
            rec.gap = Some(fp.gap);
            let mut profile = vec![2.0 * p.chain.potentials.mu_left - 1.0];
            profile.extend(interior_profile(&fp.rho, p.chain.n_sites));
            profile.push(2.0 * p.chain.potentials.mu_right - 1.0);
            rec.profile = profile;
            if maximal_drive(p) {
                rec.theta = Some(rec.n_j);
            }
        }
        PointKind::Analytic => {
            let c = p.chain.couplings;
            let j = analytic_current_n4(
                c.j_x,
                c.j_z / c.j_x,
                p.chain.potentials.mu_left,
                p.chain.potentials.mu_right,
                1.0,
            );
            rec.j_left = j;
            rec.j_right = j;
            rec.n_j = p.chain.n_sites as f64 * j;
        }
    }
    rec.wall_time_s = t0.elapsed().as_secs_f64();
    Ok(rec)
}

pub fn run_experiment(exp: &Experiment) -> Result<Vec<ResultRecord>, CliError> {
    exp.points.iter().map(run_point).collect()
}
