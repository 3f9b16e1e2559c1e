//! Monte-Carlo NESS simulation: unitary propagation alternating with
//! stochastic bath interactions, current and spin-density estimators, and
//! parallel farming of independently seeded trajectories.
//!
//! Reproducibility contract: each trajectory owns a counter-based RNG stream
//! derived from `(seed, trajectory id)`; the per-step draw order is fixed as
//! (measurement draw, zeta_L, zeta_R, lag draw). Pooled results are therefore
//! bitwise independent of thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{ChainCouplings, SparseHamiltonian};
use crate::propagator::{propagate, PropagatorSettings};
use crate::state::{BathEvent, BathPotentials, Flip, PureState};

/// Distribution of the time lags between bath interactions. All variants
/// have the stated mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LagDistribution {
    /// (A) `tau_k = mean` always.
    Constant { mean: f64 },
    /// (B) uniform on `[0, 2 mean]`.
    Uniform { mean: f64 },
    /// (C) exponential with the given mean (Poissonian instants).
    Exponential { mean: f64 },
}

impl LagDistribution {
    pub fn mean(&self) -> f64 {
        match *self {
            LagDistribution::Constant { mean }
            | LagDistribution::Uniform { mean }
            | LagDistribution::Exponential { mean } => mean,
        }
    }

    /// Short label used in result emission.
    pub fn kind_label(&self) -> &'static str {
        match self {
            LagDistribution::Constant { .. } => "constant",
            LagDistribution::Uniform { .. } => "uniform",
            LagDistribution::Exponential { .. } => "exponential",
        }
    }

    /// Draw one lag. Always consumes exactly one uniform draw so that the
    /// stream layout is identical across distributions.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        match *self {
            LagDistribution::Constant { mean } => mean,
            LagDistribution::Uniform { mean } => 2.0 * mean * u,
            LagDistribution::Exponential { mean } => -mean * (1.0 - u).ln(),
        }
    }
}

/// Full physical configuration of one driven chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n_sites: usize,
    pub couplings: ChainCouplings,
    pub potentials: BathPotentials,
    pub lag: LagDistribution,
    #[serde(default)]
    pub propagator: PropagatorSettings,
}

/// A complete Monte-Carlo experiment plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunPlan {
    pub chain: ChainSpec,
    pub total_steps: usize,
    pub burn_in_steps: usize,
    pub seed: u64,
    pub n_trajectories: usize,
}

impl RunPlan {
    fn validate(&self) -> Result<()> {
        if self.burn_in_steps >= self.total_steps {
            return Err(Error::InvalidConfig(format!(
                "burn-in ({}) must be smaller than total steps ({})",
                self.burn_in_steps, self.total_steps
            )));
        }
        if self.n_trajectories == 0 {
            return Err(Error::InvalidConfig("need at least one trajectory".into()));
        }
        if self.chain.n_sites < 3 {
            return Err(Error::InvalidConfig(format!(
                "chain needs at least 3 sites, got {}",
                self.chain.n_sites
            )));
        }
        Ok(())
    }
}

/// Steady-state estimate from one trajectory or a pooled ensemble.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NessEstimate {
    /// Current at the left bath: net up-spin removals per unit time.
    pub j_left: f64,
    /// Current at the right bath: net up-spin insertions per unit time;
    /// magnetization conservation makes `j_left = j_right` at long times.
    pub j_right: f64,
    /// Standard error of the current estimate. Between-trajectory for
    /// ensembles, a Poisson scale estimate for single trajectories.
    pub sigma_j: f64,
    /// Time-averaged `<sigma^z_n>` for `n = 1..=N`, sampled once per step
    /// right after the bath interaction.
    pub profile: Vec<f64>,
    /// Simulated time accumulated after burn-in.
    pub total_time: f64,
    pub n_trajectories: usize,
    /// False when the first-half / second-half current drift exceeded 3
    /// sigma (reported, not fatal).
    pub converged: bool,
}

impl NessEstimate {
    /// Symmetrized current estimate.
    pub fn current(&self) -> f64 {
        0.5 * (self.j_left + self.j_right)
    }
}

/// One propagation-measurement-flip cycle. The state stays normalized and
/// ends as a product of an interior part with a definite border state.
pub fn step<R: Rng>(
    state: &mut PureState,
    h: &SparseHamiltonian,
    chain: &ChainSpec,
    rng: &mut R,
) -> Result<BathEvent> {
    // fixed draw order: measurement, zeta_L, zeta_R, lag
    let measurement_draw: f64 = rng.gen();
    let zeta_left: f64 = rng.gen();
    let zeta_right: f64 = rng.gen();
    let lag = chain.lag.sample(rng);

    propagate(state, h, lag, &chain.propagator)?;
    let (b, _p) = state.measure_border(measurement_draw);
    let (flip_left, flip_right) =
        state.conditional_flip(b, zeta_left, zeta_right, &chain.potentials)?;
    Ok(BathEvent {
        border: b as u8,
        flip_left,
        flip_right,
        lag,
    })
}

/// Net charge transferred by one event, per bath.
///
/// Oriented so the standard drive (right bath inserting up spins) gives a
/// positive current: at the right bath an up-flip (insertion into the chain)
/// counts +1 and a down-flip -1, while at the left bath a down-flip
/// (removal into the bath) counts +1 and an up-flip -1. Conservation of
/// total magnetization makes the two per-bath rates agree at long times.
fn event_charges(ev: &BathEvent) -> (i64, i64) {
    let left = match ev.flip_left {
        Flip::Down => 1,
        Flip::Up => -1,
        Flip::None => 0,
    };
    let right = match ev.flip_right {
        Flip::Up => 1,
        Flip::Down => -1,
        Flip::None => 0,
    };
    (left, right)
}

struct Accumulator {
    left_net: i64,
    right_net: i64,
    flip_events: u64,
    time: f64,
    profile: Vec<f64>,
    samples: u64,
    // first-half / second-half split for the convergence drift check
    half_boundary: usize,
    first_left: i64,
    first_time: f64,
}

impl Accumulator {
    fn new(n_sites: usize, counted_steps: usize) -> Self {
        Self {
            left_net: 0,
            right_net: 0,
            flip_events: 0,
            time: 0.0,
            profile: vec![0.0; n_sites],
            samples: 0,
            half_boundary: counted_steps / 2,
            first_left: 0,
            first_time: 0.0,
        }
    }

    fn record(&mut self, ev: &BathEvent, state: &PureState, counted_index: usize) {
        let (ql, qr) = event_charges(ev);
        self.left_net += ql;
        self.right_net += qr;
        self.flip_events += (ql != 0) as u64 + (qr != 0) as u64;
        self.time += ev.lag;
        if counted_index < self.half_boundary {
            self.first_left += ql;
            self.first_time += ev.lag;
        }
        for (p, v) in self.profile.iter_mut().zip(state.sigma_z_profile()) {
            *p += v;
        }
        self.samples += 1;
    }

    fn finish(self, n_trajectories: usize) -> Result<NessEstimate> {
        if self.time <= 0.0 {
            return Err(Error::ZeroAccumulatedTime);
        }
        let j_left = self.left_net as f64 / self.time;
        let j_right = self.right_net as f64 / self.time;
        // Poisson scale for a single stream; ensembles replace this with
        // the between-trajectory standard error.
        let sigma_j = (self.flip_events.max(1) as f64).sqrt() / self.time / 2.0;
        let second_left = self.left_net - self.first_left;
        let second_time = self.time - self.first_time;
        let converged = if self.first_time > 0.0 && second_time > 0.0 {
            let j1 = self.first_left as f64 / self.first_time;
            let j2 = second_left as f64 / second_time;
            (j1 - j2).abs() <= 6.0 * sigma_j.max(1e-300) * std::f64::consts::SQRT_2
        } else {
            true
        };
        let profile = self
            .profile
            .iter()
            .map(|p| p / self.samples.max(1) as f64)
            .collect();
        Ok(NessEstimate {
            j_left,
            j_right,
            sigma_j,
            profile,
            total_time: self.time,
            n_trajectories,
            converged,
        })
    }
}

fn trajectory_rng(seed: u64, trajectory_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trajectory_id);
    rng
}

fn run_trajectory_inner(
    plan: &RunPlan,
    trajectory_id: u64,
    mut log: Option<&mut Vec<BathEvent>>,
) -> Result<NessEstimate> {
    plan.validate()?;
    let chain = &plan.chain;
    let h = SparseHamiltonian::build(chain.n_sites, chain.couplings)?;
    let mut rng = trajectory_rng(plan.seed, trajectory_id);
    let mut state = PureState::random_gaussian(chain.n_sites, &mut rng);
    let counted = plan.total_steps - plan.burn_in_steps;
    let mut acc = Accumulator::new(chain.n_sites, counted);
    for k in 0..plan.total_steps {
        let ev = step(&mut state, &h, chain, &mut rng)?;
        if k >= plan.burn_in_steps {
            acc.record(&ev, &state, k - plan.burn_in_steps);
        }
        if let Some(sink) = log.as_deref_mut() {
            sink.push(ev);
        }
    }
    acc.finish(1)
}

/// Run a single trajectory identified by `trajectory_id`.
pub fn run_trajectory(plan: &RunPlan, trajectory_id: u64) -> Result<NessEstimate> {
    run_trajectory_inner(plan, trajectory_id, None)
}

/// Like [`run_trajectory`] but also records every bath event (debugging;
/// the log grows by one entry per step).
pub fn run_trajectory_with_log(
    plan: &RunPlan,
    trajectory_id: u64,
    log: &mut Vec<BathEvent>,
) -> Result<NessEstimate> {
    run_trajectory_inner(plan, trajectory_id, Some(log))
}

/// Run `plan.n_trajectories` independent trajectories in parallel and pool.
///
/// Pooled currents and profiles are time-weighted means; `sigma_j` is the
/// between-trajectory standard error (requires at least two trajectories to
/// be meaningful). The result does not depend on thread count.
pub fn run_ensemble(plan: &RunPlan) -> Result<NessEstimate> {
    plan.validate()?;
    let results: Vec<NessEstimate> = (0..plan.n_trajectories as u64)
        .into_par_iter()
        .map(|id| run_trajectory(plan, id))
        .collect::<Result<Vec<_>>>()?;
    Ok(pool(&results))
}

/// Pool per-trajectory estimates (time-weighted; order-independent).
pub fn pool(parts: &[NessEstimate]) -> NessEstimate {
    assert!(!parts.is_empty());
    if parts.len() == 1 {
        return parts[0].clone();
    }
    let total_time: f64 = parts.iter().map(|p| p.total_time).sum();
    let j_left = parts.iter().map(|p| p.j_left * p.total_time).sum::<f64>() / total_time;
    let j_right = parts.iter().map(|p| p.j_right * p.total_time).sum::<f64>() / total_time;
    let n_sites = parts[0].profile.len();
    let mut profile = vec![0.0; n_sites];
    for p in parts {
        for (o, v) in profile.iter_mut().zip(&p.profile) {
            *o += v * p.total_time;
        }
    }
    for v in &mut profile {
        *v /= total_time;
    }
    let n = parts.len() as f64;
    let mean_j: f64 = parts.iter().map(|p| p.current()).sum::<f64>() / n;
    let var: f64 = parts
        .iter()
        .map(|p| (p.current() - mean_j).powi(2))
        .sum::<f64>()
        / (n - 1.0);
    let sigma_j = (var / n).sqrt();
    NessEstimate {
        j_left,
        j_right,
        sigma_j,
        profile,
        total_time,
        n_trajectories: parts.len(),
        converged: parts.iter().all(|p| p.converged),
    }
}

/// Between-trajectory standard error of each profile entry.
pub fn profile_sigma(parts: &[NessEstimate]) -> Vec<f64> {
    let n = parts.len() as f64;
    let n_sites = parts[0].profile.len();
    (0..n_sites)
        .map(|i| {
            let mean: f64 = parts.iter().map(|p| p.profile[i]).sum::<f64>() / n;
            let var: f64 = parts
                .iter()
                .map(|p| (p.profile[i] - mean).powi(2))
                .sum::<f64>()
                / (n - 1.0).max(1.0);
            (var / n).sqrt()
        })
        .collect()
}

/// Run the trajectories of an ensemble and return the per-trajectory
/// estimates alongside the pooled one.
pub fn run_ensemble_detailed(plan: &RunPlan) -> Result<(NessEstimate, Vec<NessEstimate>)> {
    plan.validate()?;
    let results: Vec<NessEstimate> = (0..plan.n_trajectories as u64)
        .into_par_iter()
        .map(|id| run_trajectory(plan, id))
        .collect::<Result<Vec<_>>>()?;
    Ok((pool(&results), results))
}

/// Order parameter `theta = N <j>` at maximal driving (`mu_L = 0`,
/// `mu_R = 1`). Returns `(theta, sigma_theta)`.
pub fn order_parameter(plan: &RunPlan) -> Result<(f64, f64)> {
    let mut plan = *plan;
    plan.chain.potentials = BathPotentials::new(0.0, 1.0)?;
    let est = run_ensemble(&plan)?;
    let n = plan.chain.n_sites as f64;
    Ok((n * est.current(), n * est.sigma_j))
}
