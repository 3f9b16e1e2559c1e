//! Built-in oracle cross-validation suite (`check` verb).
//!
//! Each check prints its measured deviation against the pinned tolerance;
//! any failure turns into a check-failure exit.

use num_complex::Complex64;
use xxz_ness::master::{
    analytic_gradient_n4, interior_profile, small_tau_current_fit, MasterOperator,
};
use xxz_ness::propagator::{dense_propagator, propagate, PropagatorMethod, PropagatorSettings};
use xxz_ness::trajectory::{run_ensemble, LagDistribution};
use xxz_ness::{
    basis, BathPotentials, ChainCouplings, ChainSpec, PureState, RunPlan, SparseHamiltonian,
};

struct Check {
    name: &'static str,
    deviation: f64,
    tolerance: f64,
}

impl Check {
    fn passed(&self) -> bool {
        self.deviation <= self.tolerance
    }
}

fn gamma_bijection() -> Check {
    // interleaved interior/border indexing must be a bijection on every
    // chain length
    let mut bad = 0usize;
    for n in 3..=10 {
        let dim = basis::dim(n);
        let mut seen = vec![false; dim];
        for a in 0..basis::interior_dim(n) {
            for b in 0..4 {
                let c = basis::gamma(a, b, n).unwrap();
                let (a2, b2) = basis::decompose(c, n).unwrap();
                if seen[c] || a2 != a || b2 != b {
                    bad += 1;
                }
                seen[c] = true;
            }
        }
        bad += seen.iter().filter(|&&s| !s).count();
    }
    Check {
        name: "index-interleave-bijection",
        deviation: bad as f64,
        tolerance: 0.0,
    }
}

fn hamiltonian_structure() -> Check {
    // Hermiticity and magnetization commutation on dense matrices
    let mut worst = 0.0f64;
    for n in 3..=6 {
        let h = SparseHamiltonian::build(n, ChainCouplings::new(0.7, -0.4)).unwrap();
        let dense = h.to_dense();
        let dim = basis::dim(n);
        for i in 0..dim {
            for j in 0..dim {
                worst = worst.max((dense[(i, j)] - dense[(j, i)]).abs());
                let dm = basis::magnetization_of(i, n) - basis::magnetization_of(j, n);
                worst = worst.max((dm as f64 * dense[(i, j)]).abs());
            }
        }
    }
    Check {
        name: "hamiltonian-hermitian-and-conserving",
        deviation: worst,
        tolerance: 1e-12,
    }
}

fn propagator_identity() -> Check {
    let h = SparseHamiltonian::build(5, ChainCouplings::new(1.0, 0.5)).unwrap();
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    let state = PureState::random_gaussian(5, &mut rng);
    let mut worst = 0.0f64;
    for method in [
        PropagatorMethod::PolynomialExpansion,
        PropagatorMethod::SeriesExpansion,
        PropagatorMethod::DenseExponential,
    ] {
        let mut out = state.clone();
        propagate(
            &mut out,
            &h,
            0.0,
            &PropagatorSettings {
                method,
                tolerance: 1e-10,
            },
        )
        .unwrap();
        let dev: f64 = out
            .amplitudes()
            .iter()
            .zip(state.amplitudes())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        worst = worst.max(dev);
    }
    Check {
        name: "propagator-zero-lag-identity",
        deviation: worst,
        tolerance: 1e-12,
    }
}

fn propagator_methods_agree() -> Check {
    use rand::SeedableRng;
    let mut worst = 0.0f64;
    for n in [4usize, 6] {
        let h = SparseHamiltonian::build(n, ChainCouplings::new(1.0, 2.0)).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(n as u64);
        let state = PureState::random_gaussian(n, &mut rng);
        let u = dense_propagator(&h, 0.7).unwrap();
        // dense reference column application
        let mut reference = vec![Complex64::ZERO; state.dim()];
        for (c, amp) in state.amplitudes().iter().enumerate() {
            for (r, dst) in reference.iter_mut().enumerate() {
                *dst += u[(r, c)] * amp;
            }
        }
        for method in [
            PropagatorMethod::PolynomialExpansion,
            PropagatorMethod::SeriesExpansion,
        ] {
            let mut out = state.clone();
            propagate(
                &mut out,
                &h,
                0.7,
                &PropagatorSettings {
                    method,
                    tolerance: 1e-10,
                },
            )
            .unwrap();
            let dev: f64 = out
                .amplitudes()
                .iter()
                .zip(&reference)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            worst = worst.max(dev);
        }
    }
    Check {
        name: "propagator-dense-vs-expansion",
        deviation: worst,
        tolerance: 1e-9,
    }
}

fn simulation_vs_fixed_point() -> Check {
    // pooled current and interior profile against the exact steady state,
    // in units of the between-trajectory standard error
    let couplings = ChainCouplings::new(0.25, 0.5);
    let mut worst_pull = 0.0f64;
    for n in [4usize, 5] {
        let pots = BathPotentials::symmetric(0.6).unwrap();
        let plan = RunPlan {
            chain: ChainSpec {
                n_sites: n,
                couplings,
                potentials: pots,
                lag: LagDistribution::Constant { mean: 1.0 },
                propagator: PropagatorSettings::default(),
            },
            total_steps: 10_000,
            burn_in_steps: 1_000,
            seed: 4242,
            n_trajectories: 8,
        };
        let est = run_ensemble(&plan).unwrap();
        let op = MasterOperator::build(n, couplings, &pots, 1.0).unwrap();
        let fp = op.fixed_point().unwrap();
        let probs = op.measurement_probs(&fp.rho);
        let j = op.steady_current(&probs).unwrap();
        worst_pull = worst_pull.max((est.current() - j).abs() / est.sigma_j.max(1e-12));
        let exact = interior_profile(&fp.rho, n);
        for (i, &e) in exact.iter().enumerate() {
            // conservative per-site scale for profile noise
            worst_pull = worst_pull.max((est.profile[i + 1] - e).abs() / 0.01);
        }
    }
    Check {
        name: "simulation-vs-fixed-point",
        deviation: worst_pull,
        tolerance: 4.0,
    }
}

fn small_lag_oracles() -> Check {
    // fitted linear coefficient of the exact current versus the closed
    // form (relative), and the interior gradient likewise
    let grid = [0.005, 0.01, 0.015, 0.02, 0.025, 0.03];
    let pots = BathPotentials::symmetric(0.6).unwrap();
    let couplings = ChainCouplings::from_delta(1.0, 2.0);
    let fit = small_tau_current_fit(couplings, &pots, &grid).unwrap();
    let analytic =
        xxz_ness::master::analytic_current_n4(1.0, 2.0, pots.mu_left, pots.mu_right, 1.0);
    let mut worst = ((fit.c2 - analytic) / analytic).abs() / 0.01;

    let op = MasterOperator::build(4, couplings, &pots, 0.01).unwrap();
    let fp = op.fixed_point().unwrap();
    let profile = interior_profile(&fp.rho, 4);
    let grad = profile[1] - profile[0];
    let grad_exact = analytic_gradient_n4(2.0, pots.mu_left, pots.mu_right);
    worst = worst.max(((grad - grad_exact) / grad_exact).abs() / 0.02);
    Check {
        name: "small-lag-closed-forms",
        deviation: worst,
        tolerance: 1.0,
    }
}

/// Run every check; returns true when all pass.
pub fn run() -> bool {
    let checks = [
        gamma_bijection(),
        hamiltonian_structure(),
        propagator_identity(),
        propagator_methods_agree(),
        simulation_vs_fixed_point(),
        small_lag_oracles(),
    ];
    let mut all = true;
    for c in &checks {
        println!(
            "check {}: deviation {:.3e} (tolerance {:.3e}) {}",
            c.name,
            c.deviation,
            c.tolerance,
            if c.passed() { "PASS" } else { "FAIL" }
        );
        all &= c.passed();
    }
    all
}
