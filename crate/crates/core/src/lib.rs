//! Nonequilibrium steady states of open XXZ spin chains.
//!
//! A finite anisotropic Heisenberg chain is driven by stochastic two-level
//! baths acting on its border spins: the chain evolves unitarily for a lag,
//! the border spins are measured, and each is flipped conditionally so that
//! the bath pins its up-probability. The crate provides
//!
//! - pure-state Monte-Carlo trajectories of that protocol
//!   ([`trajectory`]), and
//! - the exact completely positive master operator whose fixed point is the
//!   steady state ([`master`]),
//!
//! plus the shared basis bookkeeping, sparse Hamiltonian, and polynomial /
//! dense propagators they are built on.

pub mod basis;
pub mod error;
pub mod hamiltonian;
pub mod master;
pub mod propagator;
pub mod state;
pub mod trajectory;

pub use error::{Error, Result};
pub use hamiltonian::{ChainCouplings, SparseHamiltonian};
pub use master::{BorderDensity, FixedPoint, MasterOperator};
pub use propagator::{PropagatorMethod, PropagatorSettings};
pub use state::{BathPotentials, PureState};
pub use trajectory::{ChainSpec, LagDistribution, NessEstimate, RunPlan};
