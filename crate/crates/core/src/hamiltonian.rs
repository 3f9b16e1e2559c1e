//! XXZ Hamiltonian with open boundaries and its sparse application.
//!
//! `H = sum_{n=1}^{N-1} [ J_x (sx_n sx_{n+1} + sy_n sy_{n+1}) + J_z sz_n sz_{n+1} ]`.
//!
//! In the qubit basis the Ising part is diagonal and the XY part swaps
//! adjacent opposite bits with matrix element `2 J_x` (from
//! `sx sx + sy sy = 2 (s+ s- + s- s+)`); the factor of 2 is deliberate and
//! easy to drop by accident.

use faer::Mat;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis;
use crate::error::{Error, Result};
use crate::state::PureState;

/// Exchange couplings of the chain; the anisotropy is `Delta = J_z / J_x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainCouplings {
    pub j_x: f64,
    pub j_z: f64,
}

impl ChainCouplings {
    pub fn new(j_x: f64, j_z: f64) -> Self {
        Self { j_x, j_z }
    }

    /// Couplings from anisotropy at given `J_x`.
    pub fn from_delta(j_x: f64, delta: f64) -> Self {
        Self {
            j_x,
            j_z: delta * j_x,
        }
    }

    /// Anisotropy `Delta = J_z / J_x`; requires `J_x != 0`.
    pub fn delta(&self) -> Result<f64> {
        if self.j_x == 0.0 {
            return Err(Error::InvalidConfig(
                "anisotropy undefined for J_x = 0".into(),
            ));
        }
        Ok(self.j_z / self.j_x)
    }
}

/// Assembled XXZ Hamiltonian on `N` sites.
///
/// Stored as the diagonal (Ising) part plus the implicit hopping structure;
/// the hopping entries are generated from bit arithmetic on the fly.
#[derive(Debug, Clone)]
pub struct SparseHamiltonian {
    n_sites: usize,
    dim: usize,
    couplings: ChainCouplings,
    diag: Vec<f64>,
    /// Gershgorin bounds on the spectrum, computed per row at build time.
    e_min: f64,
    e_max: f64,
}

impl SparseHamiltonian {
    /// Build the Hamiltonian for `N >= 2` sites with open boundaries.
    pub fn build(n_sites: usize, couplings: ChainCouplings) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::InvalidConfig(format!(
                "chain needs at least 2 sites, got {n_sites}"
            )));
        }
        let dim = basis::dim(n_sites);
        let hop = 2.0 * couplings.j_x.abs();
        let mut diag = vec![0.0; dim];
        let mut e_min = f64::INFINITY;
        let mut e_max = f64::NEG_INFINITY;
        for (c, d) in diag.iter_mut().enumerate() {
            let mut ising = 0.0;
            let mut hops = 0usize;
            for n in 0..n_sites - 1 {
                let z1 = ((c >> n) & 1) as i32 * 2 - 1;
                let z2 = ((c >> (n + 1)) & 1) as i32 * 2 - 1;
                ising += couplings.j_z * (z1 * z2) as f64;
                if z1 != z2 {
                    hops += 1;
                }
            }
            *d = ising;
            let radius = hop * hops as f64;
            e_min = e_min.min(ising - radius);
            e_max = e_max.max(ising + radius);
        }
        Ok(Self {
            n_sites,
            dim,
            couplings,
            diag,
            e_min,
            e_max,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn couplings(&self) -> ChainCouplings {
        self.couplings
    }

    /// Gershgorin containment interval for the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        (self.e_min, self.e_max)
    }

    /// `out = H . input`. Exact sparse matrix-vector product.
    pub fn apply(&self, input: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        if input.len() != self.dim || out.len() != self.dim {
            return Err(Error::DimensionMismatch {
                len: input.len().max(out.len()),
                n_sites: self.n_sites,
            });
        }
        for c in 0..self.dim {
            out[c] = self.diag[c] * input[c];
        }
        let w = 2.0 * self.couplings.j_x;
        for n in 0..self.n_sites - 1 {
            let mask = 3usize << n;
            for c in 0..self.dim {
                let bits = (c >> n) & 3;
                if bits == 1 || bits == 2 {
                    out[c] += w * input[c ^ mask];
                }
            }
        }
        Ok(())
    }

    /// `out = ((H - center) / half_width) . input`; the scaled application
    /// used by the polynomial propagator.
    pub(crate) fn apply_scaled(
        &self,
        center: f64,
        inv_half_width: f64,
        input: &[Complex64],
        out: &mut [Complex64],
    ) {
        for c in 0..self.dim {
            out[c] = ((self.diag[c] - center) * inv_half_width) * input[c];
        }
        let w = 2.0 * self.couplings.j_x * inv_half_width;
        for n in 0..self.n_sites - 1 {
            let mask = 3usize << n;
            for c in 0..self.dim {
                let bits = (c >> n) & 3;
                if bits == 1 || bits == 2 {
                    out[c] += w * input[c ^ mask];
                }
            }
        }
    }

    /// Convenience wrapper over [`Self::apply`] for pure states; the result
    /// is in general unnormalized.
    pub fn apply_state(&self, state: &PureState) -> Result<PureState> {
        let mut out = vec![Complex64::ZERO; self.dim];
        self.apply(state.amplitudes(), &mut out)?;
        PureState::from_amplitudes(self.n_sites, out)
    }

    /// Materialize as a dense real symmetric matrix (tests and the dense
    /// propagator oracle).
    pub fn to_dense(&self) -> Mat<f64> {
        let w = 2.0 * self.couplings.j_x;
        let mut m = Mat::zeros(self.dim, self.dim);
        for c in 0..self.dim {
            m[(c, c)] = self.diag[c];
            for n in 0..self.n_sites - 1 {
                let bits = (c >> n) & 3;
                if bits == 1 || bits == 2 {
                    m[(c, c ^ (3usize << n))] = w;
                }
            }
        }
        m
    }
}
