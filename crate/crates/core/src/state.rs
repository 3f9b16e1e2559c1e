//! Pure-state storage and the stochastic bath-interaction step.
//!
//! A [`PureState`] is a dense complex amplitude vector over the `2^N` qubit
//! basis. The bath interaction is a projective measurement of the two border
//! spins followed by conditional spin flips that refresh their occupation to
//! the bath chemical potentials.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::basis;
use crate::error::{Error, Result};

/// Branches with weight below this are never selected by cumulative
/// sampling; collapsing onto one would divide by a vanishing norm.
pub const DEGENERATE_BRANCH_EPS: f64 = 1e-14;

/// Chemical potentials of the left and right bath.
///
/// `mu` is the probability that the corresponding border spin points up
/// after a bath interaction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathPotentials {
    pub mu_left: f64,
    pub mu_right: f64,
}

impl BathPotentials {
    pub fn new(mu_left: f64, mu_right: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mu_left) || !(0.0..=1.0).contains(&mu_right) {
            return Err(Error::InvalidConfig(format!(
                "chemical potentials must lie in [0,1], got ({mu_left}, {mu_right})"
            )));
        }
        Ok(Self { mu_left, mu_right })
    }

    /// Symmetric driving `mu_L = (1-mu)/2`, `mu_R = (1+mu)/2`.
    pub fn symmetric(mu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::InvalidConfig(format!(
                "field strength must lie in [0,1], got {mu}"
            )));
        }
        Ok(Self {
            mu_left: (1.0 - mu) / 2.0,
            mu_right: (1.0 + mu) / 2.0,
        })
    }

    /// Field strength `mu_R - mu_L`.
    pub fn drive(&self) -> f64 {
        self.mu_right - self.mu_left
    }
}

/// What a conditional flip did to one border spin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Flip {
    /// Spin already matched the bath draw.
    None,
    /// Flipped 0 -> 1 (a qubit was inserted from the bath).
    Up,
    /// Flipped 1 -> 0 (a qubit was removed into the bath).
    Down,
}

/// One record of the per-step bath-event log.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BathEvent {
    /// Measured border outcome.
    pub border: u8,
    pub flip_left: Flip,
    pub flip_right: Flip,
    /// Time lag preceding this measurement.
    pub lag: f64,
}

/// Dense pure state over the `2^N` qubit basis.
#[derive(Debug, Clone)]
pub struct PureState {
    amps: Vec<Complex64>,
    n_sites: usize,
}

impl PureState {
    /// Basis state `|c>`.
    pub fn basis_state(n_sites: usize, c: usize) -> Result<Self> {
        let d = basis::dim(n_sites);
        if c >= d {
            return Err(Error::IndexOutOfRange { index: c, dim: d });
        }
        let mut amps = vec![Complex64::ZERO; d];
        amps[c] = Complex64::ONE;
        Ok(Self { amps, n_sites })
    }

    /// Build from raw amplitudes; the vector length must be `2^n_sites`.
    pub fn from_amplitudes(n_sites: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != basis::dim(n_sites) {
            return Err(Error::DimensionMismatch {
                len: amps.len(),
                n_sites,
            });
        }
        Ok(Self { amps, n_sites })
    }

    /// Random state with independent complex Gaussian amplitudes,
    /// normalized. The initial-state law of the Monte-Carlo runs.
    pub fn random_gaussian<R: Rng>(n_sites: usize, rng: &mut R) -> Self {
        let d = basis::dim(n_sites);
        let mut amps = Vec::with_capacity(d);
        for _ in 0..d {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            amps.push(Complex64::new(re, im));
        }
        let mut state = Self { amps, n_sites };
        state.renormalize();
        state
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn renormalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            let inv = 1.0 / n;
            for a in &mut self.amps {
                *a *= inv;
            }
        }
    }

    /// Apply `sigma^x` on a 1-based site: permutes amplitudes by flipping
    /// the site's bit. Involution, norm preserving.
    pub fn apply_sigma_x(&mut self, site: usize) -> Result<()> {
        if site == 0 || site > self.n_sites {
            return Err(Error::SiteOutOfRange {
                site,
                n_sites: self.n_sites,
            });
        }
        let mask = 1usize << (site - 1);
        for c in 0..self.amps.len() {
            if c & mask == 0 {
                self.amps.swap(c, c | mask);
            }
        }
        Ok(())
    }

    /// Probabilities of the four border-measurement outcomes,
    /// `p_b = sum_a |psi_{gamma(a,b)}|^2`.
    pub fn border_probabilities(&self) -> [f64; 4] {
        let n = self.n_sites;
        let mut p = [0.0; 4];
        for (c, a) in self.amps.iter().enumerate() {
            p[basis::border_of(c, n)] += a.norm_sqr();
        }
        p
    }

    /// Measure the z-components of both border spins and collapse.
    ///
    /// The outcome is sampled against the cumulative distribution of
    /// `(p_0, p_1, p_2, p_3)` in fixed index order using the single uniform
    /// `draw`; ties break toward lower `b`. If the draw lands on a branch of
    /// weight below [`DEGENERATE_BRANCH_EPS`] the outcome falls back to the
    /// largest branch. Returns `(b, p_b)`; the state is left normalized with
    /// support only on border index `b`.
    pub fn measure_border(&mut self, draw: f64) -> (usize, f64) {
        let p = self.border_probabilities();
        let mut b = 3;
        let mut cum = 0.0;
        for (i, &pi) in p.iter().enumerate() {
            cum += pi;
            if draw < cum {
                b = i;
                break;
            }
        }
        if p[b] < DEGENERATE_BRANCH_EPS {
            // degenerate-branch guard: deterministically take the largest
            b = (0..4).max_by(|&i, &j| p[i].total_cmp(&p[j])).unwrap();
        }
        self.collapse_border(b, p[b]);
        (b, p[b])
    }

    fn collapse_border(&mut self, b: usize, p_b: f64) {
        let n = self.n_sites;
        let inv = 1.0 / p_b.sqrt();
        for c in 0..self.amps.len() {
            if basis::border_of(c, n) == b {
                self.amps[c] *= inv;
            } else {
                self.amps[c] = Complex64::ZERO;
            }
        }
    }

    /// Conditional spin flips refreshing the border occupation to the bath
    /// potentials: after the flips the left (right) spin points up with
    /// probability exactly `mu_L` (`mu_R`) over the `zeta` draws.
    ///
    /// `b` must be the definite border index of the post-measurement state.
    pub fn conditional_flip(
        &mut self,
        b: usize,
        zeta_left: f64,
        zeta_right: f64,
        pots: &BathPotentials,
    ) -> Result<(Flip, Flip)> {
        let b1 = b & 1;
        let b2 = (b >> 1) & 1;
        let flip_left = flip_wanted(b1, zeta_left, pots.mu_left);
        let flip_right = flip_wanted(b2, zeta_right, pots.mu_right);
        if flip_left != Flip::None {
            self.apply_sigma_x(1)?;
        }
        if flip_right != Flip::None {
            self.apply_sigma_x(self.n_sites)?;
        }
        Ok((flip_left, flip_right))
    }

    /// Expectation value of `sigma^z` on a 1-based site.
    pub fn sigma_z(&self, site: usize) -> Result<f64> {
        if site == 0 || site > self.n_sites {
            return Err(Error::SiteOutOfRange {
                site,
                n_sites: self.n_sites,
            });
        }
        let mask = 1usize << (site - 1);
        let mut v = 0.0;
        for (c, a) in self.amps.iter().enumerate() {
            let w = a.norm_sqr();
            v += if c & mask != 0 { w } else { -w };
        }
        Ok(v)
    }

    /// `<sigma^z_n>` for all sites `n = 1..=N`.
    pub fn sigma_z_profile(&self) -> Vec<f64> {
        let n = self.n_sites;
        let mut out = vec![0.0; n];
        for (c, a) in self.amps.iter().enumerate() {
            let w = a.norm_sqr();
            for (site, o) in out.iter_mut().enumerate() {
                *o += if c & (1 << site) != 0 { w } else { -w };
            }
        }
        out
    }

    /// Total magnetization `<M> = sum_c |psi_c|^2 sum_n (2 c_n - 1)`.
    pub fn total_magnetization(&self) -> f64 {
        let n = self.n_sites;
        self.amps
            .iter()
            .enumerate()
            .map(|(c, a)| a.norm_sqr() * basis::magnetization_of(c, n) as f64)
            .sum()
    }
}

fn flip_wanted(bit: usize, zeta: f64, mu: f64) -> Flip {
    // zeta < mu forces the spin up, otherwise down
    let want_up = zeta < mu;
    match (bit, want_up) {
        (0, true) => Flip::Up,
        (1, false) => Flip::Down,
        _ => Flip::None,
    }
}
