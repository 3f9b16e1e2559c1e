//! Unitary propagation `U(tau) = exp(-i tau H)` applied to pure states.
//!
//! The default method is a Chebyshev polynomial expansion of the exponential
//! with the spectrum rescaled into `[-1, 1]` using the Gershgorin bounds of
//! the Hamiltonian; coefficients are Bessel functions `J_k(tau * half_width)`
//! and the truncation tail is bounded explicitly, so an expansion that cannot
//! reach the requested tolerance fails loudly. A scaled Taylor series and a
//! dense eigendecomposition (`N <= 8`) serve as cross-check oracles.

use faer::{Mat, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::SparseHamiltonian;
use crate::state::PureState;

/// Largest chain for which dense `2^N x 2^N` matrices are materialized.
pub const MAX_DENSE_SITES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropagatorMethod {
    /// Scaled-and-substepped Taylor series.
    SeriesExpansion,
    /// Chebyshev expansion with Bessel coefficients (default).
    PolynomialExpansion,
    /// Full diagonalization; only for `N <= 8`.
    DenseExponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorSettings {
    pub method: PropagatorMethod,
    /// Target 2-norm truncation error per propagation step.
    pub tolerance: f64,
}

impl Default for PropagatorSettings {
    fn default() -> Self {
        Self {
            method: PropagatorMethod::PolynomialExpansion,
            tolerance: 1e-10,
        }
    }
}

/// Apply `exp(-i tau H)` to `state` in place.
pub fn propagate(
    state: &mut PureState,
    h: &SparseHamiltonian,
    tau: f64,
    settings: &PropagatorSettings,
) -> Result<()> {
    if state.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            len: state.dim(),
            n_sites: h.n_sites(),
        });
    }
    if tau < 0.0 {
        return Err(Error::InvalidConfig(format!("negative time lag {tau}")));
    }
    if tau == 0.0 {
        return Ok(());
    }
    match settings.method {
        PropagatorMethod::PolynomialExpansion => {
            propagate_chebyshev(state, h, tau, settings.tolerance)
        }
        PropagatorMethod::SeriesExpansion => propagate_taylor(state, h, tau, settings.tolerance),
        PropagatorMethod::DenseExponential => {
            let u = dense_propagator(h, tau)?;
            let mut out = vec![Complex64::ZERO; state.dim()];
            let amps = state.amplitudes();
            for i in 0..amps.len() {
                let mut v = Complex64::ZERO;
                for j in 0..amps.len() {
                    v += u[(i, j)] * amps[j];
                }
                out[i] = v;
            }
            state.amplitudes_mut().copy_from_slice(&out);
            Ok(())
        }
    }
}

fn propagate_chebyshev(
    state: &mut PureState,
    h: &SparseHamiltonian,
    tau: f64,
    tol: f64,
) -> Result<()> {
    let (e_min, e_max) = h.spectral_bounds();
    let center = 0.5 * (e_max + e_min);
    let half = 0.5 * (e_max - e_min);
    let phase = Complex64::from_polar(1.0, -tau * center);
    if half < 1e-14 {
        // H is (numerically) a multiple of the identity
        for a in state.amplitudes_mut() {
            *a *= phase;
        }
        return Ok(());
    }
    let z = tau * half;
    let (bessel, n_terms) = chebyshev_order(z, tol)?;
    let inv_half = 1.0 / half;

    let dim = state.dim();
    let amps = state.amplitudes_mut();
    // three-term recurrence T_{k+1} = 2 Hs T_k - T_{k-1}
    let mut t_prev: Vec<Complex64> = amps.to_vec();
    let mut t_cur = vec![Complex64::ZERO; dim];
    h.apply_scaled(center, inv_half, &t_prev, &mut t_cur);
    let mut t_next = vec![Complex64::ZERO; dim];

    let mut acc: Vec<Complex64> = t_prev.iter().map(|a| bessel[0] * a).collect();
    let mut coeff = Complex64::new(0.0, -2.0); // 2 (-i)^1
    for (x, t) in acc.iter_mut().zip(t_cur.iter()) {
        *x += coeff * bessel[1] * t;
    }
    for k in 2..=n_terms {
        h.apply_scaled(center, inv_half, &t_cur, &mut t_next);
        for i in 0..dim {
            t_next[i] = 2.0 * t_next[i] - t_prev[i];
        }
        std::mem::swap(&mut t_prev, &mut t_cur);
        std::mem::swap(&mut t_cur, &mut t_next);
        coeff *= Complex64::new(0.0, -1.0);
        let c = coeff * bessel[k];
        for (x, t) in acc.iter_mut().zip(t_cur.iter()) {
            *x += c * t;
        }
    }
    for (a, x) in amps.iter_mut().zip(acc.iter()) {
        *a = phase * x;
    }
    Ok(())
}

/// Bessel coefficients and the truncation order needed for `tol`.
///
/// Returns the sequence `J_0..=J_m(z)` and `m`, chosen so that the summed
/// absolute tail of the expansion is below `tol`.
fn chebyshev_order(z: f64, tol: f64) -> Result<(Vec<f64>, usize)> {
    let base = z.ceil() as usize;
    for margin in [80usize, 400] {
        let n_max = base + base / 2 + margin;
        let bessel = bessel_jn_sequence(z, n_max);
        // walk the tail downward until it exceeds tol/2
        let mut tail = 0.0;
        let mut m = n_max;
        while m > 1 {
            tail += 2.0 * bessel[m].abs();
            if tail > tol * 0.5 {
                break;
            }
            m -= 1;
        }
        if m < n_max {
            // m+1 terms were cut while staying below tol
            return Ok((bessel, m.max(2)));
        }
    }
    Err(Error::PropagatorNonConvergence {
        tolerance: tol,
        max_terms: base + base / 2 + 400,
    })
}

/// `J_0(z) ..= J_{n_max}(z)` by Miller's downward recurrence.
pub(crate) fn bessel_jn_sequence(z: f64, n_max: usize) -> Vec<f64> {
    if z == 0.0 {
        let mut out = vec![0.0; n_max + 1];
        out[0] = 1.0;
        return out;
    }
    // start high enough that the unnormalized recurrence has decayed
    let start = n_max + 2 + (15.0 * (n_max as f64 + 1.0).sqrt()) as usize;
    let mut vals = vec![0.0f64; start + 2];
    vals[start] = 1e-300;
    for k in (1..=start).rev() {
        vals[k - 1] = (2.0 * k as f64 / z) * vals[k] - vals[k + 1];
        if vals[k - 1].abs() > 1e250 {
            for v in vals[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    // J_0 + 2 sum_{k even} J_k = 1 fixes the overall scale
    let mut norm = vals[0];
    let mut k = 2;
    while k <= start {
        norm += 2.0 * vals[k];
        k += 2;
    }
    let inv = 1.0 / norm;
    vals.truncate(n_max + 1);
    for v in vals.iter_mut() {
        *v *= inv;
    }
    vals
}

fn propagate_taylor(
    state: &mut PureState,
    h: &SparseHamiltonian,
    tau: f64,
    tol: f64,
) -> Result<()> {
    let (e_min, e_max) = h.spectral_bounds();
    let hnorm = e_min.abs().max(e_max.abs()).max(1e-300);
    let n_sub = (tau * hnorm).ceil().max(1.0) as usize;
    let dt = tau / n_sub as f64;
    let sub_tol = tol / (4.0 * n_sub as f64);
    let max_terms = 300usize;

    let dim = state.dim();
    let mut term = vec![Complex64::ZERO; dim];
    let mut next = vec![Complex64::ZERO; dim];
    for _ in 0..n_sub {
        let amps = state.amplitudes_mut();
        term.copy_from_slice(amps);
        let mut converged = false;
        for k in 1..=max_terms {
            h.apply(&term, &mut next)?;
            let f = Complex64::new(0.0, -dt / k as f64);
            for (t, n) in term.iter_mut().zip(next.iter()) {
                *t = f * n;
            }
            for (a, t) in amps.iter_mut().zip(term.iter()) {
                *a += t;
            }
            let term_norm: f64 = term.iter().map(|t| t.norm_sqr()).sum::<f64>().sqrt();
            if term_norm < sub_tol {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::PropagatorNonConvergence {
                tolerance: tol,
                max_terms,
            });
        }
    }
    Ok(())
}

/// Materialize the unitary `exp(-i tau H)` as a dense matrix via full
/// diagonalization. Refuses chains beyond [`MAX_DENSE_SITES`].
pub fn dense_propagator(h: &SparseHamiltonian, tau: f64) -> Result<Mat<Complex64>> {
    if h.n_sites() > MAX_DENSE_SITES {
        return Err(Error::DenseTooLarge {
            n_sites: h.n_sites(),
            max: MAX_DENSE_SITES,
        });
    }
    let dense = h.to_dense();
    let evd = dense
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("symmetric eigendecomposition: {e:?}")))?;
    let v = evd.U();
    let s = evd.S();
    let d = h.dim();
    let phases: Vec<Complex64> = (0..d)
        .map(|k| Complex64::from_polar(1.0, -tau * s[k]))
        .collect();
    let mut u = Mat::<Complex64>::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            let mut acc = Complex64::ZERO;
            for k in 0..d {
                acc += v[(i, k)] * phases[k] * v[(j, k)];
            }
            u[(i, j)] = acc;
        }
    }
    Ok(u)
}
