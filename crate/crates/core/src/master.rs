//! Exact NESS via the completely positive master operator.
//!
//! One bath cycle maps the interior density matrix as
//! `L rho = sum_b Pb^+ U (rho (x) omega) U^+ Pb`, with `Pb` the lift
//! attaching border state `|b>` and `omega` the bath-controlled border
//! density. The NESS is the eigenvalue-1 fixed point; measurement
//! probabilities and the steady current follow from it. The closed-form
//! small-tau results for `N = 4` live here as analytic oracles.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use num_complex::Complex64;

use crate::basis::{self, gamma_unchecked};
use crate::error::{Error, Result};
use crate::hamiltonian::{ChainCouplings, SparseHamiltonian};
use crate::propagator::{dense_propagator, MAX_DENSE_SITES};
use crate::state::BathPotentials;

/// Largest chain whose master matrix is eigensolved densely; beyond this
/// the fixed point comes from power iteration on the map.
pub const MAX_EIGENSOLVE_SITES: usize = 6;

/// Second-eigenvalue modulus above which the NESS is reported degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Diagonal border density `omega_b` controlled by the baths.
///
/// Probability convention: the border spin points up with probability `mu`,
/// exactly what the conditional-flip procedure enforces, so
/// `omega_b = w_L(b_1) w_R(b_2)` with `w(1) = mu`, `w(0) = 1 - mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BorderDensity {
    pub omega: [f64; 4],
}

impl BorderDensity {
    pub fn from_potentials(pots: &BathPotentials) -> Self {
        let w_l = [1.0 - pots.mu_left, pots.mu_left];
        let w_r = [1.0 - pots.mu_right, pots.mu_right];
        let mut omega = [0.0; 4];
        for (b, o) in omega.iter_mut().enumerate() {
            *o = w_l[b & 1] * w_r[b >> 1];
        }
        Self { omega }
    }
}

/// The master operator for one chain configuration, held as the dense
/// unitary of one propagation interval plus the border density.
pub struct MasterOperator {
    n_sites: usize,
    interior_dim: usize,
    unitary: Mat<Complex64>,
    omega: BorderDensity,
    tau: f64,
}

/// Result of the fixed-point solve.
pub struct FixedPoint {
    /// NESS interior density matrix: trace 1, Hermitian, positive.
    pub rho: Mat<Complex64>,
    /// Relaxation gap `1 - |lambda_2|`.
    pub gap: f64,
}

impl MasterOperator {
    /// Build from a chain configuration; materializes `U(tau) = exp(-i tau H)`
    /// densely, so `N <= 8`.
    pub fn build(
        n_sites: usize,
        couplings: ChainCouplings,
        pots: &BathPotentials,
        tau: f64,
    ) -> Result<Self> {
        let h = SparseHamiltonian::build(n_sites, couplings)?;
        let u = dense_propagator(&h, tau)?;
        Self::from_unitary(n_sites, u, BorderDensity::from_potentials(pots), tau)
    }

    /// Build from an arbitrary magnetization-conserving unitary (the
    /// propagator is pluggable; kicked dynamics fits through here).
    pub fn from_unitary(
        n_sites: usize,
        unitary: Mat<Complex64>,
        omega: BorderDensity,
        tau: f64,
    ) -> Result<Self> {
        if n_sites > MAX_DENSE_SITES {
            return Err(Error::DenseTooLarge {
                n_sites,
                max: MAX_DENSE_SITES,
            });
        }
        let dim = basis::dim(n_sites);
        if unitary.nrows() != dim || unitary.ncols() != dim {
            return Err(Error::DimensionMismatch {
                len: unitary.nrows(),
                n_sites,
            });
        }
        Ok(Self {
            n_sites,
            interior_dim: basis::interior_dim(n_sites),
            unitary,
            omega,
            tau,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn interior_dim(&self) -> usize {
        self.interior_dim
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn omega(&self) -> &BorderDensity {
        &self.omega
    }

    /// `U (rho (x) omega) U^+` on the full space.
    fn sandwich(&self, rho: &Mat<Complex64>) -> Mat<Complex64> {
        let n = self.n_sites;
        let d_in = self.interior_dim;
        let dim = basis::dim(n);
        let mut full = Mat::<Complex64>::zeros(dim, dim);
        for a_row in 0..d_in {
            for a_col in 0..d_in {
                let r = rho[(a_row, a_col)];
                if r != Complex64::ZERO {
                    for (b, &w) in self.omega.omega.iter().enumerate() {
                        full[(gamma_unchecked(a_row, b, n), gamma_unchecked(a_col, b, n))] =
                            r * w;
                    }
                }
            }
        }
        &self.unitary * full * self.unitary.adjoint()
    }

    /// Apply the map: `L rho`.
    pub fn apply(&self, rho: &Mat<Complex64>) -> Mat<Complex64> {
        let evolved = self.sandwich(rho);
        let n = self.n_sites;
        let d_in = self.interior_dim;
        let mut out = Mat::<Complex64>::zeros(d_in, d_in);
        for a_row in 0..d_in {
            for a_col in 0..d_in {
                let mut acc = Complex64::ZERO;
                for b in 0..4 {
                    acc += evolved[(gamma_unchecked(a_row, b, n), gamma_unchecked(a_col, b, n))];
                }
                out[(a_row, a_col)] = acc;
            }
        }
        out
    }

    /// Matrix of the map over the basis of matrix units `E_ij`, column-major
    /// vectorization (vec index `i + d j`). Dimension `4^(N-2)`.
    pub fn materialize(&self) -> Mat<Complex64> {
        let d = self.interior_dim;
        let d2 = d * d;
        let mut m = Mat::<Complex64>::zeros(d2, d2);
        let mut unit = Mat::<Complex64>::zeros(d, d);
        for j in 0..d {
            for i in 0..d {
                unit[(i, j)] = Complex64::ONE;
                let img = self.apply(&unit);
                unit[(i, j)] = Complex64::ZERO;
                let col = i + d * j;
                for jj in 0..d {
                    for ii in 0..d {
                        m[(ii + d * jj, col)] = img[(ii, jj)];
                    }
                }
            }
        }
        m
    }

    /// Probabilities of the four border-measurement outcomes in the state
    /// `rho` (Eq.-(4) form): diagonal of the evolved full density per border.
    pub fn measurement_probs(&self, rho: &Mat<Complex64>) -> [f64; 4] {
        let evolved = self.sandwich(rho);
        let n = self.n_sites;
        let mut p = [0.0; 4];
        for (b, pb) in p.iter_mut().enumerate() {
            for a in 0..self.interior_dim {
                let c = gamma_unchecked(a, b, n);
                *pb += evolved[(c, c)].re;
            }
        }
        p
    }

    /// Steady current from measurement probabilities; evaluates both the
    /// left-bath and right-bath forms and insists they agree (they are equal
    /// by magnetization conservation; a mismatch means a broken `[U,M] = 0`
    /// upstream).
    pub fn steady_current(&self, probs: &[f64; 4]) -> Result<f64> {
        let (left, right) = self.current_forms(probs);
        if (left - right).abs() > 1e-9 {
            return Err(Error::CurrentImbalance { left, right });
        }
        Ok(left)
    }

    /// Left-bath and right-bath balances of measured versus refreshed border
    /// occupations, oriented so that the standard drive (right bath inserting
    /// up spins) gives a positive current: at the left bath the net rate of
    /// up removals, at the right bath the net rate of up insertions.
    pub fn current_forms(&self, probs: &[f64; 4]) -> (f64, f64) {
        let w = &self.omega.omega;
        let left = (w[0] + w[2] - probs[0] - probs[2]) / self.tau;
        let right = (probs[0] + probs[1] - w[0] - w[1]) / self.tau;
        (left, right)
    }

    /// Solve for the NESS. Dense non-symmetric eigensolve for
    /// `N <=` [`MAX_EIGENSOLVE_SITES`], power iteration with trace
    /// renormalization above. A degenerate leading eigenvalue is an error,
    /// never a silent pick.
    pub fn fixed_point(&self) -> Result<FixedPoint> {
        if self.n_sites <= MAX_EIGENSOLVE_SITES {
            self.fixed_point_dense()
        } else {
            self.fixed_point_power()
        }
    }

    fn fixed_point_dense(&self) -> Result<FixedPoint> {
        let d = self.interior_dim;
        let m = self.materialize();
        let evd = m
            .eigen()
            .map_err(|e| Error::LinearAlgebra(format!("master eigensolve: {e:?}")))?;
        let vals = evd.S();
        let vecs = evd.U();
        let d2 = d * d;
        let mut order: Vec<usize> = (0..d2).collect();
        order.sort_by(|&i, &j| vals[j].norm().total_cmp(&vals[i].norm()));
        let leading = order[0];
        let second_modulus = vals[order[1]].norm();
        if second_modulus >= 1.0 - DEGENERACY_TOL {
            return Err(Error::DegenerateNess { second_modulus });
        }
        let lambda1 = vals[leading];
        if (lambda1.norm() - 1.0).abs() > 1e-8 {
            return Err(Error::LinearAlgebra(format!(
                "leading master eigenvalue has modulus {} (expected 1)",
                lambda1.norm()
            )));
        }
        let mut rho = Mat::<Complex64>::zeros(d, d);
        for j in 0..d {
            for i in 0..d {
                rho[(i, j)] = vecs[(i + d * j, leading)];
            }
        }
        normalize_density(&mut rho)?;
        Ok(FixedPoint {
            rho,
            gap: 1.0 - second_modulus,
        })
    }

    fn fixed_point_power(&self) -> Result<FixedPoint> {
        let d = self.interior_dim;
        let max_iter = 20_000usize;
        let tol = 1e-12;
        let mut rho = Mat::<Complex64>::zeros(d, d);
        for i in 0..d {
            rho[(i, i)] = Complex64::new(1.0 / d as f64, 0.0);
        }
        let mut converged_at = None;
        for it in 0..max_iter {
            let mut next = self.apply(&rho);
            // trace renormalization guards against drift
            let tr: Complex64 = (0..d).map(|i| next[(i, i)]).sum();
            let inv = 1.0 / tr.re;
            for j in 0..d {
                for i in 0..d {
                    next[(i, j)] *= inv;
                }
            }
            let delta = frobenius_distance(&next, &rho);
            rho = next;
            if delta < tol {
                converged_at = Some(it);
                break;
            }
        }
        if converged_at.is_none() {
            return Err(Error::FixedPointNonConvergence {
                iterations: max_iter,
            });
        }
        normalize_density(&mut rho)?;
        let gap = self.estimate_gap(&rho)?;
        if gap < DEGENERACY_TOL {
            return Err(Error::DegenerateNess {
                second_modulus: 1.0 - gap,
            });
        }
        Ok(FixedPoint { rho, gap })
    }

    /// `|lambda_2|` estimate by iterating a traceless deviation; the decay
    /// rate of its norm converges to the subleading modulus.
    fn estimate_gap(&self, rho_inf: &Mat<Complex64>) -> Result<f64> {
        let d = self.interior_dim;
        let mut y = Mat::<Complex64>::zeros(d, d);
        // deterministic traceless Hermitian seed
        for i in 0..d {
            let v = if i % 2 == 0 { 1.0 } else { -1.0 };
            y[(i, i)] = Complex64::new(v, 0.0);
        }
        if d % 2 == 1 {
            y[(d - 1, d - 1)] = Complex64::ZERO;
        }
        y[(0, 1)] = Complex64::new(0.3, 0.1);
        y[(1, 0)] = Complex64::new(0.3, -0.1);
        let mut norm = frobenius_norm(&y);
        let warmup = 60usize;
        let window = 40usize;
        let mut ratio_product = 1.0f64;
        for it in 0..warmup + window {
            let next = self.apply(&y);
            let next_norm = frobenius_norm(&next);
            if next_norm < 1e-280 {
                // relaxation faster than resolvable
                return Ok(1.0);
            }
            if it >= warmup {
                ratio_product *= next_norm / norm;
            }
            // rescale to keep magnitudes sane
            let inv = 1.0 / next_norm;
            y = Mat::from_fn(d, d, |i, j| next[(i, j)] * inv);
            norm = 1.0;
        }
        let _ = rho_inf;
        let second = ratio_product.powf(1.0 / window as f64);
        Ok(1.0 - second.min(1.0))
    }
}

fn frobenius_norm(m: &Mat<Complex64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

fn frobenius_distance(a: &Mat<Complex64>, b: &Mat<Complex64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += (a[(i, j)] - b[(i, j)]).norm_sqr();
        }
    }
    s.sqrt()
}

/// Trace distance `(1/2) ||a - b||_1` between Hermitian matrices.
pub fn trace_distance(a: &Mat<Complex64>, b: &Mat<Complex64>) -> Result<f64> {
    let d = a.nrows();
    let diff = Mat::<Complex64>::from_fn(d, d, |i, j| a[(i, j)] - b[(i, j)]);
    let evd = diff
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::LinearAlgebra(format!("trace distance eigensolve: {e:?}")))?;
    Ok(0.5 * (0..d).map(|k| evd.S()[k].re.abs()).sum::<f64>())
}

/// Scale to unit trace and hermitize; rejects a numerically vanishing trace.
fn normalize_density(rho: &mut Mat<Complex64>) -> Result<()> {
    let d = rho.nrows();
    let tr: Complex64 = (0..d).map(|i| rho[(i, i)]).sum();
    if tr.norm() < 1e-14 {
        return Err(Error::LinearAlgebra(
            "candidate NESS has vanishing trace".into(),
        ));
    }
    for j in 0..d {
        for i in 0..d {
            rho[(i, j)] /= tr;
        }
    }
    for j in 0..d {
        for i in 0..=j {
            let sym = 0.5 * (rho[(i, j)] + rho[(j, i)].conj());
            rho[(i, j)] = sym;
            rho[(j, i)] = sym.conj();
        }
    }
    Ok(())
}

/// Interior spin-density profile `<sigma^z_n>` for `n = 2..=N-1` from an
/// interior density matrix.
pub fn interior_profile(rho: &Mat<Complex64>, n_sites: usize) -> Vec<f64> {
    let d_in = basis::interior_dim(n_sites);
    debug_assert_eq!(rho.nrows(), d_in);
    (0..n_sites - 2)
        .map(|bit| {
            (0..d_in)
                .map(|a| {
                    let z = ((a >> bit) & 1) as f64 * 2.0 - 1.0;
                    z * rho[(a, a)].re
                })
                .sum()
        })
        .collect()
}

/// Closed-form `N = 4` steady current to leading order in `tau` (exact
/// coefficient, correction `O(tau^3)`).
pub fn analytic_current_n4(j_x: f64, delta: f64, mu_left: f64, mu_right: f64, tau: f64) -> f64 {
    let s = mu_left + mu_right;
    let q = mu_left * mu_left + mu_right * mu_right;
    let d2 = delta * delta;
    2.0 * tau * j_x * j_x * (mu_right - mu_left) * (1.0 + 2.0 * (s - q) * d2)
        / (1.0 + s * (2.0 - s) * d2)
}

/// Closed-form `N = 4` interior magnetization gradient
/// `tr[(sz_3 - sz_2) rho_inf]` in the small-tau limit.
pub fn analytic_gradient_n4(delta: f64, mu_left: f64, mu_right: f64) -> f64 {
    let s = mu_left + mu_right;
    let d2 = delta * delta;
    let drive = mu_right - mu_left;
    2.0 * drive.powi(3) * d2 / (1.0 + s * (2.0 - s) * d2)
}

/// Location of the current maximum under symmetric driving, from direct
/// calculus on the closed form: `mu* = sqrt((1 + Delta^2) / (3 Delta^2))`,
/// clamped to the physical range.
pub fn analytic_current_max_location(delta: f64) -> f64 {
    let d2 = delta * delta;
    if d2 <= 0.5 {
        // derivative positive on all of [0, 1]
        return 1.0;
    }
    ((1.0 + d2) / (3.0 * d2)).sqrt().min(1.0)
}

/// Small-tau polynomial fit of the numeric `N = 4` fixed-point current.
#[derive(Debug, Clone)]
pub struct SmallTauFit {
    /// Fitted `tau^0` intercept of `j`; the quantum Zeno effect demands it
    /// vanishes within the fit error.
    pub intercept: f64,
    /// Standard error of the intercept.
    pub intercept_se: f64,
    /// Coefficient of `tau`; comparable with the closed-form coefficient.
    pub c2: f64,
    /// Coefficient of `tau^2`.
    pub c3: f64,
    pub residual_rms: f64,
}

/// Fit `j(tau) = intercept + c2 tau + c3 tau^2 + c4 tau^3` through numeric
/// fixed-point currents on a tau grid (`N = 4`). The cubic term is kept so
/// the leading correction to `j = c2 tau` (which enters at `tau^3`) does not
/// bias the intercept or `c2`.
pub fn small_tau_current_fit(
    couplings: ChainCouplings,
    pots: &BathPotentials,
    tau_grid: &[f64],
) -> Result<SmallTauFit> {
    if tau_grid.len() < 5 {
        return Err(Error::InvalidConfig(
            "small-tau fit needs at least 5 grid points".into(),
        ));
    }
    let mut currents = Vec::with_capacity(tau_grid.len());
    for &tau in tau_grid {
        let op = MasterOperator::build(4, couplings, pots, tau)?;
        let fp = op.fixed_point()?;
        let probs = op.measurement_probs(&fp.rho);
        currents.push(op.steady_current(&probs)?);
    }
    let fit = cubic_fit(tau_grid, &currents)?;
    let scale = currents.iter().fold(0.0f64, |m, j| m.max(j.abs()));
    let tau_max = tau_grid.iter().fold(0.0f64, |m, &t| m.max(t));
    // the cubic truncates an O(tau^4) tail
    let tol = 10.0 * scale * tau_max.powi(3) + 1e-12;
    if fit.residual_rms > tol {
        return Err(Error::FitResidual {
            residual: fit.residual_rms,
            tolerance: tol,
        });
    }
    Ok(fit)
}

/// Least-squares cubic through `(x_i, y_i)` with intercept standard error
/// from the residual variance. Fitted in the rescaled variable `x / x_max`
/// to keep the normal equations well conditioned.
fn cubic_fit(xs: &[f64], ys: &[f64]) -> Result<SmallTauFit> {
    let n = xs.len();
    let x_max = xs.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    if x_max == 0.0 {
        return Err(Error::LinearAlgebra("degenerate fit abscissae".into()));
    }
    let mut a = Mat::<f64>::zeros(4, 4);
    let mut b = Mat::<f64>::zeros(4, 2);
    for (&x, &y) in xs.iter().zip(ys) {
        let u = x / x_max;
        let row = [1.0, u, u * u, u * u * u];
        for i in 0..4 {
            for j in 0..4 {
                a[(i, j)] += row[i] * row[j];
            }
            b[(i, 0)] += row[i] * y;
        }
    }
    // second right-hand side picks out the (0,0) entry of (X^T X)^-1 for
    // the intercept variance
    b[(0, 1)] = 1.0;
    let sol = a.partial_piv_lu().solve(&b);
    let coef: Vec<f64> = (0..4).map(|i| sol[(i, 0)] / x_max.powi(i as i32)).collect();
    let inv00 = sol[(0, 1)];
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            (y - coef[0] - coef[1] * x - coef[2] * x * x - coef[3] * x * x * x).powi(2)
        })
        .sum();
    let dof = (n as f64 - 4.0).max(1.0);
    let sigma2 = rss / dof;
    Ok(SmallTauFit {
        intercept: coef[0],
        intercept_se: (sigma2 * inv00.max(0.0)).sqrt(),
        c2: coef[1],
        c3: coef[2],
        residual_rms: (rss / n as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_density(d: usize, seed: u64) -> Mat<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = Mat::<Complex64>::from_fn(d, d, |_, _| {
            Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
        });
        let mut rho = &g * g.adjoint();
        let tr: Complex64 = (0..d).map(|i| rho[(i, i)]).sum();
        for j in 0..d {
            for i in 0..d {
                rho[(i, j)] /= tr;
            }
        }
        rho
    }

    fn identity_unitary(dim: usize) -> Mat<Complex64> {
        Mat::from_fn(dim, dim, |i, j| {
            if i == j {
                Complex64::ONE
            } else {
                Complex64::ZERO
            }
        })
    }

    #[test]
    fn border_density_examples() {
        let unbiased = BorderDensity::from_potentials(&BathPotentials::new(0.5, 0.5).unwrap());
        for w in unbiased.omega {
            assert!((w - 0.25).abs() < 1e-15);
        }
        let pinned = BorderDensity::from_potentials(&BathPotentials::new(0.0, 1.0).unwrap());
        assert_eq!(pinned.omega, [0.0, 0.0, 1.0, 0.0]);
        // marginals factorize
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let pots = BathPotentials::new(rng.gen(), rng.gen()).unwrap();
            let w = BorderDensity::from_potentials(&pots).omega;
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!((w[1] + w[3] - pots.mu_left).abs() < 1e-12);
            assert!((w[2] + w[3] - pots.mu_right).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_unitary_gives_identity_map() {
        let n = 4;
        let op = MasterOperator::from_unitary(
            n,
            identity_unitary(basis::dim(n)),
            BorderDensity::from_potentials(&BathPotentials::new(0.3, 0.8).unwrap()),
            1.0,
        )
        .unwrap();
        let rho = random_density(4, 1);
        let out = op.apply(&rho);
        for j in 0..4 {
            for i in 0..4 {
                assert!((out[(i, j)] - rho[(i, j)]).norm() < 1e-12);
            }
        }
        // p = omega when U = 1
        let p = op.measurement_probs(&rho);
        for (pb, w) in p.iter().zip(op.omega().omega) {
            assert!((pb - w).abs() < 1e-12);
        }
        assert!(op.steady_current(&p).unwrap().abs() < 1e-12);
    }

    #[test]
    fn small_tau_probs_approach_omega() {
        let pots = BathPotentials::symmetric(0.6).unwrap();
        let rho = random_density(4, 3);
        let mut prev_dev = f64::INFINITY;
        for tau in [0.2, 0.05, 0.01] {
            let op =
                MasterOperator::build(4, ChainCouplings::new(1.0, 2.0), &pots, tau).unwrap();
            let p = op.measurement_probs(&rho);
            let dev: f64 = p
                .iter()
                .zip(op.omega().omega)
                .map(|(a, b)| (a - b).abs())
                .sum();
            assert!(dev < prev_dev);
            prev_dev = dev;
        }
        assert!(prev_dev < 1e-3);
    }

    #[test]
    fn map_is_cptp_on_random_densities() {
        let pots = BathPotentials::symmetric(0.6).unwrap();
        let op = MasterOperator::build(5, ChainCouplings::new(0.25, 0.5), &pots, 1.0).unwrap();
        for seed in 0..5 {
            let rho = random_density(8, seed);
            let out = op.apply(&rho);
            let tr: Complex64 = (0..8).map(|i| out[(i, i)]).sum();
            assert!((tr.re - 1.0).abs() < 1e-10);
            assert!(tr.im.abs() < 1e-10);
            for j in 0..8 {
                for i in 0..8 {
                    assert!((out[(i, j)] - out[(j, i)].conj()).norm() < 1e-10);
                }
            }
            let evd = out.self_adjoint_eigen(Side::Lower).unwrap();
            for k in 0..8 {
                assert!(evd.S()[k].re > -1e-10);
            }
        }
    }

    #[test]
    fn unbiased_baths_fix_maximally_mixed_interior() {
        // mu_L = mu_R = 1/2: rho = I / 2^(N-2) satisfies L rho = rho;
        // confirmed numerically rather than assumed
        let pots = BathPotentials::new(0.5, 0.5).unwrap();
        for n in [4, 5] {
            let d = basis::interior_dim(n);
            let op = MasterOperator::build(n, ChainCouplings::new(1.0, 2.0), &pots, 0.7).unwrap();
            let mixed = Mat::<Complex64>::from_fn(d, d, |i, j| {
                if i == j {
                    Complex64::new(1.0 / d as f64, 0.0)
                } else {
                    Complex64::ZERO
                }
            });
            let out = op.apply(&mixed);
            for j in 0..d {
                for i in 0..d {
                    assert!((out[(i, j)] - mixed[(i, j)]).norm() < 1e-10);
                }
            }
            let fp = op.fixed_point().unwrap();
            assert!(trace_distance(&fp.rho, &mixed).unwrap() < 1e-8);
            let profile = interior_profile(&fp.rho, n);
            for v in profile {
                assert!(v.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn power_iteration_agrees_with_eigensolver() {
        let pots = BathPotentials::symmetric(0.6).unwrap();
        let op = MasterOperator::build(4, ChainCouplings::new(0.25, 0.5), &pots, 1.0).unwrap();
        let dense = op.fixed_point_dense().unwrap();
        let power = op.fixed_point_power().unwrap();
        assert!(trace_distance(&dense.rho, &power.rho).unwrap() < 1e-8);
        assert!((dense.gap - power.gap).abs() < 1e-3);
        // fixed-point residual in trace norm
        let img = op.apply(&dense.rho);
        assert!(trace_distance(&img, &dense.rho).unwrap() < 1e-9);
    }

    #[test]
    fn gap_positive_on_parameter_grid() {
        for n in [4, 5, 6] {
            for delta in [0.5, 2.0] {
                for mu in [0.3, 0.9] {
                    for tau in [0.5, 1.0] {
                        let pots = BathPotentials::symmetric(mu).unwrap();
                        let op = MasterOperator::build(
                            n,
                            ChainCouplings::from_delta(0.5, delta),
                            &pots,
                            tau,
                        )
                        .unwrap();
                        let fp = op.fixed_point().unwrap();
                        assert!(fp.gap > 0.0, "N={n} delta={delta} mu={mu} tau={tau}");
                    }
                }
            }
        }
    }

    #[test]
    fn trace_preservation_on_random_hermitian() {
        let pots = BathPotentials::new(0.2, 0.9).unwrap();
        let op = MasterOperator::build(4, ChainCouplings::new(1.0, 0.3), &pots, 1.3).unwrap();
        let m = op.materialize();
        // trace functional is a left eigenvector with eigenvalue 1:
        // sum over diagonal vec-positions of each column
        let d = op.interior_dim();
        for col in 0..d * d {
            let tr: Complex64 = (0..d).map(|i| m[(i + d * i, col)]).sum();
            let expect = if col % (d + 1) == 0 { 1.0 } else { 0.0 };
            assert!((tr - Complex64::new(expect, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn no_drive_no_current_in_master_branch() {
        let pots = BathPotentials::new(0.4, 0.4).unwrap();
        let op = MasterOperator::build(4, ChainCouplings::new(1.0, 2.0), &pots, 1.0).unwrap();
        let fp = op.fixed_point().unwrap();
        let p = op.measurement_probs(&fp.rho);
        let (l, r) = op.current_forms(&p);
        assert!(l.abs() < 1e-9 && r.abs() < 1e-9);
    }

    #[test]
    fn analytic_formulas_trivial_points() {
        assert_eq!(analytic_current_n4(1.0, 2.0, 0.3, 0.3, 0.5), 0.0);
        // Delta = 0: linear in the drive
        let j = analytic_current_n4(0.7, 0.0, 0.1, 0.9, 0.5);
        assert!((j - 2.0 * 0.5 * 0.49 * 0.8).abs() < 1e-14);
        assert_eq!(analytic_gradient_n4(2.0, 0.5, 0.5), 0.0);
        assert_eq!(analytic_gradient_n4(0.0, 0.1, 0.9), 0.0);
        // symmetric-driving reduction and its maximum
        let delta: f64 = 2.0;
        let mu_star = analytic_current_max_location(delta);
        assert!((mu_star - (5.0f64 / 12.0).sqrt()).abs() < 1e-12);
        let j_at = |mu: f64| {
            let p = BathPotentials::symmetric(mu).unwrap();
            analytic_current_n4(1.0, delta, p.mu_left, p.mu_right, 1.0)
        };
        assert!(j_at(mu_star) > j_at(mu_star - 0.05));
        assert!(j_at(mu_star) > j_at(mu_star + 0.05));
        let reduced = 2.0 * 0.6 * (1.0 + (1.0 - 0.36) * 4.0) / 5.0;
        assert!((j_at(0.6) - reduced).abs() < 1e-12);
    }

    #[test]
    fn small_tau_fit_recovers_analytic_coefficient() {
        let pots = BathPotentials::symmetric(0.6).unwrap();
        // the correction to j = c2 tau enters at tau^3, so the quadratic
        // fit's c2 bias shrinks quadratically with the grid extent
        let grid = [0.005, 0.01, 0.015, 0.02, 0.025, 0.03];
        let fit = small_tau_current_fit(ChainCouplings::from_delta(1.0, 2.0), &pots, &grid)
            .unwrap();
        let analytic_c2 = analytic_current_n4(1.0, 2.0, pots.mu_left, pots.mu_right, 1.0);
        assert!(
            (fit.c2 - analytic_c2).abs() / analytic_c2.abs() < 0.01,
            "c2 = {} vs analytic {}",
            fit.c2,
            analytic_c2
        );
        assert!(fit.intercept.abs() <= 3.0 * fit.intercept_se + 1e-9);
    }

    #[test]
    fn c2_scales_as_jx_squared() {
        let pots = BathPotentials::symmetric(0.6).unwrap();
        let grid = [0.005, 0.01, 0.015, 0.02, 0.025, 0.03];
        let f1 = small_tau_current_fit(ChainCouplings::from_delta(0.5, 2.0), &pots, &grid)
            .unwrap();
        let f2 = small_tau_current_fit(ChainCouplings::from_delta(1.0, 2.0), &pots, &grid)
            .unwrap();
        assert!((f2.c2 / f1.c2 - 4.0).abs() < 0.05);
    }

    #[test]
    fn mu_zero_gives_zero_coefficient() {
        let pots = BathPotentials::symmetric(0.0).unwrap();
        let grid = [0.01, 0.02, 0.03, 0.04, 0.05];
        let fit =
            small_tau_current_fit(ChainCouplings::from_delta(1.0, 2.0), &pots, &grid).unwrap();
        assert!(fit.c2.abs() < 1e-9);
    }

    #[test]
    fn profile_mirrors_under_bath_exchange() {
        for n in [4, 5] {
            let tau = 0.8;
            let couplings = ChainCouplings::from_delta(0.5, 2.0);
            let fwd = MasterOperator::build(
                n,
                couplings,
                &BathPotentials::new(0.2, 0.9).unwrap(),
                tau,
            )
            .unwrap();
            let rev = MasterOperator::build(
                n,
                couplings,
                &BathPotentials::new(0.9, 0.2).unwrap(),
                tau,
            )
            .unwrap();
            let pf = interior_profile(&fwd.fixed_point().unwrap().rho, n);
            let pr = interior_profile(&rev.fixed_point().unwrap().rho, n);
            // exchanging the baths is a spatial reflection of the chain, so
            // the profile reverses site order
            for (i, v) in pf.iter().enumerate() {
                let mirrored = pr[pr.len() - 1 - i];
                assert!((v - mirrored).abs() < 1e-8, "N={n} site {i}");
            }
        }
    }

    #[test]
    fn gradient_matches_closed_form_at_small_tau() {
        let pots = BathPotentials::symmetric(0.6).unwrap();
        let couplings = ChainCouplings::from_delta(1.0, 2.0);
        let expected = analytic_gradient_n4(2.0, pots.mu_left, pots.mu_right);
        let op = MasterOperator::build(4, couplings, &pots, 0.02).unwrap();
        let fp = op.fixed_point().unwrap();
        let profile = interior_profile(&fp.rho, 4);
        let grad = profile[1] - profile[0];
        assert!(
            (grad - expected).abs() / expected.abs() < 0.02,
            "grad {grad} vs {expected}"
        );
    }
}
