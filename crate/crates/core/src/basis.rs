//! Qubit basis indexing and the interior/border factorization.
//!
//! Basis states of an `N`-site chain are labelled by `c = sum_n c_n 2^(n-1)`
//! with `c_n` the z-eigenvalue bit of site `n` (1-based sites, site 1 at bit
//! 0). The two bath-coupled edge sites form the border index
//! `b = c_1 + 2 c_N`, the remaining `N-2` sites the interior index
//! `a = sum_{n=2}^{N-1} c_n 2^(n-2)`.

use crate::error::{Error, Result};

/// Hilbert-space dimension `2^N`.
#[inline]
pub fn dim(n_sites: usize) -> usize {
    1 << n_sites
}

/// Interior dimension `2^(N-2)`.
#[inline]
pub fn interior_dim(n_sites: usize) -> usize {
    debug_assert!(n_sites >= 2);
    1 << (n_sites - 2)
}

/// Bit of site `n` (1-based) in basis label `c`.
#[inline]
pub fn site_bit(c: usize, site: usize) -> usize {
    (c >> (site - 1)) & 1
}

/// Border index `b = c_1 + 2 c_N` of basis label `c`.
#[inline]
pub fn border_of(c: usize, n_sites: usize) -> usize {
    (c & 1) | (((c >> (n_sites - 1)) & 1) << 1)
}

/// Interior index of basis label `c`.
#[inline]
pub fn interior_of(c: usize, n_sites: usize) -> usize {
    (c >> 1) & (interior_dim(n_sites) - 1)
}

/// Assemble a basis label from interior index `a` and border index `b`.
#[inline]
pub fn gamma_unchecked(a: usize, b: usize, n_sites: usize) -> usize {
    (b & 1) | (a << 1) | ((b >> 1) << (n_sites - 1))
}

/// Assemble a basis label from interior index `a` and border index `b`,
/// rejecting out-of-range indices.
pub fn gamma(a: usize, b: usize, n_sites: usize) -> Result<usize> {
    if b >= 4 {
        return Err(Error::IndexOutOfRange { index: b, dim: 4 });
    }
    let d_in = interior_dim(n_sites);
    if a >= d_in {
        return Err(Error::IndexOutOfRange { index: a, dim: d_in });
    }
    Ok(gamma_unchecked(a, b, n_sites))
}

/// Split a basis label into `(interior index, border index)`; inverse of
/// [`gamma`].
pub fn decompose(c: usize, n_sites: usize) -> Result<(usize, usize)> {
    let d = dim(n_sites);
    if c >= d {
        return Err(Error::IndexOutOfRange { index: c, dim: d });
    }
    Ok((interior_of(c, n_sites), border_of(c, n_sites)))
}

/// Total magnetization eigenvalue `sum_n (2 c_n - 1)` of a basis state.
#[inline]
pub fn magnetization_of(c: usize, n_sites: usize) -> i64 {
    2 * (c.count_ones() as i64) - n_sites as i64
}
