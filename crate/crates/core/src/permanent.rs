//! Permanents: exact (Ryser), brute force, binary64, sub-matrix, and the
//! induced distribution over permutations.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::matrix::RationalMatrix;
use crate::permutation::{valid_permutations, Permutation};
use crate::rational::Rational;
use crate::{Error, Result};

/// Largest side length accepted by [`perm_brute`].
pub const BRUTE_FORCE_MAX_N: usize = 10;

/// Exact permanent by Ryser's inclusion–exclusion formula, stepping through
/// column subsets in Gray-code order.
///
/// The matrix is first scaled to integers by the common denominator of its
/// entries so the inner loop runs on big integers only.
pub fn perm_exact(theta: &RationalMatrix) -> Rational {
    let n = theta.n();
    let (a, d) = theta.to_integer_scaled();
    let value = ryser_integer(n, &a);
    assert!(!value.is_negative(), "Ryser produced a negative permanent");
    Rational::new(value, num_traits::pow(d, n))
}

/// `perm(A)` for an integer matrix `A` (row-major, side `n`).
pub(crate) fn ryser_integer(n: usize, a: &[BigInt]) -> BigInt {
    if n == 0 {
        return BigInt::one();
    }
    let mut row_sums = vec![BigInt::zero(); n];
    let mut in_set = vec![false; n];
    let mut total = BigInt::zero();
    let mut size = 0usize;
    for k in 1u64..(1u64 << n) {
        let col = k.trailing_zeros() as usize;
        if in_set[col] {
            in_set[col] = false;
            size -= 1;
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= &a[i * n + col];
            }
        } else {
            in_set[col] = true;
            size += 1;
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += &a[i * n + col];
            }
        }
        if row_sums.iter().any(|s| s.is_zero()) {
            continue;
        }
        let prod = row_sums.iter().fold(BigInt::one(), |acc, s| acc * s);
        // sign (-1)^{n - |S|}
        if (n - size).is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    total
}

/// Binary64 Ryser. Inclusion–exclusion cancels heavily for positive
/// matrices, so the relative error can be far above machine precision once
/// the side length grows past twenty or so; use only where no exact route
/// is affordable.
pub fn perm_f64(entries: &[f64], n: usize) -> f64 {
    assert_eq!(entries.len(), n * n, "entries must be n*n");
    if n == 0 {
        return 1.0;
    }
    let mut row_sums = vec![0.0f64; n];
    let mut in_set = vec![false; n];
    let mut total = 0.0;
    let mut size = 0usize;
    for k in 1u64..(1u64 << n) {
        let col = k.trailing_zeros() as usize;
        let sign = if in_set[col] { -1.0 } else { 1.0 };
        in_set[col] = !in_set[col];
        if sign > 0.0 {
            size += 1;
        } else {
            size -= 1;
        }
        for (i, s) in row_sums.iter_mut().enumerate() {
            *s += sign * entries[i * n + col];
        }
        let prod: f64 = row_sums.iter().product();
        if (n - size).is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    total
}

/// Direct sum over all `n!` permutations. Oracle for [`perm_exact`].
pub fn perm_brute(theta: &RationalMatrix) -> Result<Rational> {
    let n = theta.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::SizeGuard(format!(
            "brute-force permanent limited to n <= {BRUTE_FORCE_MAX_N}, got {n}"
        )));
    }
    Ok(Permutation::all(n).iter().map(|s| weight(theta, s)).sum())
}

/// `∏ᵢ θ(i, σ(i))`.
pub fn weight(theta: &RationalMatrix, sigma: &Permutation) -> Rational {
    (0..theta.n())
        .map(|i| theta.get(i, sigma.apply(i)))
        .fold(Rational::one(), |acc, v| acc * v)
}

/// Permanent of the sub-matrix on `rows × cols` (zero-based index lists).
/// The empty sub-matrix has permanent one.
pub fn perm_rect(gamma: &RationalMatrix, rows: &[usize], cols: &[usize]) -> Result<Rational> {
    if rows.len() != cols.len() {
        return Err(Error::SizeMismatch {
            rows: rows.len(),
            cols: cols.len(),
        });
    }
    if rows.is_empty() {
        return Ok(Rational::one());
    }
    Ok(perm_exact(&gamma.submatrix(rows, cols)?))
}

/// `p_θ(σ) = ∏ᵢ θ(i,σ(i)) / perm(θ)` over the valid permutations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermDistribution {
    pub support: Vec<Permutation>,
    pub weights: Vec<Rational>,
}

impl PermDistribution {
    pub fn total(&self) -> Rational {
        self.weights.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Permutation, &Rational)> {
        self.support.iter().zip(&self.weights)
    }
}

pub fn perm_distribution(theta: &RationalMatrix) -> Result<PermDistribution> {
    let support = valid_permutations(theta)?;
    let raw: Vec<Rational> = support.iter().map(|s| weight(theta, s)).collect();
    let total: Rational = raw.iter().sum();
    let weights = raw.into_iter().map(|w| w / &total).collect();
    Ok(PermDistribution { support, weights })
}
