//! Exact non-negative square matrices and their support patterns.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::rational::{self, Rational};
use crate::{Error, Result};

/// Square matrix with non-negative exact entries, stored row-major and
/// indexed from zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RationalMatrix {
    n: usize,
    entries: Vec<Rational>,
}

impl RationalMatrix {
    pub fn new(n: usize, entries: Vec<Rational>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMatrix("side length must be at least 1".into()));
        }
        if entries.len() != n * n {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                entries.len()
            )));
        }
        if let Some(pos) = entries.iter().position(|v| v.is_negative()) {
            return Err(Error::InvalidMatrix(format!(
                "entry ({}, {}) is negative",
                pos / n,
                pos % n
            )));
        }
        Ok(Self { n, entries })
    }

    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidMatrix(format!(
                "row {bad} has {} entries, expected {n}",
                rows[bad].len()
            )));
        }
        Self::new(n, rows.into_iter().flatten().collect())
    }

    /// Convenience constructor from small integer rows.
    pub fn from_integers<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.as_ref().iter().map(|&v| rational::int(v)).collect())
                .collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![Rational::zero(); n * n];
        for i in 0..n {
            entries[i * n + i] = Rational::one();
        }
        Self { n, entries }
    }

    pub fn ones(n: usize) -> Self {
        Self {
            n,
            entries: vec![Rational::one(); n * n],
        }
    }

    pub fn diagonal(diag: &[Rational]) -> Result<Self> {
        let n = diag.len();
        let mut entries = vec![Rational::zero(); n * n];
        for (i, d) in diag.iter().enumerate() {
            entries[i * n + i] = d.clone();
        }
        Self::new(n, entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[Rational] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Rational]> {
        self.entries.chunks(self.n)
    }

    pub fn row_sum(&self, i: usize) -> Rational {
        self.row(i).iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> Rational {
        (0..self.n).map(|i| self.get(i, j)).sum()
    }

    pub fn is_doubly_stochastic(&self) -> bool {
        let one = Rational::one();
        (0..self.n).all(|k| self.row_sum(k) == one && self.col_sum(k) == one)
    }

    pub fn support(&self) -> SupportPattern {
        support(self)
    }

    /// Entries as binary64, row-major.
    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(rational::to_f64).collect()
    }

    /// Integer matrix `A` and common denominator `d` with `self = A / d`.
    pub fn to_integer_scaled(&self) -> (Vec<BigInt>, BigInt) {
        rational::to_common_integers(&self.entries)
    }

    /// Sub-matrix on the given row and column index lists.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        if rows.len() != cols.len() {
            return Err(Error::SizeMismatch {
                rows: rows.len(),
                cols: cols.len(),
            });
        }
        let entries = rows
            .iter()
            .flat_map(|&i| cols.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j).clone())
            .collect();
        Ok(Self {
            n: rows.len(),
            entries,
        })
    }
}

/// Boolean mask of the strictly positive entries of a matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SupportPattern {
    n: usize,
    mask: Vec<bool>,
}

impl SupportPattern {
    pub fn new(n: usize, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: mask.len(),
            });
        }
        Ok(Self { n, mask })
    }

    pub fn full(n: usize) -> Self {
        Self {
            n,
            mask: vec![true; n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.n + j]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Whether the bipartite graph of the mask has a perfect matching, i.e.
    /// whether some permutation lies entirely inside the support.
    pub fn has_perfect_matching(&self) -> bool {
        let n = self.n;
        let mut match_col: Vec<Option<usize>> = vec![None; n];
        for row in 0..n {
            let mut seen = vec![false; n];
            if !self.augment(row, &mut seen, &mut match_col) {
                return false;
            }
        }
        true
    }

    fn augment(&self, row: usize, seen: &mut [bool], match_col: &mut [Option<usize>]) -> bool {
        for col in 0..self.n {
            if self.contains(row, col) && !seen[col] {
                seen[col] = true;
                let free = match match_col[col] {
                    None => true,
                    Some(other) => self.augment(other, seen, match_col),
                };
                if free {
                    match_col[col] = Some(row);
                    return true;
                }
            }
        }
        false
    }
}

pub fn support(theta: &RationalMatrix) -> SupportPattern {
    SupportPattern {
        n: theta.n,
        mask: theta.entries.iter().map(|v| v.is_positive()).collect(),
    }
}

/// `θ ⊗ U_{M,M}`: every entry becomes an `M × M` block filled with `θ(i,j)/M`.
pub fn kron_uniform(theta: &RationalMatrix, m: usize) -> RationalMatrix {
    assert!(m >= 1, "block size must be positive");
    let n = theta.n;
    let big = n * m;
    let scale = rational::ratio(1, m as i64);
    let mut entries = Vec::with_capacity(big * big);
    for r in 0..big {
        for c in 0..big {
            entries.push(theta.get(r / m, c / m) * &scale);
        }
    }
    RationalMatrix { n: big, entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn support_examples() {
        let id = support(&RationalMatrix::identity(3));
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(id.contains(i, j), i == j);
            }
        }
        assert!(support(&RationalMatrix::ones(2)).mask().iter().all(|&b| b));
        let m = RationalMatrix::from_integers(&[[1, 0], [2, 3]]).unwrap();
        assert_eq!(support(&m).mask(), &[true, false, true, true]);
    }

    #[test]
    fn rejects_negative_and_ragged_input() {
        assert!(matches!(
            RationalMatrix::from_integers(&[[1, -1], [0, 1]]),
            Err(Error::InvalidMatrix(_))
        ));
        assert!(RationalMatrix::from_rows(alloc::vec![alloc::vec![int(1)], alloc::vec![]]).is_err());
        assert!(RationalMatrix::new(0, alloc::vec![]).is_err());
    }

    #[test]
    fn kron_uniform_examples() {
        let theta = RationalMatrix::from_integers(&[[1, 2], [3, 4]]).unwrap();
        assert_eq!(kron_uniform(&theta, 1), theta);
        let k = kron_uniform(&RationalMatrix::ones(2), 2);
        assert_eq!(k.n(), 4);
        assert!(k.entries().iter().all(|v| *v == ratio(1, 2)));
        let k = kron_uniform(&theta, 2);
        assert_eq!(*k.get(0, 1), ratio(1, 2));
        assert_eq!(*k.get(1, 3), int(1));
        assert_eq!(*k.get(3, 0), ratio(3, 2));
        for i in 0..4 {
            assert_eq!(k.row_sum(i), theta.row_sum(i / 2));
        }
    }

    #[test]
    fn perfect_matching_detection() {
        assert!(SupportPattern::full(4).has_perfect_matching());
        let m = RationalMatrix::from_integers(&[[1, 1, 0], [1, 1, 0], [1, 1, 0]]).unwrap();
        assert!(!m.support().has_perfect_matching());
    }
}
