//! Permutations of `{0, .., n-1}` and support-restricted enumeration.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::matrix::RationalMatrix;
use crate::{Error, Result};

/// A bijection `i ↦ images[i]` on `{0, .., n-1}`. Its matrix view `P_σ` has
/// a one at `(i, σ(i))` and zeros elsewhere.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &v in &images {
            if v >= n || seen[v] {
                return Err(Error::InvalidPermutation(format!(
                    "{images:?} is not a bijection of 0..{n}"
                )));
            }
            seen[v] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            images: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Self { images: inv }
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(
            self.len(),
            other.len(),
            "composing permutations of different sizes"
        );
        Self {
            images: other.images.iter().map(|&j| self.images[j]).collect(),
        }
    }

    /// Dense 0/1 matrix view, row-major.
    pub fn to_matrix(&self) -> Vec<u32> {
        let n = self.len();
        let mut out = vec![0; n * n];
        for (i, &j) in self.images.iter().enumerate() {
            out[i * n + j] = 1;
        }
        out
    }

    /// Lengths of the cycles in the cycle decomposition, fixed points included.
    pub fn cycle_lengths(&self) -> Vec<usize> {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut lengths = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut cur = start;
            while !seen[cur] {
                seen[cur] = true;
                cur = self.images[cur];
                len += 1;
            }
            lengths.push(len);
        }
        lengths
    }

    /// Every permutation of `0..n` in lexicographic order of image sequences.
    pub fn all(n: usize) -> Vec<Self> {
        permutations_within(n, |_, _| true)
    }
}

/// Permutations with `allowed(i, σ(i))` for every `i`, in lexicographic order.
pub fn permutations_within(n: usize, allowed: impl Fn(usize, usize) -> bool) -> Vec<Permutation> {
    let mut out = Vec::new();
    let mut images = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn walk(
        n: usize,
        allowed: &dyn Fn(usize, usize) -> bool,
        images: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<Permutation>,
    ) {
        let row = images.len();
        if row == n {
            out.push(Permutation {
                images: images.clone(),
            });
            return;
        }
        for col in 0..n {
            if !used[col] && allowed(row, col) {
                used[col] = true;
                images.push(col);
                walk(n, allowed, images, used, out);
                images.pop();
                used[col] = false;
            }
        }
    }
    walk(n, &allowed, &mut images, &mut used, &mut out);
    out
}

/// All `σ` with `∏ᵢ θ(i, σ(i)) > 0`, i.e. the valid configurations of the
/// permanent's factor graph, in lexicographic order.
pub fn valid_permutations(theta: &RationalMatrix) -> Result<Vec<Permutation>> {
    let support = theta.support();
    let perms = permutations_within(theta.n(), |i, j| support.contains(i, j));
    if perms.is_empty() {
        return Err(Error::EmptySupport);
    }
    Ok(perms)
}

/// Number of cycles of length greater than one in `σ₁ ∘ σ₂⁻¹`.
pub fn cycle_count(sigma1: &Permutation, sigma2: &Permutation) -> usize {
    sigma1
        .compose(&sigma2.inverse())
        .cycle_lengths()
        .into_iter()
        .filter(|&l| l > 1)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn perm(images: &[usize]) -> Permutation {
        Permutation::new(images.to_vec()).unwrap()
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
    }

    #[test]
    fn lexicographic_enumeration() {
        let all = Permutation::all(3);
        assert_eq!(all.len(), 6);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(all[0], Permutation::identity(3));
    }

    #[test]
    fn valid_permutations_examples() {
        assert_eq!(
            valid_permutations(&RationalMatrix::identity(3)).unwrap(),
            vec![Permutation::identity(3)]
        );
        assert_eq!(valid_permutations(&RationalMatrix::ones(2)).unwrap().len(), 2);
        let singular = RationalMatrix::from_integers(&[[1, 1], [0, 0]]).unwrap();
        assert_eq!(valid_permutations(&singular), Err(Error::EmptySupport));
    }

    #[test]
    fn cycle_count_examples() {
        // (1)(2)(34)(567) against the identity, zero-based
        let s1 = perm(&[0, 1, 3, 2, 5, 6, 4]);
        assert_eq!(cycle_count(&s1, &Permutation::identity(7)), 2);
        assert_eq!(cycle_count(&s1, &s1), 0);
        assert_eq!(cycle_count(&perm(&[1, 0]), &Permutation::identity(2)), 1);
    }

    #[test]
    fn compose_and_inverse() {
        let s = perm(&[2, 0, 1]);
        assert_eq!(s.compose(&s.inverse()), Permutation::identity(3));
        assert_eq!(s.compose(&s).images(), &[1, 2, 0]);
        assert_eq!(s.to_matrix(), vec![0, 0, 1, 1, 0, 0, 0, 1, 0]);
    }
}
