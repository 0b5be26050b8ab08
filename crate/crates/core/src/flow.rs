//! Integer points `T = M·γ` of the scaled doubly stochastic lattice `Γ_{M,n}`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::matrix::{RationalMatrix, SupportPattern};
use crate::permutation::{permutations_within, Permutation};
use crate::rational::Rational;
use crate::{Error, Result};

/// Non-negative integer matrix whose rows and columns all sum to `M`.
/// Represents `γ = T / M ∈ Γ_{M,n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlowMatrix {
    n: usize,
    m: u32,
    counts: Vec<u32>,
}

impl FlowMatrix {
    pub fn new(n: usize, m: u32, counts: Vec<u32>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidFlow("n and M must be positive".into()));
        }
        if counts.len() != n * n {
            return Err(Error::InvalidFlow(format!(
                "expected {} counts, got {}",
                n * n,
                counts.len()
            )));
        }
        for k in 0..n {
            let row: u64 = counts[k * n..(k + 1) * n].iter().map(|&c| c as u64).sum();
            let col: u64 = (0..n).map(|i| counts[i * n + k] as u64).sum();
            if row != m as u64 || col != m as u64 {
                return Err(Error::InvalidFlow(format!(
                    "line {k} sums to {row} (row) / {col} (column), expected {m}"
                )));
            }
        }
        Ok(Self { n, m, counts })
    }

    /// `M · P_σ`.
    pub fn from_permutation(sigma: &Permutation, m: u32) -> Self {
        let n = sigma.len();
        let mut counts = vec![0; n * n];
        for i in 0..n {
            counts[i * n + sigma.apply(i)] = m;
        }
        Self { n, m, counts }
    }

    /// `Σ_m P_{σ_m}` for a tuple of permutations; `M` is the tuple length.
    pub fn from_permutations(sigmas: &[Permutation]) -> Result<Self> {
        let first = sigmas
            .first()
            .ok_or_else(|| Error::InvalidFlow("empty permutation tuple".into()))?;
        let n = first.len();
        let mut counts = vec![0; n * n];
        for s in sigmas {
            if s.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: s.len(),
                });
            }
            for i in 0..n {
                counts[i * n + s.apply(i)] += 1;
            }
        }
        Ok(Self {
            n,
            m: sigmas.len() as u32,
            counts,
        })
    }

    /// The `2 × 2` family `(k₁+k₂)·γ^{(k₁,k₂)} = [[k₁, k₂], [k₂, k₁]]`.
    pub fn pair(k1: u32, k2: u32) -> Result<Self> {
        Self::new(2, k1 + k2, vec![k1, k2, k2, k1])
    }

    /// `M · γ` for an exact doubly stochastic `γ` whose entries are multiples of `1/M`.
    pub fn from_gamma(gamma: &RationalMatrix, m: u32) -> Result<Self> {
        let scale = Rational::from_integer(BigInt::from(m));
        let counts = gamma
            .entries()
            .iter()
            .map(|v| {
                let t = v * &scale;
                if !t.is_integer() {
                    return Err(Error::NonIntegral(format!("{m} * {v}")));
                }
                u32::try_from(t.to_integer())
                    .map_err(|_| Error::InvalidFlow(format!("entry {t} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(gamma.n(), m, counts)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.counts[i * self.n + j]
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// `γ = T / M` as an exact matrix.
    pub fn to_gamma(&self) -> RationalMatrix {
        let m = BigInt::from(self.m);
        let entries = self
            .counts
            .iter()
            .map(|&c| Rational::new(BigInt::from(c), m.clone()))
            .collect();
        RationalMatrix::new(self.n, entries).expect("flow counts are non-negative")
    }

    pub fn to_f64(&self) -> Vec<f64> {
        let m = self.m as f64;
        self.counts.iter().map(|&c| c as f64 / m).collect()
    }

    /// Canonical memo key: `n`, `M`, then the counts in row-major order.
    pub fn key(&self) -> Vec<u32> {
        let mut key = Vec::with_capacity(self.counts.len() + 2);
        key.push(self.n as u32);
        key.push(self.m);
        key.extend_from_slice(&self.counts);
        key
    }

    pub fn support(&self) -> SupportPattern {
        SupportPattern::new(self.n, self.counts.iter().map(|&c| c > 0).collect())
            .expect("mask has n*n entries")
    }

    /// `S_[n](γ)`: permutations running entirely through positive cells.
    pub fn support_permutations(&self) -> Vec<Permutation> {
        permutations_within(self.n, |i, j| self.get(i, j) > 0)
    }

    pub fn is_permutation_multiple(&self) -> bool {
        self.counts.iter().all(|&c| c == 0 || c == self.m)
    }

    /// `θ^{M·γ} = ∏ θ(i,j)^{T(i,j)}` with the convention `0^0 = 1`.
    pub fn monomial(&self, theta: &RationalMatrix) -> Rational {
        assert_eq!(theta.n(), self.n, "dimension mismatch");
        let mut acc = Rational::one();
        for (v, &t) in theta.entries().iter().zip(&self.counts) {
            if t > 0 {
                if v.is_zero() {
                    return Rational::zero();
                }
                acc *= num_traits::pow(v.clone(), t as usize);
            }
        }
        acc
    }

    /// Integer monomial `∏ A(i,j)^{T(i,j)}` over a scaled integer matrix.
    pub(crate) fn integer_monomial(&self, scaled: &[BigInt]) -> BigInt {
        let mut acc = BigInt::one();
        for (v, &t) in scaled.iter().zip(&self.counts) {
            if t > 0 {
                if v.is_zero() {
                    return BigInt::zero();
                }
                acc *= num_traits::pow(v.clone(), t as usize);
            }
        }
        acc
    }
}

/// Every `T` with row and column sums `m`, zero outside `support` when given.
///
/// Cells are filled row-major, left to right, trying values in descending
/// order, so the output order is deterministic.
pub fn enumerate_flow_matrices(n: usize, m: u32, support: Option<&SupportPattern>) -> Vec<FlowMatrix> {
    enumerate_flow_matrices_capped(n, m, support, usize::MAX)
        .expect("uncapped enumeration cannot overflow its cap")
}

/// As [`enumerate_flow_matrices`], failing with `SizeGuard` once more than
/// `cap` matrices have been produced.
pub fn enumerate_flow_matrices_capped(
    n: usize,
    m: u32,
    support: Option<&SupportPattern>,
    cap: usize,
) -> Result<Vec<FlowMatrix>> {
    assert!(n >= 1 && m >= 1, "n and M must be positive");
    if let Some(s) = support {
        assert_eq!(s.n(), n, "support pattern has the wrong size");
    }
    let allowed = |i: usize, j: usize| support.is_none_or(|s| s.contains(i, j));
    let mut state = Enumerator {
        n,
        m,
        counts: vec![0; n * n],
        row_rem: vec![m; n],
        col_rem: vec![m; n],
        out: Vec::new(),
        cap,
        overflow: false,
    };
    state.fill(0, &allowed);
    if state.overflow {
        return Err(Error::SizeGuard(format!(
            "more than {cap} points in Γ_{{{m},{n}}}"
        )));
    }
    Ok(state.out)
}

struct Enumerator {
    n: usize,
    m: u32,
    counts: Vec<u32>,
    row_rem: Vec<u32>,
    col_rem: Vec<u32>,
    out: Vec<FlowMatrix>,
    cap: usize,
    overflow: bool,
}

impl Enumerator {
    fn fill(&mut self, cell: usize, allowed: &dyn Fn(usize, usize) -> bool) {
        if self.overflow {
            return;
        }
        let n = self.n;
        if cell == n * n {
            if self.out.len() >= self.cap {
                self.overflow = true;
                return;
            }
            self.out.push(FlowMatrix {
                n,
                m: self.m,
                counts: self.counts.clone(),
            });
            return;
        }
        let (i, j) = (cell / n, cell % n);
        if j == 0 && i > 0 {
            // every column must still be fillable by the remaining rows
            let rows_left = (n - i) as u32;
            if self.col_rem.iter().any(|&c| c > rows_left * self.m) {
                return;
            }
        }
        if !allowed(i, j) {
            if j == n - 1 && self.row_rem[i] != 0 {
                return;
            }
            self.fill(cell + 1, allowed);
            return;
        }
        let hi = self.row_rem[i].min(self.col_rem[j]);
        let room_right: u32 = ((j + 1)..n)
            .filter(|&jj| allowed(i, jj))
            .map(|jj| self.col_rem[jj])
            .sum();
        let mut lo = self.row_rem[i].saturating_sub(room_right);
        if i == n - 1 {
            lo = lo.max(self.col_rem[j]);
        }
        if lo > hi {
            return;
        }
        for v in (lo..=hi).rev() {
            self.counts[cell] = v;
            self.row_rem[i] -= v;
            self.col_rem[j] -= v;
            self.fill(cell + 1, allowed);
            self.row_rem[i] += v;
            self.col_rem[j] += v;
        }
        self.counts[cell] = 0;
    }
}
