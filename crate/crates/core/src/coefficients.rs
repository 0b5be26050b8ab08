//! The coefficient families `C_M`, `C_B,M` and `C_scS,M` over `Γ_{M,n}`,
//! the peeling map, the fractional core, and the recursions in `M` that tie
//! them together.
//!
//! All three families are defined on the whole lattice `Γ_{M,n}`; they do not
//! depend on `θ`. Filtering by `supp(θ)` happens where the coefficients meet a
//! matrix, in the expansion identities.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;
use core::cell::RefCell;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::flow::FlowMatrix;
use crate::matrix::RationalMatrix;
use crate::permanent::perm_exact;
use crate::permutation::{permutations_within, Permutation};
use crate::rational::{self, factorial, from_biguint, powi, Rational};
use crate::{Error, Result};

/// Guard for [`c_gibbs_brute`]: at most this many tuples are visited.
pub const BRUTE_TUPLE_LIMIT: u128 = 10_000_000;

/// `T − P_σ₁` as a point of `Γ_{M−1,n}` (scaled by `M − 1`).
pub fn peel(t: &FlowMatrix, sigma1: &Permutation) -> Result<FlowMatrix> {
    let n = t.n();
    if sigma1.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: sigma1.len(),
        });
    }
    if t.m() < 2 {
        return Err(Error::InvalidPeel("peeling needs M >= 2".into()));
    }
    let mut counts = t.counts().to_vec();
    for i in 0..n {
        let cell = &mut counts[i * n + sigma1.apply(i)];
        if *cell == 0 {
            return Err(Error::InvalidPeel(format!("T({i}, {}) is zero", sigma1.apply(i))));
        }
        *cell -= 1;
    }
    FlowMatrix::new(n, t.m() - 1, counts)
}

/// Rows `R` and columns `C` of `γ` carrying a fractional entry, the core
/// `γ_{R,C}`, and `perm(γ̂_{R,C})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FractionalCore {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub core: Option<RationalMatrix>,
    pub perm_core: Rational,
}

impl FractionalCore {
    pub fn r(&self) -> usize {
        self.rows.len()
    }
}

/// Computes the fractional core of `γ = T/M`.
///
/// `perm(γ̂_{R,C})` is evaluated through the quotient
/// `Σ_σ ∏ γ(i,σ(i))(1 − γ(i,σ(i))) / ∏_{R×C} (1 − γ(i,j))`,
/// which stays rational; the entrywise `r`-th roots in `γ̂` cancel.
pub fn fractional_core(t: &FlowMatrix) -> FractionalCore {
    let n = t.n();
    let m = t.m();
    let fractional = |c: u32| c > 0 && c < m;
    let rows: Vec<usize> = (0..n)
        .filter(|&i| (0..n).any(|j| fractional(t.get(i, j))))
        .collect();
    let cols: Vec<usize> = (0..n)
        .filter(|&j| (0..n).any(|i| fractional(t.get(i, j))))
        .collect();
    debug_assert_eq!(rows.len(), cols.len());
    if rows.is_empty() {
        return FractionalCore {
            rows,
            cols,
            core: None,
            perm_core: Rational::one(),
        };
    }
    let core = t
        .to_gamma()
        .submatrix(&rows, &cols)
        .expect("|R| = |C| for doubly stochastic input");
    let one = Rational::one();
    let r = rows.len();
    // numerator: permanent of the entrywise product γ(1 − γ)
    let weighted: Vec<Rational> = core.entries().iter().map(|g| g * (&one - g)).collect();
    let numerator = perm_exact(&RationalMatrix::new(r, weighted).expect("entries in [0,1]"));
    let denominator: Rational = core
        .entries()
        .iter()
        .map(|g| &one - g)
        .fold(Rational::one(), |acc, v| acc * v);
    FractionalCore {
        rows,
        cols,
        core: Some(core),
        perm_core: numerator / denominator,
    }
}

/// Storage for the `C_M` recursion. Implementations must tolerate
/// concurrent use through `&self`; when two callers race on the same key the
/// first stored value wins and is returned to both.
pub trait GibbsMemo {
    fn lookup(&self, key: &[u32]) -> Option<BigUint>;
    fn store(&self, key: Vec<u32>, value: BigUint) -> BigUint;
}

/// Single-threaded memo, fresh for each top-level call unless reused.
#[derive(Debug, Default)]
pub struct LocalMemo {
    table: RefCell<BTreeMap<Vec<u32>, BigUint>>,
}

impl LocalMemo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.table.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.borrow().is_empty()
    }
}

impl GibbsMemo for LocalMemo {
    fn lookup(&self, key: &[u32]) -> Option<BigUint> {
        self.table.borrow().get(key).cloned()
    }

    fn store(&self, key: Vec<u32>, value: BigUint) -> BigUint {
        self.table.borrow_mut().entry(key).or_insert(value).clone()
    }
}

/// `C_M(γ)`: the number of `M`-tuples of permutations whose average
/// permutation matrix is `γ`.
pub fn c_gibbs(t: &FlowMatrix) -> BigUint {
    c_gibbs_with(t, &LocalMemo::new())
}

/// [`c_gibbs`] backed by a caller-provided memo, which may be shared across
/// calls and threads.
pub fn c_gibbs_with(t: &FlowMatrix, memo: &dyn GibbsMemo) -> BigUint {
    if t.m() == 1 || t.is_permutation_multiple() {
        return BigUint::one();
    }
    let key = t.key();
    if let Some(v) = memo.lookup(&key) {
        return v;
    }
    let mut total = BigUint::zero();
    for sigma in t.support_permutations() {
        let child = peel(t, &sigma).expect("σ runs through positive cells");
        total += c_gibbs_with(&child, memo);
    }
    memo.store(key, total)
}

/// Literal count over `S_[n]^M`. Oracle for [`c_gibbs`].
pub fn c_gibbs_brute(t: &FlowMatrix) -> Result<BigUint> {
    let n = t.n();
    let m = t.m() as usize;
    let perms = Permutation::all(n);
    let tuples = (perms.len() as u128).checked_pow(m as u32);
    if tuples.is_none_or(|k| k > BRUTE_TUPLE_LIMIT) {
        return Err(Error::SizeGuard(format!(
            "(n!)^M exceeds {BRUTE_TUPLE_LIMIT} for n = {n}, M = {m}"
        )));
    }
    let target = t.counts();
    let mut idx = alloc::vec![0usize; m];
    let mut count = BigUint::zero();
    let mut acc = alloc::vec![0u32; n * n];
    loop {
        acc.iter_mut().for_each(|c| *c = 0);
        for &k in &idx {
            let p = &perms[k];
            for i in 0..n {
                acc[i * n + p.apply(i)] += 1;
            }
        }
        if acc == target {
            count += 1u32;
        }
        // odometer
        let mut pos = 0;
        loop {
            if pos == m {
                return Ok(count);
            }
            idx[pos] += 1;
            if idx[pos] < perms.len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// `C_B,M(γ) = (M!)^{2n − n²} · ∏ (M − T(i,j))! / T(i,j)!`.
pub fn c_bethe(t: &FlowMatrix) -> Rational {
    let n = t.n() as i64;
    let m = t.m();
    let mfact = from_biguint(factorial(m));
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for &c in t.counts() {
        num *= factorial(m - c);
        den *= factorial(c);
    }
    powi(&mfact, 2 * n - n * n) * Rational::new(BigInt::from(num), BigInt::from(den))
}

/// `C_scS,M(γ) = M^{−nM} · (M!)^{2n} / ∏ T(i,j)!`.
pub fn c_sinkhorn(t: &FlowMatrix) -> Rational {
    let n = t.n();
    let m = t.m();
    let num = num_traits::pow(factorial(m), 2 * n);
    let den = t
        .counts()
        .iter()
        .fold(BigUint::one(), |acc, &c| acc * factorial(c))
        * num_traits::pow(BigUint::from(m), n * m as usize);
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// The three coefficients of one lattice point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientTriple {
    pub gamma: FlowMatrix,
    pub c_gibbs: BigUint,
    pub c_bethe: Rational,
    pub c_sinkhorn: Rational,
}

pub fn coefficient_triple(t: &FlowMatrix, memo: &dyn GibbsMemo) -> CoefficientTriple {
    CoefficientTriple {
        gamma: t.clone(),
        c_gibbs: c_gibbs_with(t, memo),
        c_bethe: c_bethe(t),
        c_sinkhorn: c_sinkhorn(t),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoefficientKind {
    Gibbs,
    Bethe,
    Sinkhorn,
}

impl CoefficientKind {
    pub const ALL: [CoefficientKind; 3] = [Self::Gibbs, Self::Bethe, Self::Sinkhorn];

    pub fn name(self) -> &'static str {
        match self {
            Self::Gibbs => "gibbs",
            Self::Bethe => "bethe",
            Self::Sinkhorn => "sinkhorn",
        }
    }

    /// Coefficient of this kind at `t`, as an exact rational.
    pub fn evaluate(self, t: &FlowMatrix, memo: &dyn GibbsMemo) -> Rational {
        match self {
            Self::Gibbs => from_biguint(c_gibbs_with(t, memo)),
            Self::Bethe => c_bethe(t),
            Self::Sinkhorn => c_sinkhorn(t),
        }
    }
}

impl core::str::FromStr for CoefficientKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gibbs" => Ok(Self::Gibbs),
            "bethe" => Ok(Self::Bethe),
            "sinkhorn" => Ok(Self::Sinkhorn),
            other => Err(Error::InvalidArgument(format!(
                "unknown coefficient kind {other:?}"
            ))),
        }
    }
}

/// `χ(M) = (M / (M − 1))^{M − 1}`.
pub fn chi(m: u32) -> Rational {
    assert!(m >= 2, "χ(M) needs M >= 2");
    powi(&rational::ratio(m as i64, m as i64 - 1), m as i64 - 1)
}

/// Both sides of one recursion step, evaluated exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecursionCheck {
    pub lhs: Rational,
    pub rhs: Rational,
    pub holds: bool,
}

/// Checks the recursion in `M` for the chosen coefficient family at `t`:
///
/// * gibbs: `C_M(γ) = Σ_σ₁ C_{M−1}(γ_σ₁)`
/// * bethe: `C_B,M(γ) = perm(γ̂_{R,C})⁻¹ · Σ_σ₁ C_B,M−1(γ_σ₁)`
/// * sinkhorn: `C_scS,M(γ) = (χ(M)ⁿ · perm(γ))⁻¹ · Σ_σ₁ C_scS,M−1(γ_σ₁)`
///
/// where `σ₁` ranges over `S_[n](γ)`.
pub fn verify_recursion(kind: CoefficientKind, t: &FlowMatrix) -> Result<RecursionCheck> {
    verify_recursion_with(kind, t, &LocalMemo::new())
}

pub fn verify_recursion_with(
    kind: CoefficientKind,
    t: &FlowMatrix,
    memo: &dyn GibbsMemo,
) -> Result<RecursionCheck> {
    if t.m() < 2 {
        return Err(Error::InvalidArgument("recursions need M >= 2".into()));
    }
    let lhs = kind.evaluate(t, memo);
    let children: Rational = t
        .support_permutations()
        .iter()
        .map(|s| peel(t, s).map(|c| kind.evaluate(&c, memo)))
        .sum::<Result<Rational>>()?;
    let rhs = match kind {
        CoefficientKind::Gibbs => children,
        CoefficientKind::Bethe => children / fractional_core(t).perm_core,
        CoefficientKind::Sinkhorn => {
            let factor = powi(&chi(t.m()), t.n() as i64) * perm_exact(&t.to_gamma());
            children / factor
        }
    };
    Ok(RecursionCheck {
        holds: lhs == rhs,
        lhs,
        rhs,
    })
}

/// One cell of the `n = 2` coefficient triangle: the coefficient of
/// `γ^{(k₁, M − k₁)}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PascalEntry {
    pub m: u32,
    pub k1: u32,
    pub value: Rational,
}

/// Coefficients of every `γ^{(k₁,k₂)}` with `1 ≤ k₁ + k₂ ≤ max_m`, ordered by
/// `M` and then by `k₁` ascending.
pub fn pascal_table(kind: CoefficientKind, max_m: u32) -> Vec<PascalEntry> {
    let memo = LocalMemo::new();
    let mut out = Vec::new();
    for m in 1..=max_m {
        for k1 in 0..=m {
            let t = FlowMatrix::pair(k1, m - k1).expect("pair family is doubly stochastic");
            out.push(PascalEntry {
                m,
                k1,
                value: kind.evaluate(&t, &memo),
            });
        }
    }
    out
}

/// Number of monotone lattice paths from `γ^{(0,0)}` to `γ^{(k₁,k₂)}` in the
/// `n = 2` triangle, counted by dynamic programming over the triangle.
pub fn pascal_path_count(k1: u32, k2: u32) -> BigUint {
    let mut row = alloc::vec![BigUint::one(); k2 as usize + 1];
    for _ in 0..k1 {
        for j in 1..row.len() {
            let left = row[j - 1].clone();
            row[j] += left;
        }
    }
    row[k2 as usize].clone()
}

/// `S_[n](γ)` restricted to an explicit matrix support.
pub fn decompositions_first_step(t: &FlowMatrix) -> Vec<Permutation> {
    permutations_within(t.n(), |i, j| t.get(i, j) > 0)
}
