//! Degree-`M` Bethe and scaled Sinkhorn permanents.
//!
//! `perm_B,M(θ)^M` is the average of `perm(θ↑P_M)` over all liftings and
//! `perm_scS,M(θ)^M = perm(θ ⊗ U_{M,M})`. Both also expand over `Γ_{M,n}(θ)`
//! with the coefficients of [`crate::coefficients`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::coefficients::{CoefficientKind, GibbsMemo, LocalMemo};
use crate::flow::enumerate_flow_matrices_capped;
use crate::matrix::{kron_uniform, RationalMatrix};
use crate::permanent::{perm_exact, perm_f64, ryser_integer};
use crate::permutation::Permutation;
use crate::rational::{ln_abs, to_f64, Rational};
use crate::{Error, Result};

/// Largest number of liftings the enumerate route will visit.
pub const ENUMERATE_LIFTING_LIMIT: u128 = 1_000_000;
/// Largest `|Γ_{M,n}(θ)|` the coefficient routes will sum over.
pub const COEFFICIENT_POINT_LIMIT: usize = 2_000_000;
/// Largest `nM` for the exact Kronecker permanent.
pub const KRONECKER_EXACT_MAX: usize = 20;
/// Largest `nM` for the binary64 Kronecker permanent.
pub const KRONECKER_FLOAT_MAX: usize = 28;

/// An `n × n` grid of permutations of `[M]`, one per block of `θ↑P_M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftingCollection {
    n: usize,
    m: usize,
    blocks: Vec<Permutation>,
}

impl LiftingCollection {
    pub fn new(n: usize, m: usize, blocks: Vec<Permutation>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidArgument("n and M must be positive".into()));
        }
        if blocks.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: blocks.len(),
            });
        }
        if let Some(b) = blocks.iter().find(|b| b.len() != m) {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: b.len(),
            });
        }
        Ok(Self { n, m, blocks })
    }

    /// Every block equal to the identity of `[M]`.
    pub fn identity(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            blocks: vec![Permutation::identity(m); n * n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn block(&self, i: usize, j: usize) -> &Permutation {
        &self.blocks[i * self.n + j]
    }

    pub fn blocks(&self) -> &[Permutation] {
        &self.blocks
    }
}

/// `θ↑P_M`: the `nM × nM` block matrix with block `(i, j)` equal to
/// `θ(i,j)·P^{(i,j)}`.
pub fn lift(theta: &RationalMatrix, lifting: &LiftingCollection) -> Result<RationalMatrix> {
    if lifting.n() != theta.n() {
        return Err(Error::DimensionMismatch {
            expected: theta.n(),
            found: lifting.n(),
        });
    }
    let n = theta.n();
    let m = lifting.m();
    let size = n * m;
    let mut entries = vec![Rational::zero(); size * size];
    for i in 0..n {
        for j in 0..n {
            let p = lifting.block(i, j);
            for a in 0..m {
                entries[(i * m + a) * size + j * m + p.apply(a)] = theta.get(i, j).clone();
            }
        }
    }
    RationalMatrix::new(size, entries)
}

/// Integer lifting on a pre-scaled matrix, reusing `out`.
fn lift_integer(n: usize, m: usize, scaled: &[BigInt], blocks: &[&Permutation], out: &mut [BigInt]) {
    let size = n * m;
    out.iter_mut().for_each(|v| v.set_zero());
    for i in 0..n {
        for j in 0..n {
            let p = blocks[i * n + j];
            for a in 0..m {
                out[(i * m + a) * size + j * m + p.apply(a)] = scaled[i * n + j].clone();
            }
        }
    }
}

/// `value_to_the_M`, exact or approximate.
#[derive(Debug, Clone, PartialEq)]
pub enum PowerValue {
    Exact(Rational),
    Approx(f64),
}

impl PowerValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            Self::Exact(r) => to_f64(r),
            Self::Approx(f) => *f,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Self::Exact(r) => Some(r),
            Self::Approx(_) => None,
        }
    }

    /// `M`-th root as binary64.
    pub fn root(&self, m: u32) -> f64 {
        let ln = match self {
            Self::Exact(r) if r.is_zero() => return 0.0,
            Self::Exact(r) => ln_abs(r),
            Self::Approx(f) if *f <= 0.0 => return 0.0,
            Self::Approx(f) => libm::log(*f),
        };
        if m == 1 {
            return self.to_f64();
        }
        libm::exp(ln / m as f64)
    }
}

/// A degree-`M` permanent together with its `M`-th power.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeMValue {
    pub m: u32,
    pub value_to_the_m: PowerValue,
    pub value: f64,
    /// Standard error of the sampled mean of `value_to_the_m`.
    pub std_error: Option<f64>,
}

impl DegreeMValue {
    fn from_power(m: u32, power: PowerValue, std_error: Option<f64>) -> Self {
        Self {
            m,
            value: power.root(m),
            value_to_the_m: power,
            std_error,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetheRoute {
    Coefficients,
    Enumerate,
    Sample { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SinkhornRoute {
    Kronecker,
    Coefficients,
}

/// `Σ_{γ ∈ Γ_{M,n}(θ)} θ^{Mγ}·C(γ)` for the chosen coefficient family.
///
/// Gibbs gives `perm(θ)^M`, Bethe `perm_B,M(θ)^M`, Sinkhorn
/// `perm_scS,M(θ)^M`.
pub fn coefficient_expansion(theta: &RationalMatrix, m: u32, kind: CoefficientKind) -> Result<Rational> {
    coefficient_expansion_with(theta, m, kind, &LocalMemo::new())
}

pub fn coefficient_expansion_with(
    theta: &RationalMatrix,
    m: u32,
    kind: CoefficientKind,
    memo: &dyn GibbsMemo,
) -> Result<Rational> {
    check_m(m)?;
    let n = theta.n();
    let support = theta.support();
    let points = enumerate_flow_matrices_capped(n, m, Some(&support), COEFFICIENT_POINT_LIMIT)?;
    let (scaled, d) = theta.to_integer_scaled();
    let mut total = Rational::zero();
    for t in &points {
        let mono = t.integer_monomial(&scaled);
        if mono.is_zero() {
            continue;
        }
        total += kind.evaluate(t, memo) * Rational::from_integer(mono);
    }
    Ok(total / Rational::from_integer(num_traits::pow(d, n * m as usize)))
}

fn check_m(m: u32) -> Result<()> {
    if m == 0 {
        return Err(Error::InvalidArgument("M must be positive".into()));
    }
    Ok(())
}

fn lifting_count(n: usize, m: u32) -> Option<u128> {
    let perms: u128 = (1..=m as u128).product();
    perms.checked_pow((n * n) as u32)
}

/// Degree-`M` Bethe permanent by the chosen route.
pub fn degree_m_bethe(theta: &RationalMatrix, m: u32, route: BetheRoute) -> Result<DegreeMValue> {
    check_m(m)?;
    match route {
        BetheRoute::Coefficients => {
            let power = coefficient_expansion(theta, m, CoefficientKind::Bethe)?;
            Ok(DegreeMValue::from_power(m, PowerValue::Exact(power), None))
        }
        BetheRoute::Enumerate => {
            let power = bethe_enumerate(theta, m)?;
            Ok(DegreeMValue::from_power(m, PowerValue::Exact(power), None))
        }
        BetheRoute::Sample { samples, seed } => {
            let (mean, se) = bethe_sample(theta, m, samples, seed)?;
            Ok(DegreeMValue::from_power(m, PowerValue::Approx(mean), Some(se)))
        }
    }
}

/// Exact average of `perm(θ↑P_M)` over all `(M!)^{n²}` liftings, visited in
/// mixed-radix order with the first block most significant.
fn bethe_enumerate(theta: &RationalMatrix, m: u32) -> Result<Rational> {
    let n = theta.n();
    let count = lifting_count(n, m)
        .filter(|&c| c <= ENUMERATE_LIFTING_LIMIT)
        .ok_or_else(|| {
            Error::SizeGuard(format!(
                "(M!)^(n^2) exceeds {ENUMERATE_LIFTING_LIMIT} for n = {n}, M = {m}"
            ))
        })?;
    let mu = m as usize;
    let perms = Permutation::all(mu);
    let (scaled, d) = theta.to_integer_scaled();
    let size = n * mu;
    let mut lifted = vec![BigInt::zero(); size * size];
    let mut idx = vec![0usize; n * n];
    let mut total = BigInt::zero();
    loop {
        let blocks: Vec<&Permutation> = idx.iter().map(|&k| &perms[k]).collect();
        lift_integer(n, mu, &scaled, &blocks, &mut lifted);
        total += ryser_integer(size, &lifted);
        let mut pos = idx.len();
        loop {
            if pos == 0 {
                let den = num_traits::pow(d, size) * BigInt::from(count);
                return Ok(Rational::new(total, den));
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < perms.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// Monte-Carlo mean of `perm(θ↑P_M)` over uniformly drawn liftings, with
/// its standard error.
fn bethe_sample(theta: &RationalMatrix, m: u32, samples: u64, seed: u64) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let n = theta.n();
    let mu = m as usize;
    let size = n * mu;
    if size > KRONECKER_FLOAT_MAX {
        return Err(Error::SizeGuard(format!(
            "lifted side nM = {size} exceeds {KRONECKER_FLOAT_MAX}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (scaled, d) = theta.to_integer_scaled();
    let den = Rational::from_integer(num_traits::pow(d, size));
    let mut lifted = vec![BigInt::zero(); size * size];
    let mut images: Vec<usize> = (0..mu).collect();
    let mut blocks = Vec::with_capacity(n * n);
    let (mut sum, mut sum_sq) = (0.0f64, 0.0f64);
    for _ in 0..samples {
        blocks.clear();
        for _ in 0..n * n {
            images.shuffle(&mut rng);
            blocks.push(Permutation::new(images.clone()).expect("shuffle keeps a bijection"));
        }
        let refs: Vec<&Permutation> = blocks.iter().collect();
        lift_integer(n, mu, &scaled, &refs, &mut lifted);
        let v = to_f64(&(Rational::from_integer(ryser_integer(size, &lifted)) / &den));
        sum += v;
        sum_sq += v * v;
    }
    let k = samples as f64;
    let mean = sum / k;
    let var = if samples > 1 {
        ((sum_sq - k * mean * mean) / (k - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok((mean, libm::sqrt(var / k)))
}

/// Degree-`M` scaled Sinkhorn permanent by the chosen route.
///
/// The Kronecker route is exact for `nM ≤ 20` and binary64 up to
/// `nM ≤ 28`.
pub fn degree_m_sinkhorn(theta: &RationalMatrix, m: u32, route: SinkhornRoute) -> Result<DegreeMValue> {
    check_m(m)?;
    let power = match route {
        SinkhornRoute::Coefficients => {
            PowerValue::Exact(coefficient_expansion(theta, m, CoefficientKind::Sinkhorn)?)
        }
        SinkhornRoute::Kronecker => {
            let size = theta.n() * m as usize;
            if size <= KRONECKER_EXACT_MAX {
                PowerValue::Exact(perm_exact(&kron_uniform(theta, m as usize)))
            } else if size <= KRONECKER_FLOAT_MAX {
                let k = kron_uniform(theta, m as usize);
                PowerValue::Approx(perm_f64(&k.to_f64(), size))
            } else {
                return Err(Error::SizeGuard(format!(
                    "Kronecker permanent of side {size} exceeds {KRONECKER_FLOAT_MAX}"
                )));
            }
        }
    };
    Ok(DegreeMValue::from_power(m, power, None))
}

/// Number of liftings, when it fits in `u128`.
pub fn lifting_total(n: usize, m: u32) -> Option<u128> {
    lifting_count(n, m)
}

impl PowerValue {
    /// Ratio `a / b` of two power values as binary64.
    pub fn ratio_f64(&self, other: &Self) -> f64 {
        match (self, other) {
            (Self::Exact(a), Self::Exact(b)) => to_f64(&(a / b)),
            _ => self.to_f64() / other.to_f64(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permanent::perm_exact;
    use crate::rational::{int, ratio};

    fn exact(v: &DegreeMValue) -> Rational {
        v.value_to_the_m.exact().unwrap().clone()
    }

    #[test]
    fn lift_identity_and_trivial() {
        let theta = RationalMatrix::from_integers(&[[1, 2], [3, 4]]).unwrap();
        assert_eq!(lift(&theta, &LiftingCollection::identity(2, 1)).unwrap(), theta);
        let l = lift(&theta, &LiftingCollection::identity(2, 3)).unwrap();
        assert_eq!(perm_exact(&l), int(1000));
        let swap = Permutation::new(vec![1, 0]).unwrap();
        let id = Permutation::identity(2);
        let p = LiftingCollection::new(2, 2, vec![swap, id.clone(), id.clone(), id]).unwrap();
        assert_ne!(perm_exact(&lift(&theta, &p).unwrap()), int(100));
        assert!(lift(&RationalMatrix::identity(3), &p).is_err());
    }

    #[test]
    fn bethe_all_ones() {
        let theta = RationalMatrix::ones(2);
        for route in [BetheRoute::Coefficients, BetheRoute::Enumerate] {
            let v = degree_m_bethe(&theta, 2, route).unwrap();
            assert_eq!(exact(&v), int(3));
            assert!((v.value - 3f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn bethe_m1_and_diagonal() {
        let theta = RationalMatrix::from_integers(&[[1, 2, 0], [3, 4, 5], [0, 1, 1]]).unwrap();
        let p = perm_exact(&theta);
        for route in [BetheRoute::Coefficients, BetheRoute::Enumerate] {
            assert_eq!(exact(&degree_m_bethe(&theta, 1, route).unwrap()), p);
        }
        let diag = RationalMatrix::diagonal(&[int(2), ratio(1, 3), int(5)]).unwrap();
        for m in 1..=3 {
            let v = degree_m_bethe(&diag, m, BetheRoute::Coefficients).unwrap();
            assert_eq!(exact(&v), num_traits::pow(ratio(10, 3), m as usize));
        }
    }

    #[test]
    fn sinkhorn_examples() {
        let ones = RationalMatrix::ones(2);
        for route in [SinkhornRoute::Kronecker, SinkhornRoute::Coefficients] {
            let v = degree_m_sinkhorn(&ones, 2, route).unwrap();
            assert_eq!(exact(&v), ratio(3, 2));
        }
        let id = RationalMatrix::identity(2);
        let v = degree_m_sinkhorn(&id, 2, SinkhornRoute::Kronecker).unwrap();
        assert_eq!(exact(&v), ratio(1, 4));
        assert!((v.value - 0.5).abs() < 1e-15);
        let theta = RationalMatrix::from_integers(&[[1, 2], [3, 4]]).unwrap();
        assert_eq!(
            exact(&degree_m_sinkhorn(&theta, 1, SinkhornRoute::Kronecker).unwrap()),
            int(10)
        );
    }

    #[test]
    fn sampling_is_deterministic() {
        let theta = RationalMatrix::from_integers(&[[1, 2], [3, 4]]).unwrap();
        let route = BetheRoute::Sample {
            samples: 200,
            seed: 11,
        };
        let a = degree_m_bethe(&theta, 2, route).unwrap();
        let b = degree_m_bethe(&theta, 2, route).unwrap();
        assert_eq!(a, b);
        assert!(a.std_error.unwrap() > 0.0);
    }

    #[test]
    fn guards() {
        let theta = RationalMatrix::ones(4);
        assert!(matches!(
            degree_m_bethe(&theta, 3, BetheRoute::Enumerate),
            Err(Error::SizeGuard(_))
        ));
        assert!(matches!(
            degree_m_sinkhorn(&RationalMatrix::ones(5), 6, SinkhornRoute::Kronecker),
            Err(Error::SizeGuard(_))
        ));
    }
}
