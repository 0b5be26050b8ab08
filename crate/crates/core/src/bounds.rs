//! Verification of the coefficient and permanent inequalities, the ratio
//! identities, the `M = 2` cycle formula, and the entropy sandwich.
//!
//! Bounds with irrational constants are compared after raising both sides
//! to a common power, so every check here is an exact rational comparison.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::coefficients::{c_bethe, c_gibbs_with, c_sinkhorn, CoefficientKind, GibbsMemo, LocalMemo};
use crate::degree_m::{
    coefficient_expansion_with, degree_m_bethe, degree_m_sinkhorn, BetheRoute, DegreeMValue, PowerValue,
    SinkhornRoute, COEFFICIENT_POINT_LIMIT, KRONECKER_EXACT_MAX,
};
use crate::flow::{enumerate_flow_matrices_capped, FlowMatrix};
use crate::free_energy::{minimize_bethe, minimize_scaled_sinkhorn, xlogx};
use crate::matrix::RationalMatrix;
use crate::permanent::{perm_distribution, perm_exact};
use crate::permutation::{cycle_count, Permutation};
use crate::rational::{binomial, factorial, from_biguint, int, ln_biguint, powi, to_f64, Rational};
use crate::{Error, Result};

/// Largest number of permutation tuples visited by [`ratio_identity`].
pub const TUPLE_LIMIT: u128 = 1_000_000;
/// Largest side length accepted by [`m2_ratio`].
pub const M2_MAX_N: usize = 6;

/// One inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub lhs: Rational,
    pub rhs: Rational,
    pub holds: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, lhs: Rational, rhs: Rational) -> Self {
        Self {
            name: name.into(),
            holds: lhs <= rhs,
            lhs,
            rhs,
        }
    }

    /// Recomputes `holds` from the stored sides.
    pub fn is_consistent(&self) -> bool {
        self.holds == (self.lhs <= self.rhs)
    }
}

/// `M^{nM} / (M!)^n`, the `M`-th power of the upper scaled Sinkhorn
/// constant.
fn sinkhorn_constant_power(n: usize, m: u32) -> Rational {
    let num = num_traits::pow(BigInt::from(m), n * m as usize);
    let den = num_traits::pow(BigInt::from(factorial(m)), n);
    Rational::new(num, den)
}

/// `n! / nⁿ`.
fn van_der_waerden(n: usize) -> Rational {
    Rational::new(
        BigInt::from(factorial(n as u32)),
        num_traits::pow(BigInt::from(n), n),
    )
}

fn pow2(e: usize) -> Rational {
    Rational::from_integer(BigInt::one() << e)
}

/// The four inequalities between `perm(θ)` and its degree-`M` relatives,
/// stated for `P = perm^M`, `B = perm_B,M^M`, `S = perm_scS,M^M` and
/// `K = M^{nM}/(M!)ⁿ`:
///
/// * `B ≤ P`
/// * `P² ≤ B²·2^{n(M−1)}`
/// * `S·K·(n!/nⁿ)^{M−1} ≤ P`
/// * `P ≤ S·K`
pub fn permanent_checks(n: usize, m: u32, p: &Rational, b: &Rational, s: &Rational) -> Vec<Check> {
    let k = sinkhorn_constant_power(n, m);
    let vdw = powi(&van_der_waerden(n), m as i64 - 1);
    let two = pow2(n * (m as usize - 1));
    let sk = s * &k;
    alloc::vec![
        Check::new("bethe_lower", b.clone(), p.clone()),
        Check::new("bethe_upper", p * p, b * b * two),
        Check::new("sinkhorn_lower", &sk * vdw, p.clone()),
        Check::new("sinkhorn_upper", p.clone(), sk),
    ]
}

/// Everything computed about one `θ` at one `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub theta: RationalMatrix,
    pub n: usize,
    pub m: u32,
    pub perm: Rational,
    pub degree_m_bethe: DegreeMValue,
    pub degree_m_sinkhorn: DegreeMValue,
    /// `perm_B(θ)`, when the analytic permanents were requested.
    pub perm_bethe: Option<f64>,
    /// `perm_scS(θ)`, when the analytic permanents were requested.
    pub perm_scs: Option<f64>,
    /// `(perm / perm_B,M)^M`.
    pub ratio_bethe_to_the_m: Rational,
    /// `(perm / perm_scS,M)^M`.
    pub ratio_sinkhorn_to_the_m: Rational,
    pub ratio_bethe: f64,
    pub ratio_sinkhorn: f64,
    /// `(2^{n/2})^{(M−1)/M}`.
    pub bethe_upper_constant: f64,
    /// `Mⁿ/(M!)^{n/M}·(n!/nⁿ)^{(M−1)/M}`.
    pub sinkhorn_lower_constant: f64,
    /// `Mⁿ/(M!)^{n/M}`.
    pub sinkhorn_upper_constant: f64,
    pub checks: Vec<Check>,
}

impl BoundsReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsOptions {
    /// Also minimize the Bethe and scaled Sinkhorn free energies.
    pub analytic: bool,
    pub tol: f64,
    pub max_iter: u64,
}

impl Default for BoundsOptions {
    fn default() -> Self {
        Self {
            analytic: false,
            tol: crate::free_energy::DEFAULT_TOLERANCE,
            max_iter: crate::free_energy::DEFAULT_MAX_ITER,
        }
    }
}

pub fn check_permanent_bounds(theta: &RationalMatrix, m: u32) -> Result<BoundsReport> {
    check_permanent_bounds_with(theta, m, &BoundsOptions::default())
}

/// Evaluates the four permanent inequalities exactly. `perm_B,M^M` comes
/// from the coefficient expansion; `perm_scS,M^M` from the Kronecker
/// permanent when `nM ≤ 20` and from the expansion otherwise.
pub fn check_permanent_bounds_with(
    theta: &RationalMatrix,
    m: u32,
    options: &BoundsOptions,
) -> Result<BoundsReport> {
    if m == 0 {
        return Err(Error::InvalidArgument("M must be positive".into()));
    }
    let n = theta.n();
    let perm = perm_exact(theta);
    if perm.is_zero() {
        return Err(Error::EmptySupport);
    }
    let p = num_traits::pow(perm.clone(), m as usize);
    let bethe = degree_m_bethe(theta, m, BetheRoute::Coefficients)?;
    let route = if n * m as usize <= KRONECKER_EXACT_MAX {
        SinkhornRoute::Kronecker
    } else {
        SinkhornRoute::Coefficients
    };
    let sinkhorn = degree_m_sinkhorn(theta, m, route)?;
    let b = exact_power(&bethe)?;
    let s = exact_power(&sinkhorn)?;
    let checks = permanent_checks(n, m, &p, &b, &s);

    let (perm_bethe, perm_scs) = if options.analytic {
        let fb = minimize_bethe(theta, options.tol, options.max_iter)?;
        let fs = minimize_scaled_sinkhorn(theta, options.tol, options.max_iter)?;
        (Some(fb.value), Some(fs.value))
    } else {
        (None, None)
    };

    let mf = m as f64;
    let nf = n as f64;
    let upper = libm::pow(to_f64(&sinkhorn_constant_power(n, m)), 1.0 / mf);
    let ratio_b = &p / &b;
    let ratio_s = &p / &s;
    Ok(BoundsReport {
        theta: theta.clone(),
        n,
        m,
        ratio_bethe: PowerValue::Exact(ratio_b.clone()).root(m),
        ratio_sinkhorn: PowerValue::Exact(ratio_s.clone()).root(m),
        ratio_bethe_to_the_m: ratio_b,
        ratio_sinkhorn_to_the_m: ratio_s,
        bethe_upper_constant: libm::pow(2.0, nf / 2.0 * (mf - 1.0) / mf),
        sinkhorn_lower_constant: upper * libm::pow(to_f64(&van_der_waerden(n)), (mf - 1.0) / mf),
        sinkhorn_upper_constant: upper,
        perm,
        degree_m_bethe: bethe,
        degree_m_sinkhorn: sinkhorn,
        perm_bethe,
        perm_scs,
        checks,
    })
}

fn exact_power(v: &DegreeMValue) -> Result<Rational> {
    v.value_to_the_m
        .exact()
        .cloned()
        .ok_or_else(|| Error::SizeGuard("exact degree-M value not available".into()))
}

/// The coefficient inequalities at one lattice point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientBoundCheck {
    pub gamma: FlowMatrix,
    pub checks: Vec<Check>,
    pub holds: bool,
}

/// Checks at `γ = T/M`:
///
/// * `C_B,M ≤ C_M` and `C_M² ≤ C_B,M²·2^{n(M−1)}`
/// * `(M^M/M!)ⁿ(n!/nⁿ)^{M−1}·C_scS,M ≤ C_M ≤ (M^M/M!)ⁿ·C_scS,M`
pub fn coefficient_bound_check(t: &FlowMatrix, memo: &dyn GibbsMemo) -> CoefficientBoundCheck {
    let n = t.n();
    let m = t.m();
    let c = from_biguint(c_gibbs_with(t, memo));
    let cb = c_bethe(t);
    let cs = c_sinkhorn(t) * sinkhorn_constant_power(n, m);
    let vdw = powi(&van_der_waerden(n), m as i64 - 1);
    let checks = alloc::vec![
        Check::new("bethe_lower", cb.clone(), c.clone()),
        Check::new("bethe_upper", &c * &c, &cb * &cb * pow2(n * (m as usize - 1))),
        Check::new("sinkhorn_lower", &cs * vdw, c.clone()),
        Check::new("sinkhorn_upper", c, cs),
    ];
    CoefficientBoundCheck {
        gamma: t.clone(),
        holds: checks.iter().all(|c| c.holds),
        checks,
    }
}

/// [`coefficient_bound_check`] over all of `Γ_{M,n}`.
pub fn check_coefficient_bounds(n: usize, m: u32) -> Result<Vec<CoefficientBoundCheck>> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("n and M must be positive".into()));
    }
    let memo = LocalMemo::new();
    Ok(
        enumerate_flow_matrices_capped(n, m, None, COEFFICIENT_POINT_LIMIT)?
            .iter()
            .map(|t| coefficient_bound_check(t, &memo))
            .collect(),
    )
}

/// Both sides of a ratio identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatioIdentity {
    /// `(perm_X,M / perm)^M` from an independent route.
    pub direct: Rational,
    /// `Σ ∏ p_θ(σ_m) · C_X(⟨P⟩) / C_M(⟨P⟩)` over `S_[n](θ)^M`.
    pub sum: Rational,
    pub holds: bool,
}

/// Verifies `(perm_X,M/perm)^M = Σ_{σ₁..σ_M} ∏ p_θ(σ_m) · C_X,M(γ)/C_M(γ)`,
/// `γ = ⟨P_σ⟩`, for `X` Bethe or scaled Sinkhorn, by summing over every
/// tuple of valid permutations.
///
/// The left side uses the lifting average (Bethe, when affordable) or the
/// Kronecker permanent (Sinkhorn, `nM ≤ 20`), falling back to the
/// coefficient expansion.
pub fn ratio_identity(theta: &RationalMatrix, m: u32, kind: CoefficientKind) -> Result<RatioIdentity> {
    if m == 0 {
        return Err(Error::InvalidArgument("M must be positive".into()));
    }
    let dist = perm_distribution(theta)?;
    let k = dist.support.len() as u128;
    if k.checked_pow(m).is_none_or(|c| c > TUPLE_LIMIT) {
        return Err(Error::SizeGuard(format!(
            "{k}^{m} permutation tuples exceed {TUPLE_LIMIT}"
        )));
    }
    let memo = LocalMemo::new();
    let mut cache: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
    let mut idx = alloc::vec![0usize; m as usize];
    let mut sum = Rational::zero();
    let mut tuple: Vec<Permutation> = Vec::with_capacity(m as usize);
    'outer: loop {
        tuple.clear();
        tuple.extend(idx.iter().map(|&i| dist.support[i].clone()));
        let t = FlowMatrix::from_permutations(&tuple)?;
        let factor = cache
            .entry(t.key())
            .or_insert_with(|| {
                let cx = match kind {
                    CoefficientKind::Bethe => c_bethe(&t),
                    CoefficientKind::Sinkhorn => c_sinkhorn(&t),
                    CoefficientKind::Gibbs => from_biguint(c_gibbs_with(&t, &memo)),
                };
                cx / from_biguint(c_gibbs_with(&t, &memo))
            })
            .clone();
        let weight = idx.iter().fold(Rational::one(), |acc, &i| acc * &dist.weights[i]);
        sum += weight * factor;
        for pos in (0..idx.len()).rev() {
            idx[pos] += 1;
            if idx[pos] < dist.support.len() {
                continue 'outer;
            }
            idx[pos] = 0;
        }
        break;
    }

    let power = match kind {
        CoefficientKind::Gibbs => num_traits::pow(perm_exact(theta), m as usize),
        CoefficientKind::Bethe => {
            let v = degree_m_bethe(theta, m, BetheRoute::Enumerate)
                .or_else(|_| degree_m_bethe(theta, m, BetheRoute::Coefficients))?;
            exact_power(&v)?
        }
        CoefficientKind::Sinkhorn => {
            let route = if theta.n() * m as usize <= KRONECKER_EXACT_MAX {
                SinkhornRoute::Kronecker
            } else {
                SinkhornRoute::Coefficients
            };
            exact_power(&degree_m_sinkhorn(theta, m, route)?)?
        }
    };
    let direct = power / num_traits::pow(perm_exact(theta), m as usize);
    Ok(RatioIdentity {
        holds: direct == sum,
        direct,
        sum,
    })
}

/// `perm/perm_B,2` by two routes.
#[derive(Debug, Clone, PartialEq)]
pub struct M2Ratio {
    /// `(perm/perm_B,2)²` from the coefficient expansion.
    pub ratio_squared: Rational,
    /// `Σ_{σ₁,σ₂} p_θ(σ₁)p_θ(σ₂)·2^{−c(σ₁,σ₂)}`.
    pub cycle_sum: Rational,
    pub ratio: f64,
    pub via_cycles: f64,
    /// `|ratio − via_cycles| ≤ 1e−10·ratio`.
    pub agree: bool,
    /// `1 ≤ ratio ≤ 2^{n/4}`, decided exactly on `ratio²`.
    pub bounds_ok: bool,
}

pub fn m2_ratio(theta: &RationalMatrix) -> Result<M2Ratio> {
    let n = theta.n();
    if n > M2_MAX_N {
        return Err(Error::SizeGuard(format!(
            "m2 ratio limited to n <= {M2_MAX_N}, got {n}"
        )));
    }
    let perm = perm_exact(theta);
    if perm.is_zero() {
        return Err(Error::EmptySupport);
    }
    let b = coefficient_expansion_with(theta, 2, CoefficientKind::Bethe, &LocalMemo::new())?;
    let ratio_squared = &perm * &perm / b;

    let dist = perm_distribution(theta)?;
    let mut cycle_sum = Rational::zero();
    for (s1, w1) in dist.iter() {
        for (s2, w2) in dist.iter() {
            let c = cycle_count(s1, s2);
            cycle_sum += w1 * w2 / pow2(c);
        }
    }
    let ratio = libm::sqrt(to_f64(&ratio_squared));
    let via_cycles = 1.0 / libm::sqrt(to_f64(&cycle_sum));
    let bounds_ok = ratio_squared >= int(1) && &ratio_squared * &ratio_squared <= pow2(n);
    Ok(M2Ratio {
        agree: libm::fabs(ratio - via_cycles) <= 1e-10 * ratio,
        ratio_squared,
        cycle_sum,
        ratio,
        via_cycles,
        bounds_ok,
    })
}

/// One row of the entropy trend table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrendRow {
    pub m: u32,
    pub k: u32,
    /// `(1/M)·log C(M, k)`.
    pub normalized_log_count: f64,
    /// `h(k/M)`.
    pub entropy: f64,
    /// `h(k/M) − (1/M)·log C(M, k)`.
    pub gap: f64,
    /// `log(M + 1)/M`.
    pub bound: f64,
    pub holds: bool,
}

const TREND_SLACK: f64 = 1e-12;

/// Binary entropy `h(q) = −q log q − (1 − q) log(1 − q)`.
pub fn binary_entropy(q: f64) -> f64 {
    -xlogx(q) - xlogx(1.0 - q)
}

/// Sandwich `0 ≤ h(k/M) − (1/M)·log C(M,k) ≤ log(M+1)/M` at one `(M, k)`.
pub fn trend_row(m: u32, k: u32) -> TrendRow {
    let mf = m as f64;
    let normalized_log_count = ln_biguint(&binomial(m, k)) / mf;
    let entropy = binary_entropy(k as f64 / mf);
    let gap = entropy - normalized_log_count;
    let bound = libm::log(mf + 1.0) / mf;
    TrendRow {
        m,
        k,
        normalized_log_count,
        entropy,
        gap,
        bound,
        holds: gap >= -TREND_SLACK && gap <= bound + TREND_SLACK,
    }
}

/// [`trend_row`] along `M ∈ m_list` for `γ = γ^{(k, M−k)}`, `k = fraction·M`.
pub fn asymptotic_trend(fraction: &Rational, m_list: &[u32]) -> Result<Vec<TrendRow>> {
    if fraction < &int(0) || fraction > &int(1) {
        return Err(Error::InvalidArgument(format!(
            "fraction {fraction} outside [0, 1]"
        )));
    }
    m_list
        .iter()
        .map(|&m| {
            let k = fraction * int(m as i64);
            if !k.is_integer() || m == 0 {
                return Err(Error::NonIntegral(format!("{fraction}·{m} is not an integer")));
            }
            let k: u32 = k.to_integer().try_into().expect("0 <= k <= M");
            Ok(trend_row(m, k))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn all_ones_two_by_two() {
        let r = check_permanent_bounds(&RationalMatrix::ones(2), 2).unwrap();
        assert_eq!(r.ratio_bethe_to_the_m, ratio(4, 3));
        assert!(r.all_hold());
        assert!(r.checks.iter().all(Check::is_consistent));
        // strict: 4/3 < 2
        assert!(r.checks[1].lhs < r.checks[1].rhs);
        assert!(r.checks[2].lhs < r.checks[2].rhs);
    }

    #[test]
    fn diagonal_tightness() {
        let theta = RationalMatrix::diagonal(&[int(2), ratio(1, 3), int(5)]).unwrap();
        for m in 1..=3 {
            let r = check_permanent_bounds(&theta, m).unwrap();
            assert_eq!(r.ratio_bethe_to_the_m, int(1));
            assert_eq!(r.ratio_sinkhorn_to_the_m, sinkhorn_constant_power(3, m));
            assert!(r.all_hold());
        }
    }

    #[test]
    fn coefficient_examples() {
        let memo = LocalMemo::new();
        let c = coefficient_bound_check(&FlowMatrix::pair(2, 1).unwrap(), &memo);
        assert_eq!(
            (c.checks[1].lhs.clone(), c.checks[1].rhs.clone()),
            (int(9), int(16))
        );
        let c = coefficient_bound_check(&FlowMatrix::pair(2, 0).unwrap(), &memo);
        assert_eq!(c.checks[3].lhs, c.checks[3].rhs);
        for n in 1..=3 {
            for c in check_coefficient_bounds(n, 1).unwrap() {
                assert!(c.holds);
                assert!(c.checks.iter().all(|k| k.lhs == k.rhs));
            }
        }
    }

    #[test]
    fn ratio_identity_examples() {
        let r = ratio_identity(&RationalMatrix::ones(2), 2, CoefficientKind::Bethe).unwrap();
        assert_eq!(r.sum, ratio(3, 4));
        assert!(r.holds);
        let d = RationalMatrix::diagonal(&[int(2), int(3)]).unwrap();
        let r = ratio_identity(&d, 3, CoefficientKind::Bethe).unwrap();
        assert_eq!((r.sum, r.direct), (int(1), int(1)));
        assert!(
            ratio_identity(&RationalMatrix::ones(2), 2, CoefficientKind::Sinkhorn)
                .unwrap()
                .holds
        );
    }

    #[test]
    fn m2_examples() {
        let r = m2_ratio(&RationalMatrix::ones(2)).unwrap();
        assert!((r.ratio - 2.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!(r.agree && r.bounds_ok);
        assert_eq!(r.ratio_squared, r.cycle_sum.recip());
        let d = m2_ratio(&RationalMatrix::identity(3)).unwrap();
        assert_eq!(d.ratio, 1.0);
        assert!(matches!(
            m2_ratio(&RationalMatrix::ones(7)),
            Err(Error::SizeGuard(_))
        ));
    }

    #[test]
    fn trend_examples() {
        let rows = asymptotic_trend(&ratio(1, 2), &[2, 200]).unwrap();
        assert!((rows[0].normalized_log_count - 2f64.ln() / 2.0).abs() < 1e-15);
        assert!((rows[0].entropy - 2f64.ln()).abs() < 1e-15);
        assert!(rows.iter().all(|r| r.holds));
        assert!(rows[1].gap <= 201f64.ln() / 200.0);
        for r in asymptotic_trend(&int(0), &[1, 5, 9]).unwrap() {
            assert_eq!((r.normalized_log_count, r.entropy), (0.0, 0.0));
        }
        assert!(matches!(
            asymptotic_trend(&ratio(1, 2), &[3]),
            Err(Error::NonIntegral(_))
        ));
    }
}
