//! Exact scalar helpers on top of [`num_rational::BigRational`].

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Canonical exact scalar. Always kept in lowest terms with a positive denominator.
pub type Rational = num_rational::BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// `num / den`, reduced. Panics on a zero denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_biguint(v: BigUint) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn factorial(k: u32) -> BigUint {
    (2..=k).fold(BigUint::one(), |acc, i| acc * i)
}

pub fn binomial(m: u32, k: u32) -> BigUint {
    if k > m {
        return BigUint::zero();
    }
    let k = k.min(m - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * (m - i) / (i + 1);
    }
    acc
}

/// Integer power with a possibly negative exponent.
pub fn powi(base: &Rational, exp: i64) -> Rational {
    if exp >= 0 {
        num_traits::pow(base.clone(), exp as usize)
    } else {
        num_traits::pow(base.recip(), exp.unsigned_abs() as usize)
    }
}

pub fn to_f64(v: &Rational) -> f64 {
    if let Some(f) = v.to_f64() {
        if f.is_finite() {
            return f;
        }
    }
    // Fall back to logarithms when numerator or denominator overflow binary64.
    let sign = if v.is_negative() { -1.0 } else { 1.0 };
    sign * libm::exp(ln_abs(v))
}

/// Natural logarithm of `|v|`, robust to operands far outside binary64 range.
pub fn ln_abs(v: &Rational) -> f64 {
    ln_biguint(v.numer().magnitude()) - ln_biguint(v.denom().magnitude())
}

pub fn ln_biguint(v: &BigUint) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = v.bits();
    if bits <= 1000 {
        return libm::log(v.to_f64().unwrap_or(f64::INFINITY));
    }
    let shift = bits - 64;
    let top = (v >> shift).to_f64().unwrap_or(f64::INFINITY);
    libm::log(top) + shift as f64 * core::f64::consts::LN_2
}

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn fraction_string(v: &Rational) -> String {
    v.to_string()
}

/// Least common multiple of the denominators of `values`.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Scales `values` by their common denominator `d`, returning the integer
/// numerators together with `d`.
pub fn to_common_integers(values: &[Rational]) -> (Vec<BigInt>, BigInt) {
    let d = common_denominator(values);
    let ints = values.iter().map(|v| v.numer() * (&d / v.denom())).collect();
    (ints, d)
}
