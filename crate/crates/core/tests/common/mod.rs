#![allow(dead_code)]

use permlab_core::rational::ratio;
use permlab_core::{Rational, RationalMatrix};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Small positive rationals `p/q`.
pub fn positive_entry() -> impl Strategy<Value = Rational> {
    (1i64..=9, 1i64..=4).prop_map(|(p, q)| ratio(p, q))
}

/// Non-negative rationals, zero about a quarter of the time.
pub fn entry() -> impl Strategy<Value = Rational> {
    prop_oneof![1 => Just(ratio(0, 1)), 3 => positive_entry()]
}

pub fn positive_matrix(n: usize) -> impl Strategy<Value = RationalMatrix> {
    proptest::collection::vec(positive_entry(), n * n).prop_map(move |e| RationalMatrix::new(n, e).unwrap())
}

pub fn matrix(n: usize) -> impl Strategy<Value = RationalMatrix> {
    proptest::collection::vec(entry(), n * n).prop_map(move |e| RationalMatrix::new(n, e).unwrap())
}

/// Matrices with at least one positive diagonal.
pub fn feasible_matrix(n: usize) -> impl Strategy<Value = RationalMatrix> {
    matrix(n).prop_filter("needs a positive diagonal", |m| {
        m.support().has_perfect_matching()
    })
}

/// Seeded positive matrix with entries `k/den`, `k ∈ 1..=den`.
pub fn seeded_positive(n: usize, den: i64, rng: &mut ChaCha8Rng) -> RationalMatrix {
    let e = (0..n * n).map(|_| ratio(rng.gen_range(1..=den), den)).collect();
    RationalMatrix::new(n, e).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}
