mod common;

use permlab_core::flow::enumerate_flow_matrices;
use permlab_core::permanent::{perm_brute, perm_distribution, perm_exact};
use permlab_core::rational::{factorial, from_biguint, int, ratio};
use permlab_core::{kron_uniform, Rational};
use proptest::prelude::*;

#[test]
fn doubly_stochastic_sandwich() {
    for (n, max_m) in [(2, 6), (3, 4), (4, 2)] {
        let lower = from_biguint(factorial(n as u32))
            / Rational::from_integer(num_bigint::BigInt::from(n).pow(n as u32));
        for m in 1..=max_m {
            for t in enumerate_flow_matrices(n, m, None) {
                let p = perm_exact(&t.to_gamma());
                assert!(lower <= p && p <= int(1), "{t:?}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ryser_matches_brute_force(theta in (1usize..=7).prop_flat_map(common::matrix)) {
        prop_assert_eq!(perm_exact(&theta), perm_brute(&theta).unwrap());
    }

    #[test]
    fn kronecker_stays_positive(theta in (1usize..=3).prop_flat_map(common::feasible_matrix), m in 1usize..=3) {
        prop_assert!(perm_exact(&kron_uniform(&theta, m)) > int(0));
    }

    #[test]
    fn distribution_sums_to_one(theta in (1usize..=5).prop_flat_map(common::feasible_matrix)) {
        let d = perm_distribution(&theta).unwrap();
        prop_assert_eq!(d.total(), int(1));
        prop_assert!(d.weights.iter().all(|w| w > &int(0)));
    }
}

#[test]
fn example_gamma_scaled_to_integers() {
    let theta = permlab_core::RationalMatrix::from_integers(&[
        [3, 0, 0, 0],
        [0, 0, 3, 0],
        [0, 1, 0, 2],
        [0, 2, 0, 1],
    ])
    .unwrap();
    assert_eq!(perm_brute(&theta).unwrap(), perm_exact(&theta));
    assert_eq!(perm_exact(&theta), int(45));
    let counts = vec![3, 0, 0, 0, 0, 0, 3, 0, 0, 1, 0, 2, 0, 2, 0, 1];
    let gamma = permlab_core::FlowMatrix::new(4, 3, counts).unwrap().to_gamma();
    assert_eq!(perm_exact(&gamma), ratio(45, 81));
}
