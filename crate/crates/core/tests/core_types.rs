mod common;

use permlab_core::flow::enumerate_flow_matrices;
use permlab_core::permanent::weight;
use permlab_core::rational::int;
use permlab_core::{kron_uniform, valid_permutations, FlowMatrix, Permutation, RationalMatrix};
use proptest::prelude::*;

#[test]
fn enumeration_respects_line_sums() {
    for n in 1..=4 {
        for m in 1..=3 {
            if n == 4 && m == 3 {
                continue;
            }
            for t in enumerate_flow_matrices(n, m, None) {
                for i in 0..n {
                    assert_eq!((0..n).map(|j| t.get(i, j)).sum::<u32>(), m);
                    assert_eq!((0..n).map(|j| t.get(j, i)).sum::<u32>(), m);
                }
            }
        }
    }
}

#[test]
fn degree_one_lattice_is_the_permutations() {
    for n in 1..=6 {
        let all = enumerate_flow_matrices(n, 1, None);
        let fact: usize = (1..=n).product();
        assert_eq!(all.len(), fact);
        assert!(all.iter().all(FlowMatrix::is_permutation_multiple));
    }
}

#[test]
fn lattice_sizes() {
    assert_eq!(enumerate_flow_matrices(3, 2, None).len(), 21);
    for m in 1..=8 {
        assert_eq!(enumerate_flow_matrices(2, m, None).len(), m as usize + 1);
    }
}

#[test]
fn valid_permutations_of_example_gamma() {
    let t = FlowMatrix::new(4, 3, vec![3, 0, 0, 0, 0, 0, 3, 0, 0, 1, 0, 2, 0, 2, 0, 1]).unwrap();
    let perms = valid_permutations(&t.to_gamma()).unwrap();
    let images: Vec<Vec<usize>> = perms.iter().map(|p| p.images().to_vec()).collect();
    assert_eq!(images, vec![vec![0, 2, 1, 3], vec![0, 2, 3, 1]]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn valid_permutations_match_filter(theta in (1usize..=6).prop_flat_map(common::matrix)) {
        let brute: Vec<Permutation> = Permutation::all(theta.n())
            .into_iter()
            .filter(|s| weight(&theta, s) > int(0))
            .collect();
        match valid_permutations(&theta) {
            Ok(v) => prop_assert_eq!(v, brute),
            Err(_) => prop_assert!(brute.is_empty()),
        }
    }

    #[test]
    fn kron_preserves_row_sums(theta in (1usize..=4).prop_flat_map(common::matrix), m in 1usize..=3) {
        let k = kron_uniform(&theta, m);
        for i in 0..theta.n() * m {
            prop_assert_eq!(k.row_sum(i), theta.row_sum(i / m));
        }
    }

    #[test]
    fn support_restricted_enumeration(theta in (2usize..=3).prop_flat_map(common::matrix), m in 1u32..=3) {
        let s = theta.support();
        let restricted = enumerate_flow_matrices(theta.n(), m, Some(&s));
        let filtered: Vec<FlowMatrix> = enumerate_flow_matrices(theta.n(), m, None)
            .into_iter()
            .filter(|t| (0..theta.n() * theta.n()).all(|k| t.counts()[k] == 0 || s.mask()[k]))
            .collect();
        prop_assert_eq!(restricted, filtered);
    }
}

#[test]
fn identity_support() {
    let s = RationalMatrix::identity(3).support();
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(s.contains(i, j), i == j);
        }
    }
}
