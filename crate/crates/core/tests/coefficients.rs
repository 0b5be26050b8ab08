mod common;

use num_bigint::BigUint;
use permlab_core::coefficients::{
    c_bethe, c_gibbs, c_gibbs_brute, c_gibbs_with, fractional_core, verify_recursion, CoefficientKind,
    LocalMemo,
};
use permlab_core::degree_m::coefficient_expansion;
use permlab_core::flow::enumerate_flow_matrices;
use permlab_core::permanent::perm_exact;
use permlab_core::rational::{int, to_f64};
use permlab_core::{cycle_count, kron_uniform, FlowMatrix, Permutation};
use proptest::prelude::*;

#[test]
fn recursion_matches_brute_force_count() {
    let memo = LocalMemo::new();
    let mut cases = Vec::new();
    cases.extend((1..=5).map(|m| (2, m)));
    cases.extend((1..=3).map(|m| (3, m)));
    cases.push((4, 2));
    for (n, m) in cases {
        for t in enumerate_flow_matrices(n, m, None) {
            assert_eq!(c_gibbs_with(&t, &memo), c_gibbs_brute(&t).unwrap(), "{t:?}");
        }
    }
}

#[test]
fn two_permutation_average_counts_cycles() {
    for n in 1..=4 {
        let all = Permutation::all(n);
        for s1 in &all {
            for s2 in &all {
                let t = FlowMatrix::from_permutations(&[s1.clone(), s2.clone()]).unwrap();
                let c = cycle_count(s1, s2);
                assert_eq!(c_gibbs(&t), BigUint::from(1u32) << c);
                assert_eq!(c_bethe(&t), int(1));
            }
        }
    }
}

#[test]
fn two_permutation_average_random_pairs() {
    use rand::seq::SliceRandom;
    let mut rng = common::rng(3);
    for _ in 0..20 {
        let mut a: Vec<usize> = (0..5).collect();
        let mut b = a.clone();
        a.shuffle(&mut rng);
        b.shuffle(&mut rng);
        let (s1, s2) = (Permutation::new(a).unwrap(), Permutation::new(b).unwrap());
        let t = FlowMatrix::from_permutations(&[s1.clone(), s2.clone()]).unwrap();
        assert_eq!(c_gibbs(&t), BigUint::from(1u32) << cycle_count(&s1, &s2));
    }
}

#[test]
fn fractional_core_permanent_range() {
    for (n, max_m) in [(2, 5), (3, 4), (4, 3)] {
        let bound = 2f64.powf(n as f64 / 2.0);
        for m in 1..=max_m {
            for t in enumerate_flow_matrices(n, m, None) {
                let core = fractional_core(&t);
                assert!(core.r() != 1);
                let p = to_f64(&core.perm_core);
                assert!(core.perm_core >= int(1));
                assert!(p <= bound * (1.0 + 1e-12), "{t:?} {p}");
                if let Some(g) = &core.core {
                    assert!(g.is_doubly_stochastic());
                }
            }
        }
    }
}

#[test]
fn recursions_hold_on_small_lattice() {
    for m in 2..=3 {
        for t in enumerate_flow_matrices(3, m, None) {
            for kind in CoefficientKind::ALL {
                assert!(verify_recursion(kind, &t).unwrap().holds, "{kind:?} {t:?}");
            }
        }
    }
}

#[test]
fn degree_one_coefficients_are_one() {
    for n in 1..=4 {
        for t in enumerate_flow_matrices(n, 1, None) {
            for kind in CoefficientKind::ALL {
                assert_eq!(kind.evaluate(&t, &LocalMemo::new()), int(1));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gibbs_expansion_is_the_power(theta in (1usize..=3).prop_flat_map(common::matrix), m in 1u32..=3) {
        let p = perm_exact(&theta);
        let sum = coefficient_expansion(&theta, m, CoefficientKind::Gibbs).unwrap();
        prop_assert_eq!(sum, num_traits::pow(p, m as usize));
    }

    #[test]
    fn sinkhorn_expansion_is_kronecker(theta in (1usize..=3).prop_flat_map(common::matrix), m in 1u32..=3) {
        let sum = coefficient_expansion(&theta, m, CoefficientKind::Sinkhorn).unwrap();
        prop_assert_eq!(sum, perm_exact(&kron_uniform(&theta, m as usize)));
    }
}
