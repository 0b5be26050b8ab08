mod common;

use permlab_core::degree_m::{
    degree_m_bethe, degree_m_sinkhorn, lift, BetheRoute, LiftingCollection, SinkhornRoute,
};
use permlab_core::permanent::perm_exact;
use permlab_core::rational::{int, to_f64};
use permlab_core::{Permutation, Rational, RationalMatrix};
use proptest::prelude::*;

fn exact(v: permlab_core::degree_m::DegreeMValue) -> Rational {
    v.value_to_the_m.exact().unwrap().clone()
}

#[test]
fn lifted_permanent_differs_from_square() {
    let theta = RationalMatrix::from_integers(&[[1, 2], [3, 4]]).unwrap();
    let id = Permutation::identity(2);
    let swap = Permutation::new(vec![1, 0]).unwrap();
    let p = LiftingCollection::new(2, 2, vec![swap, id.clone(), id.clone(), id]).unwrap();
    let lifted = lift(&theta, &p).unwrap();
    assert_eq!(lifted.n(), 4);
    assert_eq!(perm_exact(&lifted), int(52));
    assert_ne!(perm_exact(&lifted), int(100));
}

#[test]
fn sampling_tracks_enumeration() {
    let mut rng = common::rng(5);
    for (n, m) in [(2, 2), (2, 3), (3, 2)] {
        let theta = common::seeded_positive(n, 10, &mut rng);
        let exact_mean = to_f64(&exact(degree_m_bethe(&theta, m, BetheRoute::Enumerate).unwrap()));
        let s = degree_m_bethe(
            &theta,
            m,
            BetheRoute::Sample {
                samples: 4000,
                seed: 99,
            },
        )
        .unwrap();
        let mean = s.value_to_the_m.to_f64();
        let se = s.std_error.unwrap();
        assert!(
            (mean - exact_mean).abs() <= 3.0 * se + 1e-12,
            "{mean} {exact_mean} {se}"
        );
    }
}

#[test]
fn sampling_is_seed_deterministic() {
    let theta = RationalMatrix::from_integers(&[[1, 2, 3], [4, 5, 6], [7, 8, 9]]).unwrap();
    let r = BetheRoute::Sample { samples: 50, seed: 7 };
    assert_eq!(
        degree_m_bethe(&theta, 2, r).unwrap(),
        degree_m_bethe(&theta, 2, r).unwrap()
    );
    let other = BetheRoute::Sample { samples: 50, seed: 8 };
    assert_ne!(
        degree_m_bethe(&theta, 2, r).unwrap(),
        degree_m_bethe(&theta, 2, other).unwrap()
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn bethe_routes_agree(theta in (2usize..=3).prop_flat_map(common::feasible_matrix), m in 2u32..=3) {
        prop_assume!(theta.n() == 2 || m == 2);
        let a = exact(degree_m_bethe(&theta, m, BetheRoute::Coefficients).unwrap());
        let b = exact(degree_m_bethe(&theta, m, BetheRoute::Enumerate).unwrap());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn sinkhorn_routes_agree(theta in (2usize..=3).prop_flat_map(common::feasible_matrix), m in 2u32..=3) {
        let a = exact(degree_m_sinkhorn(&theta, m, SinkhornRoute::Coefficients).unwrap());
        let b = exact(degree_m_sinkhorn(&theta, m, SinkhornRoute::Kronecker).unwrap());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn degree_one_is_the_permanent(theta in (1usize..=4).prop_flat_map(common::feasible_matrix)) {
        let p = perm_exact(&theta);
        prop_assert_eq!(exact(degree_m_bethe(&theta, 1, BetheRoute::Coefficients).unwrap()), p.clone());
        prop_assert_eq!(exact(degree_m_bethe(&theta, 1, BetheRoute::Enumerate).unwrap()), p.clone());
        prop_assert_eq!(exact(degree_m_sinkhorn(&theta, 1, SinkhornRoute::Kronecker).unwrap()), p.clone());
        prop_assert_eq!(exact(degree_m_sinkhorn(&theta, 1, SinkhornRoute::Coefficients).unwrap()), p);
    }
}
