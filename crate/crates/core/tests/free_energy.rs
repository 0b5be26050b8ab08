mod common;

use permlab_core::free_energy::{
    minimize_bethe, minimize_bethe_with, minimize_scaled_sinkhorn, sinkhorn_scale, FrankWolfeOptions,
    FwVariant,
};
use permlab_core::permanent::perm_exact;
use permlab_core::rational::{factorial, from_biguint, to_f64};
use permlab_core::RationalMatrix;

#[test]
fn bethe_sandwich_on_random_positive() {
    let mut rng = common::rng(21);
    for n in 2..=5 {
        for _ in 0..8 {
            let theta = common::seeded_positive(n, 50, &mut rng);
            let perm = to_f64(&perm_exact(&theta));
            let r = minimize_bethe(&theta, 1e-10, 100_000).unwrap();
            assert!(r.converged);
            assert!(r.value <= perm * (1.0 + 1e-6));
            assert!(r.value >= perm / 2f64.powf(n as f64 / 2.0) * (1.0 - 1e-6));
            assert!(r.trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
            assert!(r.minimizer.residual() <= 1e-12);
        }
    }
}

#[test]
fn sinkhorn_sandwich_on_random_positive() {
    let mut rng = common::rng(22);
    for n in 1..=5 {
        for _ in 0..8 {
            let theta = common::seeded_positive(n, 50, &mut rng);
            let perm = to_f64(&perm_exact(&theta));
            let r = minimize_scaled_sinkhorn(&theta, 1e-12, 100_000).unwrap();
            assert!(r.converged);
            let ratio = perm / r.value;
            let nf = n as f64;
            let lower = nf.exp() * to_f64(&from_biguint(factorial(n as u32))) / nf.powf(nf);
            assert!(ratio >= lower * (1.0 - 1e-6) && ratio <= nf.exp() * (1.0 + 1e-6));
            assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
        }
    }
}

#[test]
fn sinkhorn_point_is_a_scaling() {
    let theta = RationalMatrix::from_integers(&[[1, 2, 0], [3, 4, 5], [6, 0, 7]]).unwrap();
    let s = sinkhorn_scale(&theta, 1e-12, 100_000);
    assert!(s.converged);
    let t = theta.to_f64();
    for i in 0..3 {
        for j in 0..3 {
            let v = s.row_factors[i] * t[i * 3 + j] * s.col_factors[j];
            assert!((v - s.scaled[i * 3 + j]).abs() < 1e-12);
        }
    }
}

#[test]
fn structural_zeros_are_respected() {
    let theta = RationalMatrix::from_integers(&[[1, 1, 0], [1, 1, 1], [0, 1, 1]]).unwrap();
    let r = minimize_bethe(&theta, 1e-12, 100_000).unwrap();
    assert!(r.converged);
    assert_eq!(r.minimizer.get(0, 2), 0.0);
    assert_eq!(r.minimizer.get(2, 0), 0.0);
    let perm = to_f64(&perm_exact(&theta));
    assert!(r.value <= perm * (1.0 + 1e-9));
    // (0,1) lies on no positive diagonal
    let thin = RationalMatrix::from_integers(&[[1, 1], [0, 1]]).unwrap();
    let r = minimize_bethe(&thin, 1e-12, 1000).unwrap();
    assert!((r.value - 1.0).abs() < 1e-12);
}

#[test]
fn vanilla_schedule_still_descends_overall() {
    let theta = RationalMatrix::from_integers(&[[1, 2, 3], [4, 5, 6], [7, 8, 10]]).unwrap();
    let opts = FrankWolfeOptions {
        tol: 1e-6,
        max_iter: 20_000,
        variant: FwVariant::Vanilla,
        ..FrankWolfeOptions::default()
    };
    let v = minimize_bethe_with(&theta, &opts).unwrap();
    let best = minimize_bethe(&theta, 1e-12, 100_000).unwrap();
    assert!(v.objective >= best.objective - 1e-12);
    assert!(v.objective - best.objective < 1e-4);
}
