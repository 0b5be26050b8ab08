//! Modified Gibbs entropy `H_G'` and the three entropy values at a lattice
//! point.

use alloc::format;
use alloc::vec;

use super::{bethe_entropy, sinkhorn_entropy, xlogx};
use crate::flow::FlowMatrix;
use crate::{Error, Result};

/// Largest side length for which `S_[n](γ)` is enumerated explicitly.
pub const GIBBS_ENTROPY_MAX_N: usize = 6;
const CONSTRAINT_TOLERANCE: f64 = 1e-9;
const MAX_SWEEPS: usize = 1_000_000;

/// `H_G'(γ)`: the largest entropy of a distribution `p` on `S_[n](γ)` with
/// `Σ p(σ)·P_σ = γ`.
///
/// Solved by iterative proportional fitting on the row marginals of `σ`,
/// starting from the uniform distribution, until every moment constraint is
/// met within `1e−9`.
pub fn gibbs_entropy_modified(t: &FlowMatrix) -> Result<f64> {
    let n = t.n();
    if n > GIBBS_ENTROPY_MAX_N {
        return Err(Error::SizeGuard(format!(
            "modified Gibbs entropy limited to n <= {GIBBS_ENTROPY_MAX_N}, got {n}"
        )));
    }
    let perms = t.support_permutations();
    if perms.len() <= 1 {
        return Ok(0.0);
    }
    let gamma = t.to_f64();
    let mut p = vec![1.0 / perms.len() as f64; perms.len()];
    let mut mu = vec![0.0f64; n];
    for _ in 0..MAX_SWEEPS {
        for i in 0..n {
            mu.iter_mut().for_each(|v| *v = 0.0);
            for (s, w) in perms.iter().zip(&p) {
                mu[s.apply(i)] += w;
            }
            for (s, w) in perms.iter().zip(p.iter_mut()) {
                let j = s.apply(i);
                *w *= gamma[i * n + j] / mu[j];
            }
        }
        let mut moments = vec![0.0f64; n * n];
        for (s, w) in perms.iter().zip(&p) {
            for i in 0..n {
                moments[i * n + s.apply(i)] += w;
            }
        }
        let residual = moments
            .iter()
            .zip(&gamma)
            .map(|(a, b)| libm::fabs(a - b))
            .fold(0.0, f64::max);
        if residual <= CONSTRAINT_TOLERANCE {
            break;
        }
    }
    Ok(-p.iter().map(|&w| xlogx(w)).sum::<f64>())
}

/// `H_G'`, `H_B` and `H_scS` at `γ = T/M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyValues {
    pub h_gibbs_mod: f64,
    pub h_bethe: f64,
    pub h_sinkhorn: f64,
}

pub fn entropy_values(t: &FlowMatrix) -> Result<EntropyValues> {
    let gamma = t.to_f64();
    Ok(EntropyValues {
        h_gibbs_mod: gibbs_entropy_modified(t)?,
        h_bethe: bethe_entropy(&gamma),
        h_sinkhorn: sinkhorn_entropy(&gamma, t.n()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permutation::Permutation;

    fn binary_entropy(q: f64) -> f64 {
        -xlogx(q) - xlogx(1.0 - q)
    }

    #[test]
    fn two_by_two_closed_form() {
        let ln2 = core::f64::consts::LN_2;
        let v = entropy_values(&FlowMatrix::pair(1, 1).unwrap()).unwrap();
        assert!((v.h_gibbs_mod - ln2).abs() < 1e-12);
        assert!(v.h_bethe.abs() < 1e-15);
        assert!((v.h_sinkhorn - (-2.0 + 2.0 * ln2)).abs() < 1e-15);
        for m in 1..=7 {
            for k in 0..=m {
                let h = gibbs_entropy_modified(&FlowMatrix::pair(k, m - k).unwrap()).unwrap();
                assert!((h - binary_entropy(k as f64 / m as f64)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn permutation_point() {
        let t = FlowMatrix::from_permutation(&Permutation::new(vec![2, 0, 1]).unwrap(), 3);
        let v = entropy_values(&t).unwrap();
        assert_eq!((v.h_gibbs_mod, v.h_bethe, v.h_sinkhorn), (0.0, 0.0, -3.0));
    }

    #[test]
    fn uniform_three_by_three() {
        // the max-entropy decomposition of J/3 puts 1/6 on every permutation
        let t = FlowMatrix::new(3, 3, vec![1; 9]).unwrap();
        let h = gibbs_entropy_modified(&t).unwrap();
        assert!((h - 6f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn guard() {
        let t = FlowMatrix::from_permutation(&Permutation::identity(7), 2);
        assert!(matches!(gibbs_entropy_modified(&t), Err(Error::SizeGuard(_))));
    }
}
