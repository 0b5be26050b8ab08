//! Sinkhorn matrix scaling and the scaled Sinkhorn permanent.

use alloc::vec::Vec;

use super::{
    average_energy, log_theta, require_positive_permanent, sinkhorn_entropy, DoublyStochasticPoint,
    MinimizationReport,
};
use crate::matrix::RationalMatrix;
use crate::Result;

/// Result of alternating row and column normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct SinkhornScaling {
    pub n: usize,
    /// `diag(u)·θ·diag(v)` after the last sweep.
    pub scaled: Vec<f64>,
    pub row_factors: Vec<f64>,
    pub col_factors: Vec<f64>,
    pub iterations: u64,
    /// Largest row-sum deviation from one after each sweep.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

impl SinkhornScaling {
    pub fn residual(&self) -> f64 {
        self.residuals.last().copied().unwrap_or(f64::INFINITY)
    }
}

/// Alternates row and column normalization of `θ` until every row sum is
/// within `tol` of one (column sums are exact after each sweep).
///
/// The row sums after a sweep stay inside the interval spanned by the row
/// sums after the previous sweep, so the residual never increases.
pub fn sinkhorn_scale(theta: &RationalMatrix, tol: f64, max_iter: u64) -> SinkhornScaling {
    let n = theta.n();
    let mut a = theta.to_f64();
    let mut row_factors = alloc::vec![1.0f64; n];
    let mut col_factors = alloc::vec![1.0f64; n];
    let mut residuals = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        for i in 0..n {
            let s: f64 = a[i * n..(i + 1) * n].iter().sum();
            if s > 0.0 {
                a[i * n..(i + 1) * n].iter_mut().for_each(|x| *x /= s);
                row_factors[i] /= s;
            }
        }
        for j in 0..n {
            let s: f64 = (0..n).map(|i| a[i * n + j]).sum();
            if s > 0.0 {
                (0..n).for_each(|i| a[i * n + j] /= s);
                col_factors[j] /= s;
            }
        }
        let dev = (0..n)
            .map(|i| libm::fabs(a[i * n..(i + 1) * n].iter().sum::<f64>() - 1.0))
            .fold(0.0, f64::max);
        residuals.push(dev);
        if dev <= tol {
            converged = true;
            break;
        }
    }
    SinkhornScaling {
        n,
        scaled: a,
        row_factors,
        col_factors,
        iterations,
        residuals,
        converged,
    }
}

/// `perm_scS(θ) = exp(−min F_scS)`, attained at the Sinkhorn fixed point.
///
/// Failure to converge within `max_iter` sweeps is reported through
/// `converged = false`, not as an error.
pub fn minimize_scaled_sinkhorn(
    theta: &RationalMatrix,
    tol: f64,
    max_iter: u64,
) -> Result<MinimizationReport> {
    require_positive_permanent(theta)?;
    let n = theta.n();
    let scaling = sinkhorn_scale(theta, tol, max_iter);
    let lt = log_theta(theta);
    let objective = average_energy(&scaling.scaled, n, &lt)? - sinkhorn_entropy(&scaling.scaled, n);
    Ok(MinimizationReport {
        minimizer: DoublyStochasticPoint::from_raw(n, scaling.scaled.clone()),
        objective,
        value: libm::exp(-objective),
        iterations: scaling.iterations,
        gap_or_residual: scaling.residual(),
        converged: scaling.converged,
        trace: scaling.residuals,
    })
}

impl MinimizationReport {
    /// The unscaled Sinkhorn permanent `perm_S = eⁿ·perm_scS`, meaningful
    /// for reports produced by [`minimize_scaled_sinkhorn`].
    pub fn sinkhorn_permanent(&self) -> f64 {
        libm::exp(self.minimizer.n() as f64) * self.value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn all_ones_is_uniform() {
        for n in 1..=5 {
            let r = minimize_scaled_sinkhorn(&RationalMatrix::ones(n), 1e-12, 1000).unwrap();
            assert!(r.converged);
            let nf = n as f64;
            let expect = libm::exp(-nf) * nf.powi(n as i32);
            assert!((r.value - expect).abs() < 1e-12 * expect);
        }
    }

    #[test]
    fn diagonal_is_identity() {
        let theta = RationalMatrix::diagonal(&[int(2), ratio(1, 3), int(5)]).unwrap();
        let r = minimize_scaled_sinkhorn(&theta, 1e-12, 1000).unwrap();
        let expect = libm::exp(-3.0) * 10.0 / 3.0;
        assert!((r.value - expect).abs() < 1e-12 * expect);
        assert!((r.sinkhorn_permanent() - 10.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn symmetric_family_grid_search() {
        // every doubly stochastic 2x2 is [[g,1-g],[1-g,g]]
        let theta = RationalMatrix::ones(2);
        let r = minimize_scaled_sinkhorn(&theta, 1e-12, 1000).unwrap();
        let best = (0..=10_000)
            .map(|k| {
                let g = k as f64 / 10_000.0;
                let p = DoublyStochasticPoint::new(2, alloc::vec![g, 1.0 - g, 1.0 - g, g]).unwrap();
                super::super::scaled_sinkhorn_free_energy(&p, &theta).unwrap()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((r.objective - best).abs() < 1e-12);
    }

    #[test]
    fn residual_is_monotone() {
        let theta = RationalMatrix::from_integers(&[[1, 20, 3], [4, 5, 600], [7, 8, 9]]).unwrap();
        let r = sinkhorn_scale(&theta, 1e-12, 100_000);
        assert!(r.converged);
        assert!(r.residuals.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn no_total_support_does_not_converge() {
        // perm > 0 but the (0,1) cell lies on no positive diagonal
        let theta = RationalMatrix::from_integers(&[[1, 1], [0, 1]]).unwrap();
        let r = minimize_scaled_sinkhorn(&theta, 1e-12, 50).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 50);
    }
}
