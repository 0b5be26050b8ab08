//! Bethe and scaled Sinkhorn free energies, the analytic permanents
//! `perm_B` and `perm_scS` obtained by minimizing them over `Γ_n(θ)`, and
//! the entropy functions behind the asymptotic characterization.
//!
//! All logarithms are natural and `0·log 0 = 0`.

mod assignment;
mod entropy;
mod frank_wolfe;
mod sinkhorn;

use alloc::format;
use alloc::vec::Vec;

pub use assignment::min_cost_assignment;
pub use entropy::{entropy_values, gibbs_entropy_modified, EntropyValues, GIBBS_ENTROPY_MAX_N};
pub use frank_wolfe::{minimize_bethe, minimize_bethe_with, FrankWolfeOptions, FwInit, FwVariant};
pub use sinkhorn::{minimize_scaled_sinkhorn, sinkhorn_scale, SinkhornScaling};

use crate::flow::FlowMatrix;
use crate::matrix::RationalMatrix;
use crate::permutation::Permutation;
use num_traits::Zero;

use crate::rational::ln_abs;
use crate::{Error, Result};

/// Row and column sums must be within this distance of one.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-12;
/// Largest value of `γ(i,j)` tolerated where `θ(i,j) = 0`.
pub const SUPPORT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: u64 = 100_000;

/// A binary64 doubly stochastic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DoublyStochasticPoint {
    n: usize,
    entries: Vec<f64>,
}

impl DoublyStochasticPoint {
    /// Validates entries in `[0, 1]` and line sums within
    /// [`STOCHASTIC_TOLERANCE`] of one.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        Self::with_tolerance(n, entries, STOCHASTIC_TOLERANCE)
    }

    pub fn with_tolerance(n: usize, entries: Vec<f64>, tol: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMatrix("side length must be positive".into()));
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: entries.len(),
            });
        }
        if let Some(v) = entries.iter().find(|v| !(-tol..=1.0 + tol).contains(*v)) {
            return Err(Error::InvalidMatrix(format!("entry {v} outside [0, 1]")));
        }
        let point = Self { n, entries };
        let dev = point.residual();
        if dev.is_nan() || dev > tol {
            return Err(Error::InvalidMatrix(format!(
                "line sums deviate from one by {dev:e}"
            )));
        }
        Ok(point)
    }

    pub(crate) fn from_raw(n: usize, entries: Vec<f64>) -> Self {
        Self { n, entries }
    }

    pub fn uniform(n: usize) -> Self {
        Self::from_raw(n, alloc::vec![1.0 / n as f64; n * n])
    }

    pub fn from_permutation(sigma: &Permutation) -> Self {
        let n = sigma.len();
        let entries = sigma.to_matrix().into_iter().map(f64::from).collect();
        Self::from_raw(n, entries)
    }

    pub fn from_flow(t: &FlowMatrix) -> Self {
        Self::from_raw(t.n(), t.to_f64())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Largest deviation of a row or column sum from one.
    pub fn residual(&self) -> f64 {
        line_sum_residual(&self.entries, self.n)
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks(self.n)
    }
}

pub(crate) fn line_sum_residual(entries: &[f64], n: usize) -> f64 {
    let mut dev = 0.0f64;
    for i in 0..n {
        let r: f64 = entries[i * n..(i + 1) * n].iter().sum();
        let c: f64 = (0..n).map(|k| entries[k * n + i]).sum();
        dev = dev.max(libm::fabs(r - 1.0)).max(libm::fabs(c - 1.0));
    }
    dev
}

/// Outcome of a free-energy minimization.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimizationReport {
    pub minimizer: DoublyStochasticPoint,
    /// Free energy at the minimizer.
    pub objective: f64,
    /// `exp(−objective)`.
    pub value: f64,
    pub iterations: u64,
    /// Frank–Wolfe duality gap, or Sinkhorn line-sum residual.
    pub gap_or_residual: f64,
    pub converged: bool,
    /// Objective per Frank–Wolfe iteration, or residual per Sinkhorn sweep.
    pub trace: Vec<f64>,
}

impl MinimizationReport {
    /// `perm(θ) / value`.
    pub fn ratio(&self, perm: f64) -> f64 {
        perm / self.value
    }
}

/// `ln θ(i,j)` entrywise, `−∞` on zeros.
pub(crate) fn log_theta(theta: &RationalMatrix) -> Vec<f64> {
    theta
        .entries()
        .iter()
        .map(|v| if v.is_zero() { f64::NEG_INFINITY } else { ln_abs(v) })
        .collect()
}

/// `x·log x` with `0·log 0 = 0`.
pub fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * libm::log(x)
    }
}

fn check_shape(gamma: &DoublyStochasticPoint, theta: &RationalMatrix) -> Result<()> {
    if gamma.n() != theta.n() {
        return Err(Error::DimensionMismatch {
            expected: theta.n(),
            found: gamma.n(),
        });
    }
    Ok(())
}

/// `U(γ) = −Σ γ log θ`, rejecting mass outside `supp(θ)`.
pub(crate) fn average_energy(gamma: &[f64], n: usize, log_theta: &[f64]) -> Result<f64> {
    let mut u = 0.0;
    for (k, (&g, &lt)) in gamma.iter().zip(log_theta).enumerate() {
        if lt == f64::NEG_INFINITY {
            if g > SUPPORT_TOLERANCE {
                return Err(Error::SupportViolation {
                    row: k / n,
                    col: k % n,
                });
            }
            continue;
        }
        u -= g * lt;
    }
    Ok(u)
}

/// `H_B(γ) = −Σ γ log γ + Σ (1 − γ) log(1 − γ)`.
pub fn bethe_entropy(gamma: &[f64]) -> f64 {
    gamma.iter().map(|&g| -xlogx(g) + xlogx(1.0 - g)).sum()
}

/// `H_scS(γ) = −n − Σ γ log γ`.
pub fn sinkhorn_entropy(gamma: &[f64], n: usize) -> f64 {
    -(n as f64) - gamma.iter().map(|&g| xlogx(g)).sum::<f64>()
}

/// `F_B(γ) = U(γ) − H_B(γ)`.
pub fn bethe_free_energy(gamma: &DoublyStochasticPoint, theta: &RationalMatrix) -> Result<f64> {
    check_shape(gamma, theta)?;
    let u = average_energy(gamma.entries(), gamma.n(), &log_theta(theta))?;
    Ok(u - bethe_entropy(gamma.entries()))
}

/// `F_scS(γ) = U(γ) − H_scS(γ)`.
pub fn scaled_sinkhorn_free_energy(gamma: &DoublyStochasticPoint, theta: &RationalMatrix) -> Result<f64> {
    check_shape(gamma, theta)?;
    let u = average_energy(gamma.entries(), gamma.n(), &log_theta(theta))?;
    Ok(u - sinkhorn_entropy(gamma.entries(), gamma.n()))
}

pub(crate) fn require_positive_permanent(theta: &RationalMatrix) -> Result<()> {
    if theta.support().has_perfect_matching() {
        Ok(())
    } else {
        Err(Error::EmptySupport)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(g: f64) -> DoublyStochasticPoint {
        DoublyStochasticPoint::new(2, alloc::vec![g, 1.0 - g, 1.0 - g, g]).unwrap()
    }

    #[test]
    fn bethe_vanishes_on_all_ones() {
        let theta = RationalMatrix::ones(2);
        for g in [0.0, 0.25, 0.5] {
            assert!(bethe_free_energy(&point(g), &theta).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn permutation_points() {
        let theta = RationalMatrix::from_integers(&[[1, 2, 3], [4, 5, 6], [7, 8, 9]]).unwrap();
        let sigma = Permutation::new(alloc::vec![2, 0, 1]).unwrap();
        let p = DoublyStochasticPoint::from_permutation(&sigma);
        let expect = -(3f64.ln() + 4f64.ln() + 8f64.ln());
        assert!((bethe_free_energy(&p, &theta).unwrap() - expect).abs() < 1e-12);
        assert!((scaled_sinkhorn_free_energy(&p, &theta).unwrap() - (3.0 + expect)).abs() < 1e-12);
        let id = RationalMatrix::identity(3);
        let i = DoublyStochasticPoint::from_permutation(&Permutation::identity(3));
        assert_eq!(bethe_free_energy(&i, &id).unwrap(), 0.0);
    }

    #[test]
    fn sinkhorn_uniform_on_all_ones() {
        for n in 1..=5 {
            let f = scaled_sinkhorn_free_energy(&DoublyStochasticPoint::uniform(n), &RationalMatrix::ones(n))
                .unwrap();
            let nf = n as f64;
            assert!((f - (nf - nf * nf.ln())).abs() < 1e-12);
        }
        let u = DoublyStochasticPoint::uniform(2);
        assert!((bethe_entropy(u.entries())).abs() < 1e-15);
        assert!((sinkhorn_entropy(u.entries(), 2) - (-2.0 + 2.0 * 2f64.ln())).abs() < 1e-15);
    }

    #[test]
    fn support_violation() {
        let theta = RationalMatrix::identity(2);
        assert!(matches!(
            bethe_free_energy(&point(0.5), &theta),
            Err(Error::SupportViolation { row: 0, col: 1 })
        ));
        assert!(DoublyStochasticPoint::new(2, alloc::vec![0.5, 0.5, 0.5, 0.6]).is_err());
    }
}
