//! Frank–Wolfe minimization of the Bethe free energy over `Γ_n(θ)`.
//!
//! Vertices of `Γ_n(θ)` are permutation matrices inside `supp(θ)`, so the
//! linear minimization oracle is a min-cost assignment. The iterate is kept
//! as an explicit convex combination of those vertices.

use alloc::vec;
use alloc::vec::Vec;

use super::assignment::min_cost_assignment;
use super::sinkhorn::sinkhorn_scale;
use super::{log_theta, require_positive_permanent, xlogx, DoublyStochasticPoint, MinimizationReport};
use super::{DEFAULT_MAX_ITER, DEFAULT_TOLERANCE};
use crate::matrix::RationalMatrix;
use crate::permutation::Permutation;
use crate::Result;

const ROUNDING_SLACK: f64 = 16.0 * f64::EPSILON;

/// Step rule and direction family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FwVariant {
    /// Frank–Wolfe direction, step `2/(t+2)`.
    Vanilla,
    /// Frank–Wolfe direction, exact line search.
    LineSearch,
    /// Frank–Wolfe or away direction, exact line search.
    AwayStep,
    /// Mass moved from the worst active vertex to the oracle vertex.
    Pairwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FwInit {
    /// Sinkhorn fixed point split into permutations; falls back to
    /// `CellCover` if scaling does not converge.
    Sinkhorn,
    /// Uniform average of, for every cell of `supp(θ)` lying on a positive
    /// diagonal, the heaviest permutation through that cell.
    CellCover,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrankWolfeOptions {
    /// Stop once the duality gap is at most this.
    pub tol: f64,
    pub max_iter: u64,
    pub variant: FwVariant,
    pub init: FwInit,
    /// Entries are clamped to `[ε, 1 − ε]` when taking logarithms in the
    /// gradient.
    pub epsilon: f64,
}

impl Default for FrankWolfeOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOLERANCE,
            max_iter: DEFAULT_MAX_ITER,
            variant: FwVariant::Pairwise,
            init: FwInit::Sinkhorn,
            epsilon: 1e-12,
        }
    }
}

/// `perm_B(θ) = exp(−min F_B)` with default options.
pub fn minimize_bethe(theta: &RationalMatrix, tol: f64, max_iter: u64) -> Result<MinimizationReport> {
    minimize_bethe_with(
        theta,
        &FrankWolfeOptions {
            tol,
            max_iter,
            ..FrankWolfeOptions::default()
        },
    )
}

struct Problem {
    n: usize,
    log_theta: Vec<f64>,
    cells: Vec<usize>,
    eps: f64,
}

impl Problem {
    fn objective(&self, x: &[f64]) -> f64 {
        self.cells
            .iter()
            .map(|&k| -x[k] * self.log_theta[k] + xlogx(x[k]) - xlogx(1.0 - x[k]))
            .sum()
    }

    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        g.iter_mut().for_each(|v| *v = f64::INFINITY);
        for &k in &self.cells {
            g[k] = self.partial(x[k], k);
        }
    }

    fn partial(&self, v: f64, k: usize) -> f64 {
        let lo = self.eps;
        -self.log_theta[k] + libm::log(v.max(lo)) + libm::log((1.0 - v).max(lo)) + 2.0
    }

    /// `φ'(t)` for `φ(t) = F(x + t·d)`.
    fn slope(&self, x: &[f64], d: &[f64], t: f64) -> f64 {
        self.cells
            .iter()
            .filter(|&&k| d[k] != 0.0)
            .map(|&k| self.partial(x[k] + t * d[k], k) * d[k])
            .sum()
    }

    fn vertex_value(&self, g: &[f64], sigma: &Permutation) -> f64 {
        (0..self.n).map(|i| g[i * self.n + sigma.apply(i)]).sum()
    }

    fn exact_step(&self, x: &[f64], d: &[f64], t_max: f64) -> f64 {
        if self.slope(x, d, t_max) <= 0.0 {
            return t_max;
        }
        let (mut lo, mut hi) = (0.0, t_max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.slope(x, d, mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        lo
    }
}

struct ActiveSet {
    n: usize,
    vertices: Vec<(Permutation, f64)>,
}

impl ActiveSet {
    fn point(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n * self.n];
        for (s, w) in &self.vertices {
            for i in 0..self.n {
                x[i * self.n + s.apply(i)] += w;
            }
        }
        x
    }

    fn weight_mut(&mut self, sigma: &Permutation) -> &mut f64 {
        if let Some(pos) = self.vertices.iter().position(|(s, _)| s == sigma) {
            &mut self.vertices[pos].1
        } else {
            self.vertices.push((sigma.clone(), 0.0));
            &mut self.vertices.last_mut().expect("just pushed").1
        }
    }

    fn weight(&self, sigma: &Permutation) -> f64 {
        self.vertices
            .iter()
            .find(|(s, _)| s == sigma)
            .map_or(0.0, |(_, w)| *w)
    }

    fn scale(&mut self, f: f64) {
        self.vertices.iter_mut().for_each(|(_, w)| *w *= f);
    }

    fn prune(&mut self) {
        self.vertices.retain(|(_, w)| *w > 0.0);
        let total: f64 = self.vertices.iter().map(|(_, w)| w).sum();
        self.scale(1.0 / total);
    }
}

fn permutation_direction(n: usize, add: &Permutation, sub: &[f64], d: &mut [f64]) {
    for (dk, &xk) in d.iter_mut().zip(sub) {
        *dk = -xk;
    }
    for i in 0..n {
        d[i * n + add.apply(i)] += 1.0;
    }
}

fn cell_cover(problem: &Problem) -> Vec<(Permutation, f64)> {
    let n = problem.n;
    let base: Vec<f64> = problem.log_theta.iter().map(|&l| -l).collect();
    let mut found: Vec<Permutation> = Vec::new();
    for &k in &problem.cells {
        let (r, c) = (k / n, k % n);
        let mut cost = base.clone();
        for j in (0..n).filter(|&j| j != c) {
            cost[r * n + j] = f64::INFINITY;
        }
        for i in (0..n).filter(|&i| i != r) {
            cost[i * n + c] = f64::INFINITY;
        }
        if let Some(sigma) = min_cost_assignment(&cost, n) {
            if !found.contains(&sigma) {
                found.push(sigma);
            }
        }
    }
    let w = 1.0 / found.len() as f64;
    found.into_iter().map(|s| (s, w)).collect()
}

/// Splits a doubly stochastic matrix into weighted permutations by greedily
/// peeling the assignment of largest product.
fn birkhoff_split(n: usize, gamma: &[f64]) -> Vec<(Permutation, f64)> {
    let mut rest = gamma.to_vec();
    let mut parts: Vec<(Permutation, f64)> = Vec::new();
    let mut mass = 0.0;
    while mass < 1.0 - 1e-12 && parts.len() <= n * n {
        let cost: Vec<f64> = rest
            .iter()
            .map(|&v| if v > 1e-15 { -libm::log(v) } else { f64::INFINITY })
            .collect();
        let Some(sigma) = min_cost_assignment(&cost, n) else {
            break;
        };
        let w = (0..n)
            .map(|i| rest[i * n + sigma.apply(i)])
            .fold(f64::INFINITY, f64::min);
        for i in 0..n {
            rest[i * n + sigma.apply(i)] -= w;
        }
        mass += w;
        parts.push((sigma, w));
    }
    parts
}

/// Frank–Wolfe over `Γ_n(θ)` for the Bethe free energy.
///
/// The duality gap `⟨∇F(x), x − s⟩`, with `s` the oracle vertex, bounds the
/// suboptimality of `x`. When the gap does not reach `tol` within
/// `max_iter` iterations the report carries `converged = false`.
pub fn minimize_bethe_with(
    theta: &RationalMatrix,
    options: &FrankWolfeOptions,
) -> Result<MinimizationReport> {
    require_positive_permanent(theta)?;
    let n = theta.n();
    let lt = log_theta(theta);
    let cells = (0..n * n).filter(|&k| lt[k] > f64::NEG_INFINITY).collect();
    let problem = Problem {
        n,
        log_theta: lt,
        cells,
        eps: options.epsilon,
    };

    let mut active = ActiveSet {
        n,
        vertices: Vec::new(),
    };
    if options.init == FwInit::Sinkhorn {
        let scaling = sinkhorn_scale(theta, 1e-12, 10_000);
        if scaling.converged {
            active.vertices = birkhoff_split(n, &scaling.scaled);
        }
    }
    if active.vertices.is_empty() {
        active.vertices = cell_cover(&problem);
    }
    active.prune();

    let mut x = active.point();
    let mut f = problem.objective(&x);
    let mut trace = vec![f];
    let mut g = vec![0.0; n * n];
    let mut d = vec![0.0; n * n];
    let mut gap = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    let mut stalled = 0;

    while iterations < options.max_iter {
        problem.gradient(&x, &mut g);
        let s = min_cost_assignment(&g, n).expect("support admits a perfect matching");
        let gx: f64 = problem.cells.iter().map(|&k| g[k] * x[k]).sum();
        gap = gx - problem.vertex_value(&g, &s);
        if gap <= options.tol {
            converged = true;
            break;
        }
        let away = active
            .vertices
            .iter()
            .map(|(v, w)| (problem.vertex_value(&g, v), v, *w))
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(val, v, w)| (val, v.clone(), w))
            .expect("active set is never empty");

        iterations += 1;
        let use_away = options.variant == FwVariant::AwayStep && away.0 - gx > gap && away.2 < 1.0;
        let (t_max, kind) = match options.variant {
            FwVariant::Vanilla | FwVariant::LineSearch => {
                permutation_direction(n, &s, &x, &mut d);
                (1.0, Step::Toward)
            }
            FwVariant::AwayStep if !use_away => {
                permutation_direction(n, &s, &x, &mut d);
                (1.0, Step::Toward)
            }
            FwVariant::AwayStep => {
                permutation_direction(n, &away.1, &x, &mut d);
                d.iter_mut().for_each(|v| *v = -*v);
                (away.2 / (1.0 - away.2), Step::Away)
            }
            FwVariant::Pairwise => {
                d.iter_mut().for_each(|v| *v = 0.0);
                for i in 0..n {
                    d[i * n + s.apply(i)] += 1.0;
                    d[i * n + away.1.apply(i)] -= 1.0;
                }
                (away.2, Step::Pairwise)
            }
        };

        let mut t = if options.variant == FwVariant::Vanilla {
            2.0 / (iterations as f64 + 2.0)
        } else {
            problem.exact_step(&x, &d, t_max)
        };
        let mut candidate = trial(&x, &d, t);
        if options.variant != FwVariant::Vanilla {
            // rounding noise in F is tolerated; real increases are not
            let ceiling = f + ROUNDING_SLACK * f.abs().max(1.0);
            let mut halvings = 0;
            while problem.objective(&candidate) > ceiling && halvings < 60 {
                t *= 0.5;
                candidate = trial(&x, &d, t);
                halvings += 1;
            }
            if problem.objective(&candidate) > ceiling {
                t = 0.0;
            }
        }
        if t == 0.0 {
            stalled += 1;
            trace.push(f);
            if stalled >= 3 {
                break;
            }
            continue;
        }
        stalled = 0;

        match kind {
            Step::Toward => {
                active.scale(1.0 - t);
                *active.weight_mut(&s) += t;
                if t >= 1.0 {
                    active.vertices.retain(|(v, _)| v == &s);
                }
            }
            Step::Away => {
                active.scale(1.0 + t);
                let w = active.weight_mut(&away.1);
                if t >= t_max {
                    *w = 0.0;
                } else {
                    *w -= t;
                }
            }
            Step::Pairwise => {
                *active.weight_mut(&s) += t;
                let w = active.weight_mut(&away.1);
                if t >= t_max {
                    *w = 0.0;
                } else {
                    *w -= t;
                }
            }
        }
        active.prune();
        debug_assert!(active.weight(&s) >= 0.0);
        x = active.point();
        f = problem.objective(&x);
        trace.push(f);
    }

    Ok(MinimizationReport {
        minimizer: DoublyStochasticPoint::from_raw(n, x),
        objective: f,
        value: libm::exp(-f),
        iterations,
        gap_or_residual: gap,
        converged,
        trace,
    })
}

#[derive(Clone, Copy)]
enum Step {
    Toward,
    Away,
    Pairwise,
}

fn trial(x: &[f64], d: &[f64], t: f64) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + t * b).collect()
}
