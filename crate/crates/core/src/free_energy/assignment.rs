//! Minimum-cost perfect assignment (Hungarian method with potentials).

use alloc::vec;

use crate::permutation::Permutation;

/// Permutation `σ` minimizing `Σᵢ cost(i, σ(i))` over a row-major `n × n`
/// cost matrix. Infinite cells are forbidden. Returns `None` when no finite
/// assignment exists.
pub fn min_cost_assignment(cost: &[f64], n: usize) -> Option<Permutation> {
    assert_eq!(cost.len(), n * n, "cost must be n*n");
    if n == 0 {
        return Some(Permutation::identity(0));
    }
    // one-based potentials; column 0 is the virtual start
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let c = cost[(i0 - 1) * n + (j - 1)];
                if c.is_finite() {
                    let cur = c - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if !delta.is_finite() {
                return None;
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut images = vec![0usize; n];
    for j in 1..=n {
        images[owner[j] - 1] = j - 1;
    }
    let sigma = Permutation::new(images).expect("assignment is a bijection");
    if (0..n).all(|i| cost[i * n + sigma.apply(i)].is_finite()) {
        Some(sigma)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    fn assignment_cost(cost: &[f64], n: usize, sigma: &Permutation) -> f64 {
        (0..n).map(|i| cost[i * n + sigma.apply(i)]).sum()
    }

    fn brute(cost: &[f64], n: usize) -> f64 {
        Permutation::all(n)
            .iter()
            .map(|s| assignment_cost(cost, n, s))
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn matches_brute_force() {
        let mut state = 0x2545_f491_4f6c_dd1du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state % 1000) as f64 / 7.0 - 50.0
        };
        for n in 1..=6 {
            for _ in 0..20 {
                let mut cost: Vec<f64> = (0..n * n).map(|_| next()).collect();
                if n > 2 {
                    cost[1] = f64::INFINITY;
                    cost[n + 2] = f64::INFINITY;
                }
                let sigma = min_cost_assignment(&cost, n).unwrap();
                let got = assignment_cost(&cost, n, &sigma);
                assert!((got - brute(&cost, n)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn infeasible_support() {
        let inf = f64::INFINITY;
        let cost = [1.0, inf, 2.0, inf];
        assert!(min_cost_assignment(&cost, 2).is_none());
        let diag = [0.0, inf, inf, 0.0];
        assert_eq!(min_cost_assignment(&diag, 2).unwrap(), Permutation::identity(2));
    }
}
