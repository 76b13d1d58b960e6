//! Matching freshly extracted roots to the previous sample.

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `perm[i]` is the index in the candidate list assigned to previous root `i`.
    pub perm: Vec<usize>,
    /// `Σ |prev_i - cand_{perm[i]}|²`.
    pub cost: f64,
    /// Smallest cost increase produced by swapping two assignments, with the
    /// pair (0-based, previous order). `None` for a single root.
    pub swap_margin: Option<(f64, usize, usize)>,
}

impl Assignment {
    pub fn apply(&self, cand: &[Complex64]) -> Vec<Complex64> {
        self.perm.iter().map(|&j| cand[j]).collect()
    }

    /// Whether a pairwise swap is within `threshold` of the optimum.
    pub fn is_ambiguous(&self, threshold: f64) -> bool {
        self.swap_margin.is_some_and(|(m, _, _)| m < threshold)
    }
}

/// Minimum-cost matching under squared distance (Hungarian method).
pub fn track_assignment(prev: &[Complex64], cand: &[Complex64]) -> Assignment {
    assert_eq!(
        prev.len(),
        cand.len(),
        "assignment needs equal-length root lists"
    );
    let n = prev.len();
    let cost = |i: usize, j: usize| (prev[i] - cand[j]).norm_sqr();

    // potentials formulation, rows/cols 1-based with a sentinel column 0
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut col_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        col_row[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = col_row[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut perm = vec![0; n];
    for j in 1..=n {
        perm[col_row[j] - 1] = j - 1;
    }
    let total = (0..n).map(|i| cost(i, perm[i])).sum();

    let mut swap_margin: Option<(f64, usize, usize)> = None;
    for a in 0..n {
        for b in (a + 1)..n {
            let inc = cost(a, perm[b]) + cost(b, perm[a]) - cost(a, perm[a]) - cost(b, perm[b]);
            if swap_margin.map_or(true, |(m, _, _)| inc < m) {
                swap_margin = Some((inc, a, b));
            }
        }
    }
    Assignment {
        perm,
        cost: total,
        swap_margin,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn brute(prev: &[Complex64], cand: &[Complex64]) -> f64 {
        fn rec(prev: &[Complex64], cand: &[Complex64], used: &mut Vec<bool>, i: usize) -> f64 {
            if i == prev.len() {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for j in 0..cand.len() {
                if !used[j] {
                    used[j] = true;
                    best = best.min((prev[i] - cand[j]).norm_sqr() + rec(prev, cand, used, i + 1));
                    used[j] = false;
                }
            }
            best
        }
        rec(prev, cand, &mut vec![false; cand.len()], 0)
    }

    #[test]
    fn reorders_shuffled_roots() {
        let prev = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 1.0), c(-1.0, -1.0)];
        let cand = [c(0.01, 1.0), c(-1.0, -0.98), c(0.0, 0.02), c(1.01, 0.0)];
        let a = track_assignment(&prev, &cand);
        assert_eq!(a.perm, vec![2, 3, 0, 1]);
        assert!(!a.is_ambiguous(1e-8));
    }

    #[test]
    fn optimal_against_brute_force() {
        let mut s = 1u64;
        let mut next = || {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for n in 1..=6 {
            for _ in 0..20 {
                let prev: Vec<_> = (0..n).map(|_| c(next(), next())).collect();
                let cand: Vec<_> = (0..n).map(|_| c(next(), next())).collect();
                let a = track_assignment(&prev, &cand);
                assert!((a.cost - brute(&prev, &cand)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn flags_symmetric_configurations() {
        let prev = [c(0.0, 0.0), c(0.0, 0.0)];
        let cand = [c(1.0, 0.0), c(-1.0, 0.0)];
        let a = track_assignment(&prev, &cand);
        assert!(a.is_ambiguous(1e-8));
    }
}
