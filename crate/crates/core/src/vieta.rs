//! Maps between root space and coefficient space.
//!
//! The polynomial of interest is
//!
//! ```text
//! p(z) = (z - x1)^m1 ∏_{n=1..N} (z - x_n) = z^{N+m1} + Σ_{n=1..N+m1} y_n z^{N+m1-n}
//! ```
//!
//! so `x1` carries multiplicity `m1 + 1`. The auxiliary coefficients `ξ_n`
//! belong to the simple-root polynomial `∏ (z - x_n)`.

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::coeffs::{elem_sym_all, CoefficientTables};
use crate::poly::Polynomial;

/// Two roots closer than the collision threshold.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("roots x{i} and x{j} are {distance:.3e} apart (threshold {threshold:.3e})")]
pub struct CollisionError {
    pub i: usize,
    pub j: usize,
    pub distance: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootState {
    /// Distinct roots; `x[0]` carries multiplicity `m1 + 1`.
    pub x: Vec<Complex64>,
    pub xdot: Option<Vec<Complex64>>,
    pub m1: usize,
}

impl RootState {
    pub fn new(x: Vec<Complex64>, m1: usize) -> Self {
        Self { x, xdot: None, m1 }
    }

    pub fn with_velocities(x: Vec<Complex64>, xdot: Vec<Complex64>, m1: usize) -> Self {
        assert_eq!(
            x.len(),
            xdot.len(),
            "positions and velocities differ in length"
        );
        Self {
            x,
            xdot: Some(xdot),
            m1,
        }
    }

    pub fn n_roots(&self) -> usize {
        self.x.len()
    }

    /// Roots with multiplicity: `x1` repeated `m1 + 1` times, then `x2..xN`.
    pub fn multiset(&self) -> Vec<Complex64> {
        multiset(&self.x, self.m1)
    }

    pub fn max_abs(&self) -> f64 {
        self.x.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn min_gap(&self) -> f64 {
        min_gap(&self.x)
    }

    /// Default collision threshold `1e-8 (1 + max |x_n|)`.
    pub fn collision_threshold(&self) -> f64 {
        collision_threshold(&self.x)
    }

    pub fn check_distinct(&self, threshold: f64) -> Result<(), CollisionError> {
        check_distinct(&self.x, threshold)
    }
}

pub(crate) fn multiset(x: &[Complex64], m1: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(x.len() + m1);
    out.extend(std::iter::repeat(x[0]).take(m1 + 1));
    out.extend_from_slice(&x[1..]);
    out
}

pub fn min_gap(x: &[Complex64]) -> f64 {
    let mut gap = f64::INFINITY;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            gap = gap.min((x[i] - x[j]).norm());
        }
    }
    gap
}

pub fn collision_threshold(x: &[Complex64]) -> f64 {
    1e-8 * (1.0 + x.iter().fold(0.0_f64, |m, z| m.max(z.norm())))
}

pub fn check_distinct(x: &[Complex64], threshold: f64) -> Result<(), CollisionError> {
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            let distance = (x[i] - x[j]).norm();
            if !(distance > threshold) {
                return Err(CollisionError {
                    i: i + 1,
                    j: j + 1,
                    distance,
                    threshold,
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffState {
    /// `y_1..y_N`.
    pub y: Vec<Complex64>,
    pub ydot: Option<Vec<Complex64>>,
    pub t: f64,
}

/// Absolute-tolerance scale `max(1, max |x_n|)^{N+m1}`.
pub fn scale(x: &[Complex64], m1: usize) -> f64 {
    let r = x.iter().fold(1.0_f64, |m, z| m.max(z.norm()));
    r.powi((x.len() + m1) as i32)
}

/// All `N + m1` coefficients `y_1..y_{N+m1}` of the multiplicity-structured polynomial.
pub fn coeffs_from_roots(state: &RootState) -> Vec<Complex64> {
    let e = elem_sym_all(&state.multiset());
    e.iter()
        .enumerate()
        .skip(1)
        .map(|(j, &v)| if j % 2 == 0 { v } else { -v })
        .collect()
}

fn without_one(multiset: &[Complex64], idx: usize) -> Vec<Complex64> {
    let mut v = multiset.to_vec();
    v.remove(idx);
    v
}

/// Time derivatives `ẏ_1..ẏ_N` along the root velocities.
///
/// Each `∂σ_j/∂x_k` is the derivative of the product form: removing one
/// factor `(z - x_k)`, weighted by the multiplicity of `x_k` in the multiset
/// (`m1 + 1` for `x1`, one otherwise).
///
/// Panics if `state.xdot` is `None`.
pub fn coeff_derivs_from_roots(state: &RootState) -> Vec<Complex64> {
    let xdot = state
        .xdot
        .as_ref()
        .expect("coefficient derivatives need root velocities");
    let big_n = state.n_roots();
    let ms = state.multiset();
    let mut out = vec![Complex64::zero(); big_n];
    for (k, &vk) in xdot.iter().enumerate() {
        if vk.is_zero() {
            continue;
        }
        // x1 sits in slots 0..=m1, x_k (k ≥ 2) in slot m1 + k - 1.
        let (slot, weight) = if k == 0 {
            (0, (state.m1 + 1) as f64)
        } else {
            (state.m1 + k, 1.0)
        };
        let reduced = elem_sym_all(&without_one(&ms, slot));
        for j in 1..=big_n {
            let term = reduced[j - 1] * vk * weight;
            if j % 2 == 0 {
                out[j - 1] += term;
            } else {
                out[j - 1] -= term;
            }
        }
    }
    out
}

pub(crate) fn powers(z: Complex64, up_to: usize) -> Vec<Complex64> {
    let mut p = Vec::with_capacity(up_to + 1);
    let mut acc = Complex64::one();
    for _ in 0..=up_to {
        p.push(acc);
        acc *= z;
    }
    p
}

/// `ξ_n = y_n + Σ_{j<n} α_{nj} x1^{n-j} y_j - γ_n x1^n` for `n = 1..N`.
///
/// Only the first `N` entries of `y` are read.
pub fn xi_from_y(y: &[Complex64], x1: Complex64, tables: &CoefficientTables) -> Vec<Complex64> {
    let big_n = tables.n_roots();
    let pw = powers(x1, big_n);
    (1..=big_n)
        .map(|n| {
            let mut acc = y[n - 1] - pw[n] * tables.gamma_f(n);
            for j in 1..n {
                acc += pw[n - j] * y[j - 1] * tables.alpha_f(n, j);
            }
            acc
        })
        .collect()
}

/// `ξ_n = (-1)^n σ_n(x_1..x_N)`, straight from the distinct roots.
pub fn xi_from_roots(x: &[Complex64]) -> Vec<Complex64> {
    elem_sym_all(x)
        .iter()
        .enumerate()
        .skip(1)
        .map(|(j, &v)| if j % 2 == 0 { v } else { -v })
        .collect()
}

/// Trailing coefficients `y_{N+1}..y_{N+m1}` from the leading `N` and `x1`.
pub fn extend_y(y: &[Complex64], x1: Complex64, tables: &CoefficientTables) -> Vec<Complex64> {
    let big_n = tables.n_roots();
    let m1 = tables.m1();
    let pw = powers(x1, big_n + m1);
    (1..=m1)
        .map(|k| {
            let lead = if k % 2 == 0 { 1.0 } else { -1.0 } * tables.binom_m1_f(k as i64);
            let mut acc = pw[k] * y[big_n - 1] * lead + pw[big_n + k] * tables.phi_f(k);
            for j in 1..big_n {
                acc += pw[big_n + k - j] * y[j - 1] * tables.theta_f(k, j);
            }
            acc
        })
        .collect()
}

/// Every row of `A(x1) ξ + a(x1)`, i.e. `y_1..y_{N+m1}` rebuilt from `ξ`.
pub fn coeffs_from_xi(
    xi: &[Complex64],
    x1: Complex64,
    tables: &CoefficientTables,
) -> Vec<Complex64> {
    let big_n = tables.n_roots();
    let m1 = tables.m1();
    let pw = powers(x1, big_n + m1);
    (1..=big_n + m1)
        .map(|n| {
            let mut acc = Complex64::zero();
            // j = 0 term carries ξ_0 = 1; entries beyond N vanish.
            for j in 0..=n.min(big_n) {
                let b = tables.binom_m1_f((n - j) as i64);
                if b == 0.0 {
                    continue;
                }
                let xi_j = if j == 0 { Complex64::one() } else { xi[j - 1] };
                let s = if (n + j) % 2 == 0 { 1.0 } else { -1.0 };
                acc += pw[n - j] * xi_j * (b * s);
            }
            acc
        })
        .collect()
}

/// Max-abs mismatch between `y_full` and the rows of `A ξ + a` with `ξ`
/// taken from the leading `N` coefficients. Vanishes on consistent data.
pub fn extension_residual(y_full: &[Complex64], x1: Complex64, tables: &CoefficientTables) -> f64 {
    let xi = xi_from_y(y_full, x1, tables);
    coeffs_from_xi(&xi, x1, tables)
        .iter()
        .zip(y_full)
        .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
}

/// Monic `z^{N+m1} + Σ y_n z^{N+m1-n}`.
pub fn assemble_polynomial(y_full: &[Complex64]) -> Polynomial {
    let mut coeffs = Vec::with_capacity(y_full.len() + 1);
    coeffs.push(Complex64::one());
    coeffs.extend_from_slice(y_full);
    Polynomial::from_descending(coeffs)
}

/// The degree-`N` equation `(N+1)_{m1} z^N + Σ_j (N+1-j)_{m1} y_j z^{N-j} = 0`,
/// which has `x1` as a simple root.
pub fn multiple_root_equation(y: &[Complex64], tables: &CoefficientTables) -> Polynomial {
    let big_n = tables.n_roots();
    let mut coeffs = Vec::with_capacity(big_n + 1);
    coeffs.push(Complex64::new(tables.weight_f(0), 0.0));
    for j in 1..=big_n {
        coeffs.push(y[j - 1] * tables.weight_f(j));
    }
    Polynomial::from_descending(coeffs)
}
