//! Root-space equations of motion induced by a coefficient evolution.
//!
//! Everything here is pointwise: given the roots (and velocities) at one
//! instant together with `ẏ` or `ÿ`, return `ẋ` or `ẍ`. Index `n` is 1-based
//! and `n = 1` always refers to the multiple root.

use std::sync::Arc;

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::coeffs::{CoeffError, CoefficientTables};
use crate::models::{GeneratingModel, ModelError, Order};
use crate::vieta::{
    check_distinct, coeff_derivs_from_roots, coeffs_from_roots, collision_threshold, powers,
    CollisionError, RootState,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error(transparent)]
    Collision(#[from] CollisionError),
    #[error("root velocities are required")]
    MissingVelocities,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("root index {0} out of range")]
    IndexOutOfRange(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Coefficients(#[from] CoeffError),
}

/// How the long products `∏ (x_n - x_ℓ)` are accumulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProductMode {
    #[default]
    Plain,
    /// Sum of `ln |·|` and of arguments, exponentiated once at the end.
    LogMagnitude,
}

impl ProductMode {
    /// Log-magnitude accumulation once the polynomial degree `N + m1` exceeds 30.
    pub fn auto(n_roots: usize, m1: usize) -> Self {
        if n_roots + m1 > 30 {
            ProductMode::LogMagnitude
        } else {
            ProductMode::Plain
        }
    }

    fn product(self, factors: impl Iterator<Item = Complex64>) -> Complex64 {
        match self {
            ProductMode::Plain => factors.fold(Complex64::one(), |a, f| a * f),
            ProductMode::LogMagnitude => {
                let (mut ln, mut arg) = (0.0, 0.0);
                for f in factors {
                    ln += f.norm().ln();
                    arg += f.arg();
                }
                Complex64::from_polar(ln.exp(), arg)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DynamicsOptions {
    /// Absolute collision threshold; overrides `collision_rel`.
    pub collision_threshold: Option<f64>,
    /// Relative threshold `rel (1 + max |x|)`, `1e-8` by default.
    pub collision_rel: Option<f64>,
    /// Defaults to [`ProductMode::auto`].
    pub product_mode: Option<ProductMode>,
}

/// Precomputed root geometry at one instant.
pub struct Kinematics<'a> {
    x: &'a [Complex64],
    tables: &'a CoefficientTables,
    mode: ProductMode,
    /// `P_n = ∏_{ℓ≠n} (x_n - x_ℓ)`, 0-based.
    p: Vec<Complex64>,
    pw1: Vec<Complex64>,
}

impl<'a> Kinematics<'a> {
    pub fn new(
        x: &'a [Complex64],
        tables: &'a CoefficientTables,
        opts: &DynamicsOptions,
    ) -> Result<Self, DynamicsError> {
        let big_n = tables.n_roots();
        if x.len() != big_n {
            return Err(DynamicsError::DimensionMismatch {
                expected: big_n,
                got: x.len(),
            });
        }
        let threshold = match (opts.collision_threshold, opts.collision_rel) {
            (Some(abs), _) => abs,
            (None, Some(rel)) => rel * (1.0 + x.iter().fold(0.0_f64, |m, z| m.max(z.norm()))),
            (None, None) => collision_threshold(x),
        };
        check_distinct(x, threshold)?;
        let mode = opts
            .product_mode
            .unwrap_or_else(|| ProductMode::auto(big_n, tables.m1()));
        let p = (0..big_n)
            .map(|n| mode.product((0..big_n).filter(|&l| l != n).map(|l| x[n] - x[l])))
            .collect();
        Ok(Self {
            x,
            tables,
            mode,
            p,
            pw1: powers(x[0], big_n),
        })
    }

    fn n(&self) -> usize {
        self.x.len()
    }

    fn check_len(&self, v: &[Complex64]) -> Result<(), DynamicsError> {
        if v.len() != self.n() {
            return Err(DynamicsError::DimensionMismatch {
                expected: self.n(),
                got: v.len(),
            });
        }
        Ok(())
    }

    /// `Σ_j (N-j+1)_{m1} / (m1+1)! · x1^{N-j} v_j`.
    fn weighted_sum(&self, v: &[Complex64]) -> Complex64 {
        let big_n = self.n();
        (1..=big_n)
            .map(|j| v[j - 1] * self.pw1[big_n - j] * self.tables.scaled_weight_f(j))
            .sum()
    }

    /// `∏_{ℓ≥2, ℓ≠n} (x_n - x_ℓ)(x1 - x_ℓ)` for `n ≥ 2` (1-based).
    fn cross(&self, n: usize) -> Complex64 {
        let (x, xn, x1) = (self.x, self.x[n - 1], self.x[0]);
        self.mode.product(
            (1..self.n())
                .filter(|&l| l != n - 1)
                .flat_map(|l| [xn - x[l], x1 - x[l]]),
        )
    }

    fn drift_sum(&self, xdot: &[Complex64]) -> Complex64 {
        let (x1, v1) = (self.x[0], xdot[0]);
        let m1 = self.tables.m1() as f64;
        (1..self.n())
            .map(|j| (v1 * m1 + xdot[j] * 2.0) / (x1 - self.x[j]))
            .sum()
    }

    pub fn x1_dot(&self, ydot: &[Complex64]) -> Result<Complex64, DynamicsError> {
        self.check_len(ydot)?;
        Ok(-self.weighted_sum(ydot) / self.p[0])
    }

    pub fn x1_ddot(
        &self,
        xdot: &[Complex64],
        yddot: &[Complex64],
    ) -> Result<Complex64, DynamicsError> {
        self.check_len(xdot)?;
        self.check_len(yddot)?;
        Ok(-self.weighted_sum(yddot) / self.p[0] + xdot[0] * self.drift_sum(xdot))
    }

    /// `G1 - G2 = Σ_m x_n^{N-m} [m γ_m x1^{m-1} - Σ_j α_{mj} (m-j) x1^{m-j-1} y_j]`.
    fn g_diff(&self, pwn: &[Complex64], y: &[Complex64]) -> Complex64 {
        let (t, big_n, pw1) = (self.tables, self.n(), &self.pw1);
        let mut acc = Complex64::zero();
        for m in 1..=big_n {
            let mut inner = pw1[m - 1] * (m as f64 * t.gamma_f(m));
            for j in 1..m {
                inner -= pw1[m - j - 1] * y[j - 1] * (t.alpha_f(m, j) * (m - j) as f64);
            }
            acc += pwn[big_n - m] * inner;
        }
        acc
    }

    pub fn h_first(
        &self,
        n: usize,
        y: &[Complex64],
        ydot: &[Complex64],
    ) -> Result<Complex64, DynamicsError> {
        let big_n = self.n();
        if n == 0 || n > big_n {
            return Err(DynamicsError::IndexOutOfRange(n));
        }
        self.check_len(y)?;
        if n == 1 {
            return self.x1_dot(ydot);
        }
        self.check_len(ydot)?;
        let t = self.tables;
        let (xn, x1, pw1) = (self.x[n - 1], self.x[0], &self.pw1);
        let pwn = powers(xn, big_n);
        let mut lin = Complex64::zero();
        for m in 1..=big_n {
            let mut inner = ydot[m - 1];
            for j in 1..m {
                inner += pw1[m - j] * ydot[j - 1] * t.alpha_f(m, j);
            }
            lin += pwn[big_n - m] * inner;
        }
        let d = xn - x1;
        let denom = d * d * self.cross(n) * t.factorial_m1p1_f();
        let s = self.weighted_sum(ydot) * t.factorial_m1p1_f();
        // the bracket in the second term is G2 - G1
        Ok(-lin / self.p[n - 1] + s / denom * self.g_diff(&pwn, y))
    }

    pub fn h_second(
        &self,
        n: usize,
        xdot: &[Complex64],
        y: &[Complex64],
        ydot: &[Complex64],
        yddot: &[Complex64],
    ) -> Result<Complex64, DynamicsError> {
        let big_n = self.n();
        if n == 0 || n > big_n {
            return Err(DynamicsError::IndexOutOfRange(n));
        }
        for v in [xdot, y, ydot, yddot] {
            self.check_len(v)?;
        }
        if n == 1 {
            return self.x1_ddot(xdot, yddot);
        }
        let t = self.tables;
        let (xn, x1, pw1) = (self.x[n - 1], self.x[0], &self.pw1);
        let (vn, v1) = (xdot[n - 1], xdot[0]);
        let pwn = powers(xn, big_n);

        let mut pair = Complex64::zero();
        for l in 0..big_n {
            if l != n - 1 {
                pair += vn * xdot[l] * 2.0 / (xn - self.x[l]);
            }
        }

        let (mut b1, mut b2, mut b3, mut b4, mut b5) = (
            Complex64::zero(),
            Complex64::zero(),
            Complex64::zero(),
            Complex64::zero(),
            Complex64::zero(),
        );
        for m in 1..=big_n {
            let w = pwn[big_n - m];
            b1 += w * yddot[m - 1];
            if m >= 2 {
                b3 += w * pw1[m - 2] * ((m * (m - 1)) as f64 * t.gamma_f(m));
            }
            for j in 1..m {
                let a = t.alpha_f(m, j);
                let k = (m - j) as f64;
                b2 += w * pw1[m - j] * yddot[j - 1] * a;
                b5 += w * pw1[m - j - 1] * ydot[j - 1] * (k * a);
                if j + 2 <= m {
                    b4 += w * pw1[m - j - 2] * y[j - 1] * (k * (k - 1.0) * a);
                }
            }
        }
        let brace = b1 + b2 - v1 * v1 * b3 + v1 * v1 * b4 + v1 * b5 * 2.0;

        let d = xn - x1;
        let denom = d * d * self.cross(n) * t.factorial_m1p1_f();
        let sdd = self.weighted_sum(yddot) * t.factorial_m1p1_f();
        let coupling = sdd / denom + v1 / self.p[n - 1] * self.drift_sum(xdot);

        Ok(pair - brace / self.p[n - 1] + coupling * self.g_diff(&pwn, y))
    }

    pub fn h_first_all(
        &self,
        y: &[Complex64],
        ydot: &[Complex64],
    ) -> Result<Vec<Complex64>, DynamicsError> {
        (1..=self.n()).map(|n| self.h_first(n, y, ydot)).collect()
    }

    pub fn h_second_all(
        &self,
        xdot: &[Complex64],
        y: &[Complex64],
        ydot: &[Complex64],
        yddot: &[Complex64],
    ) -> Result<Vec<Complex64>, DynamicsError> {
        (1..=self.n())
            .map(|n| self.h_second(n, xdot, y, ydot, yddot))
            .collect()
    }

    /// `ξ̇_m` obtained by differentiating `ξ(y, x1)` along `(ẏ, ẋ1)`.
    fn xi_dot(&self, y: &[Complex64], ydot: &[Complex64], v1: Complex64) -> Vec<Complex64> {
        let (t, pw1) = (self.tables, &self.pw1);
        (1..=self.n())
            .map(|m| {
                let mut acc = ydot[m - 1] - pw1[m - 1] * v1 * (m as f64 * t.gamma_f(m));
                for j in 1..m {
                    let a = t.alpha_f(m, j);
                    acc += (pw1[m - j] * ydot[j - 1]
                        + pw1[m - j - 1] * v1 * y[j - 1] * (m - j) as f64)
                        * a;
                }
                acc
            })
            .collect()
    }

    fn xi_ddot(
        &self,
        y: &[Complex64],
        ydot: &[Complex64],
        yddot: &[Complex64],
        v1: Complex64,
        a1: Complex64,
    ) -> Vec<Complex64> {
        let (t, pw1) = (self.tables, &self.pw1);
        (1..=self.n())
            .map(|m| {
                let mf = m as f64;
                let mut acc = yddot[m - 1] - pw1[m - 1] * a1 * (mf * t.gamma_f(m));
                if m >= 2 {
                    acc -= pw1[m - 2] * v1 * v1 * (mf * (mf - 1.0) * t.gamma_f(m));
                }
                for j in 1..m {
                    let a = t.alpha_f(m, j);
                    let k = (m - j) as f64;
                    let mut term = pw1[m - j] * yddot[j - 1]
                        + pw1[m - j - 1] * (v1 * ydot[j - 1] * 2.0 + a1 * y[j - 1]) * k;
                    if j + 2 <= m {
                        term += pw1[m - j - 2] * v1 * v1 * y[j - 1] * (k * (k - 1.0));
                    }
                    acc += term * a;
                }
                acc
            })
            .collect()
    }

    /// `Σ_j x1^{N-j} ξ̇_j - Σ_j (N-j+1)_{m1}/(m1+1)! x1^{N-j} ẏ_j`.
    pub fn remark_identity_first(
        &self,
        xdot: &[Complex64],
        y: &[Complex64],
        ydot: &[Complex64],
    ) -> Result<Complex64, DynamicsError> {
        for v in [xdot, y, ydot] {
            self.check_len(v)?;
        }
        let big_n = self.n();
        let xi = self.xi_dot(y, ydot, xdot[0]);
        let lhs: Complex64 = (1..=big_n).map(|j| self.pw1[big_n - j] * xi[j - 1]).sum();
        Ok(lhs - self.weighted_sum(ydot))
    }

    /// Second-order counterpart, including the `- m1 ẋ1² Σ_k ∏_{ℓ≠k} (x1 - x_ℓ)`
    /// correction (`k, ℓ ≥ 2`).
    pub fn remark_identity_second(
        &self,
        xdot: &[Complex64],
        y: &[Complex64],
        ydot: &[Complex64],
        yddot: &[Complex64],
    ) -> Result<Complex64, DynamicsError> {
        for v in [xdot, y, ydot, yddot] {
            self.check_len(v)?;
        }
        let big_n = self.n();
        let (x1, v1) = (self.x[0], xdot[0]);
        let a1 = self.x1_ddot(xdot, yddot)?;
        let xi = self.xi_ddot(y, ydot, yddot, v1, a1);
        let lhs: Complex64 = (1..=big_n).map(|j| self.pw1[big_n - j] * xi[j - 1]).sum();
        let sym: Complex64 = (1..big_n)
            .map(|k| {
                self.mode
                    .product((1..big_n).filter(|&l| l != k).map(|l| x1 - self.x[l]))
            })
            .sum();
        let m1 = self.tables.m1() as f64;
        Ok(lhs - (self.weighted_sum(yddot) - v1 * v1 * sym * m1))
    }
}

fn kin<'a>(
    x: &'a [Complex64],
    tables: &'a CoefficientTables,
) -> Result<Kinematics<'a>, DynamicsError> {
    Kinematics::new(x, tables, &DynamicsOptions::default())
}

/// `ẋ1` from `ẏ_1..ẏ_N`.
pub fn x1_dot(
    x: &[Complex64],
    ydot: &[Complex64],
    tables: &CoefficientTables,
) -> Result<Complex64, DynamicsError> {
    kin(x, tables)?.x1_dot(ydot)
}

/// `ẍ1` from `ÿ_1..ÿ_N` and the current root velocities.
pub fn x1_ddot(
    x: &[Complex64],
    xdot: &[Complex64],
    yddot: &[Complex64],
    tables: &CoefficientTables,
) -> Result<Complex64, DynamicsError> {
    kin(x, tables)?.x1_ddot(xdot, yddot)
}

/// `ẋ_n` for one root (1-based `n`).
pub fn h_first(
    n: usize,
    x: &[Complex64],
    y: &[Complex64],
    ydot: &[Complex64],
    tables: &CoefficientTables,
) -> Result<Complex64, DynamicsError> {
    kin(x, tables)?.h_first(n, y, ydot)
}

pub fn h_first_all(
    x: &[Complex64],
    y: &[Complex64],
    ydot: &[Complex64],
    tables: &CoefficientTables,
) -> Result<Vec<Complex64>, DynamicsError> {
    kin(x, tables)?.h_first_all(y, ydot)
}

/// `ẍ_n` for one root (1-based `n`).
pub fn h_second(
    n: usize,
    x: &[Complex64],
    xdot: &[Complex64],
    y: &[Complex64],
    ydot: &[Complex64],
    yddot: &[Complex64],
    tables: &CoefficientTables,
) -> Result<Complex64, DynamicsError> {
    kin(x, tables)?.h_second(n, xdot, y, ydot, yddot)
}

pub fn h_second_all(
    x: &[Complex64],
    xdot: &[Complex64],
    y: &[Complex64],
    ydot: &[Complex64],
    yddot: &[Complex64],
    tables: &CoefficientTables,
) -> Result<Vec<Complex64>, DynamicsError> {
    kin(x, tables)?.h_second_all(xdot, y, ydot, yddot)
}

pub fn remark_identity_first(
    x: &[Complex64],
    xdot: &[Complex64],
    y: &[Complex64],
    ydot: &[Complex64],
    tables: &CoefficientTables,
) -> Result<Complex64, DynamicsError> {
    kin(x, tables)?.remark_identity_first(xdot, y, ydot)
}

pub fn remark_identity_second(
    x: &[Complex64],
    xdot: &[Complex64],
    y: &[Complex64],
    ydot: &[Complex64],
    yddot: &[Complex64],
    tables: &CoefficientTables,
) -> Result<Complex64, DynamicsError> {
    kin(x, tables)?.remark_identity_second(xdot, y, ydot, yddot)
}

fn check_pair(x: &[Complex64], expected: usize) -> Result<f64, DynamicsError> {
    if x.len() != expected {
        return Err(DynamicsError::DimensionMismatch {
            expected,
            got: x.len(),
        });
    }
    let threshold = collision_threshold(x);
    check_distinct(x, threshold)?;
    Ok(threshold)
}

/// Closed-form accelerations for two bodies, `f = (f_1, f_2) = ÿ`.
pub fn two_body_rhs(
    x: &[Complex64],
    xdot: &[Complex64],
    f: &[Complex64],
    m1: usize,
) -> Result<[Complex64; 2], DynamicsError> {
    check_pair(x, 2)?;
    if xdot.len() != 2 || f.len() != 2 {
        return Err(DynamicsError::DimensionMismatch {
            expected: 2,
            got: xdot.len().min(f.len()),
        });
    }
    let m = m1 as f64;
    let (x1, x2, v1, v2) = (x[0], x[1], xdot[0], xdot[1]);
    let d = x1 - x2;
    let drift = v1 * (v1 * m + v2 * 2.0) / d;
    let a1 = -(x1 * f[0] * (m + 1.0) + f[1]) / (d * (m + 1.0)) + drift;
    let a2 = ((x1 * m + x2) * f[0] + f[1]) / d - drift * (m + 1.0);
    Ok([a1, a2])
}

/// Closed-form accelerations for three bodies, `f = ÿ`.
pub fn three_body_rhs(
    x: &[Complex64],
    xdot: &[Complex64],
    f: &[Complex64],
    m1: usize,
) -> Result<[Complex64; 3], DynamicsError> {
    check_pair(x, 3)?;
    if xdot.len() != 3 || f.len() != 3 {
        return Err(DynamicsError::DimensionMismatch {
            expected: 3,
            got: xdot.len().min(f.len()),
        });
    }
    let m = m1 as f64;
    let (x1, x2, x3) = (x[0], x[1], x[2]);
    let (v1, v2, v3) = (xdot[0], xdot[1], xdot[2]);
    let (f1, f2, f3) = (f[0], f[1], f[2]);

    let a1 = v1 * ((v1 * m + v2 * 2.0) / (x1 - x2) + (v1 * m + v3 * 2.0) / (x1 - x3))
        - (x1 * x1 * f1 * ((m + 2.0) * (m + 1.0)) + x1 * f2 * (2.0 * (m + 1.0)) + f3 * 2.0)
            / ((x1 - x2) * (x1 - x3) * (2.0 * (m + 1.0)));

    let a2 = (v1 * v1 * (x3 - x1) * (2.0 * m * (m + 1.0))
        + v1 * v2 * (x3 - x2) * (4.0 * (m + 1.0))
        + v2 * v3 * (x1 - x2) * 4.0
        + (x1 * x1 * (m * (m + 1.0)) + x2 * (x1 * m + x2) * 2.0) * f1
        + (x1 * m + x2) * f2 * 2.0
        + f3 * 2.0)
        / ((x1 - x2) * (x2 - x3) * 2.0);

    let a3 = -(v1 * v1 * (x2 - x1) * (2.0 * m * (m + 1.0))
        + v1 * v3 * (x2 - x3) * (4.0 * (m + 1.0))
        + v2 * v3 * (x1 - x3) * 4.0
        + (x1 * x1 * (m * (m + 1.0)) + x3 * (x1 * m + x3) * 2.0) * f1
        + (x1 * m + x3) * f2 * 2.0
        + f3 * 2.0)
        / ((x1 - x3) * (x2 - x3) * 2.0);

    Ok([a1, a2, a3])
}

/// `ẋ = h⁽¹⁾(x)` for a first-order generating model.
#[derive(Debug, Clone)]
pub struct FirstOrderRHS {
    tables: Arc<CoefficientTables>,
    model: GeneratingModel,
    options: DynamicsOptions,
}

impl FirstOrderRHS {
    pub fn new(model: GeneratingModel, m1: usize) -> Result<Self, DynamicsError> {
        if model.order() != Order::First {
            return Err(ModelError::InvalidParameter("expected a first-order model".into()).into());
        }
        let tables = CoefficientTables::shared(model.dimension(), m1)?;
        Ok(Self {
            tables,
            model,
            options: DynamicsOptions::default(),
        })
    }

    pub fn with_options(mut self, options: DynamicsOptions) -> Self {
        self.options = options;
        self
    }

    pub fn tables(&self) -> &CoefficientTables {
        &self.tables
    }

    pub fn eval(&self, t: f64, x: &[Complex64]) -> Result<Vec<Complex64>, DynamicsError> {
        let k = Kinematics::new(x, &self.tables, &self.options)?;
        let big_n = x.len();
        let y = &coeffs_from_roots(&RootState::new(x.to_vec(), self.tables.m1()))[..big_n];
        let ydot = self.model.rhs(t, y, None)?;
        k.h_first_all(y, &ydot)
    }
}

/// `ẍ = h⁽²⁾(x, ẋ)` for a second-order generating model.
#[derive(Debug, Clone)]
pub struct SecondOrderRHS {
    tables: Arc<CoefficientTables>,
    model: GeneratingModel,
    options: DynamicsOptions,
}

impl SecondOrderRHS {
    pub fn new(model: GeneratingModel, m1: usize) -> Result<Self, DynamicsError> {
        if model.order() != Order::Second {
            return Err(
                ModelError::InvalidParameter("expected a second-order model".into()).into(),
            );
        }
        let tables = CoefficientTables::shared(model.dimension(), m1)?;
        Ok(Self {
            tables,
            model,
            options: DynamicsOptions::default(),
        })
    }

    pub fn with_options(mut self, options: DynamicsOptions) -> Self {
        self.options = options;
        self
    }

    pub fn tables(&self) -> &CoefficientTables {
        &self.tables
    }

    pub fn eval(
        &self,
        t: f64,
        x: &[Complex64],
        xdot: &[Complex64],
    ) -> Result<Vec<Complex64>, DynamicsError> {
        let k = Kinematics::new(x, &self.tables, &self.options)?;
        if xdot.len() != x.len() {
            return Err(DynamicsError::DimensionMismatch {
                expected: x.len(),
                got: xdot.len(),
            });
        }
        let big_n = x.len();
        let state = RootState::with_velocities(x.to_vec(), xdot.to_vec(), self.tables.m1());
        let y = &coeffs_from_roots(&state)[..big_n];
        let ydot = coeff_derivs_from_roots(&state);
        let yddot = self.model.rhs(t, y, Some(&ydot))?;
        k.h_second_all(xdot, y, &ydot, &yddot)
    }
}
