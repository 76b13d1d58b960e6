//! Exact combinatorial constants for the multiple-root polynomial.
//!
//! Everything here is computed with arbitrary-precision integers. The
//! floating-point mirrors stored on [`CoefficientTables`] are derived once at
//! construction time; the dependence on the multiple root `x1` is applied by
//! callers as powers of `x1` and never baked into a table.
//!
//! Public accessors use 1-based indices, matching the usual mathematical
//! presentation: `alpha(n, m)` is the entry in row `n`, column `m`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

/// Errors raised while building coefficient tables.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoeffError {
    #[error("number of roots must be ≥ 2 (got {0})")]
    TooFewRoots(usize),
    #[error("m1 must be ≥ 1 (got {0})")]
    InvalidMultiplicity(usize),
    #[error("table entry {0} does not fit in an f64")]
    NotRepresentable(String),
}

/// Binomial coefficient `C(n, k)`, zero when `k < 0` or `k > n`.
pub fn binomial(n: i64, k: i64) -> BigInt {
    if k < 0 || k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Rising factorial `a (a+1) ... (a+m-1)`, equal to one when `m == 0`.
pub fn pochhammer(a: i64, m: u32) -> BigInt {
    (0..i64::from(m)).fold(BigInt::one(), |acc, i| acc * (a + i))
}

fn factorial(n: u32) -> BigInt {
    pochhammer(1, n)
}

/// Elementary symmetric polynomial `σ_n` of `values`.
///
/// Returns one for `n == 0` and zero for `n > values.len()`.
pub fn elem_sym(values: &[Complex64], n: usize) -> Complex64 {
    if n > values.len() {
        return Complex64::zero();
    }
    elem_sym_all(values)[n]
}

/// All elementary symmetric polynomials `σ_0..=σ_M` of `values`, by one-pass
/// product accumulation (the coefficients of `∏(1 + v_i w)`).
pub fn elem_sym_all(values: &[Complex64]) -> Vec<Complex64> {
    let mut e = vec![Complex64::zero(); values.len() + 1];
    e[0] = Complex64::one();
    for (i, &v) in values.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            let prev = e[k - 1];
            e[k] += v * prev;
        }
    }
    e
}

/// The three-index table `β^{(k)}_{nm}` for `1 ≤ k ≤ N-1`, `1 ≤ n, m ≤ N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BetaTable {
    n_roots: usize,
    // levels[k-1][n-1][m-1]
    levels: Vec<Vec<Vec<BigInt>>>,
}

impl BetaTable {
    pub fn n_roots(&self) -> usize {
        self.n_roots
    }

    /// Number of stored levels `k` (equal to `N - 1`).
    pub fn levels(&self) -> usize {
        self.levels.len()
    }

    /// `β^{(k)}_{nm}` with 1-based indices; zero outside the stored range.
    pub fn get(&self, k: usize, n: usize, m: usize) -> BigInt {
        if k == 0
            || n == 0
            || m == 0
            || k > self.levels.len()
            || n > self.n_roots
            || m > self.n_roots
        {
            return BigInt::zero();
        }
        self.levels[k - 1][n - 1][m - 1].clone()
    }
}

fn check_domain(n_roots: usize, m1: usize) -> Result<(), CoeffError> {
    if n_roots < 2 {
        return Err(CoeffError::TooFewRoots(n_roots));
    }
    if m1 < 1 {
        return Err(CoeffError::InvalidMultiplicity(m1));
    }
    Ok(())
}

fn c(m1: usize, k: i64) -> BigInt {
    binomial(m1 as i64, k)
}

fn sign(exp: i64) -> BigInt {
    if exp.rem_euclid(2) == 0 {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

/// Builds `β^{(k)}_{nm}` by the defining recursion.
pub fn beta_table(n_roots: usize, m1: usize) -> Result<BetaTable, CoeffError> {
    check_domain(n_roots, m1)?;
    let big_n = n_roots;
    let mut levels: Vec<Vec<Vec<BigInt>>> = Vec::with_capacity(big_n - 1);

    let first: Vec<Vec<BigInt>> = (1..=big_n)
        .map(|n| {
            (1..=big_n)
                .map(|m| {
                    if m < n {
                        c(m1, (n - m) as i64)
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect();
    levels.push(first);

    for k in 2..big_n {
        let prev = &levels[k - 2];
        let next: Vec<Vec<BigInt>> = (1..=big_n)
            .map(|n| {
                (1..=big_n)
                    .map(|m| {
                        // j runs over m+1 ..= n+1-k
                        let hi = (n + 1).saturating_sub(k);
                        let mut acc = BigInt::zero();
                        for j in (m + 1)..=hi {
                            acc += c(m1, (j - m) as i64) * &prev[n - 1][j - 1];
                        }
                        -acc
                    })
                    .collect()
            })
            .collect();
        levels.push(next);
    }

    Ok(BetaTable { n_roots, levels })
}

/// `α_{nm} = (-1)^{n+m+1} Σ_k β^{(k)}_{nm}` as an `N×N` matrix (0-based storage).
pub fn alpha_table(n_roots: usize, m1: usize) -> Result<Vec<Vec<BigInt>>, CoeffError> {
    let beta = beta_table(n_roots, m1)?;
    Ok(alpha_from_beta(&beta))
}

fn alpha_from_beta(beta: &BetaTable) -> Vec<Vec<BigInt>> {
    let big_n = beta.n_roots();
    (1..=big_n)
        .map(|n| {
            (1..=big_n)
                .map(|m| {
                    if m >= n {
                        return BigInt::zero();
                    }
                    let sum = (1..=n - m).fold(BigInt::zero(), |acc, k| acc + beta.get(k, n, m));
                    sign((n + m + 1) as i64) * sum
                })
                .collect()
        })
        .collect()
}

/// `γ_n` for `1 ≤ n ≤ N` (0-based storage).
pub fn gamma_vector(n_roots: usize, m1: usize) -> Result<Vec<BigInt>, CoeffError> {
    let alpha = alpha_table(n_roots, m1)?;
    Ok(gamma_from_alpha(&alpha, m1))
}

fn gamma_from_alpha(alpha: &[Vec<BigInt>], m1: usize) -> Vec<BigInt> {
    let big_n = alpha.len();
    (1..=big_n)
        .map(|n| {
            let mut acc = sign(n as i64) * c(m1, n as i64);
            for j in 1..n {
                acc += sign(j as i64) * c(m1, j as i64) * &alpha[n - 1][j - 1];
            }
            acc
        })
        .collect()
}

/// The extension tables `θ_{kj}` (`m1 × (N-1)`) and `φ_k` (length `m1`), which
/// express the trailing coefficients `y_{N+1}..y_{N+m1}` through `y_1..y_N`.
pub fn theta_phi_tables(
    n_roots: usize,
    m1: usize,
) -> Result<(Vec<Vec<BigInt>>, Vec<BigInt>), CoeffError> {
    let alpha = alpha_table(n_roots, m1)?;
    Ok(theta_phi_from_alpha(&alpha, m1))
}

fn theta_phi_from_alpha(alpha: &[Vec<BigInt>], m1: usize) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
    let big_n = alpha.len();
    let ni = big_n as i64;
    let mut theta = Vec::with_capacity(m1);
    let mut phi = Vec::with_capacity(m1);
    for k in 1..=m1 {
        let ki = k as i64;
        let row: Vec<BigInt> = (1..big_n)
            .map(|j| {
                let ji = j as i64;
                let mut acc = sign(ni + ki + ji) * c(m1, ni + ki - ji);
                for l in (j + 1)..=big_n {
                    let li = l as i64;
                    acc += c(m1, ni + ki - li) * sign(ni + ki + li) * &alpha[l - 1][j - 1];
                }
                acc
            })
            .collect();
        theta.push(row);

        let mut inner = BigInt::zero();
        for l in 1..=big_n {
            let li = l as i64;
            let mut bracket = c(m1, li);
            for j in 1..l {
                let ji = j as i64;
                bracket += c(m1, ji) * sign(li + ji) * &alpha[l - 1][j - 1];
            }
            inner += c(m1, ni + ki - li) * bracket;
        }
        phi.push(sign(ni + ki) * (c(m1, ni + ki) - inner));
    }
    (theta, phi)
}

fn to_f64(value: &BigInt, what: impl FnOnce() -> String) -> Result<f64, CoeffError> {
    match value.to_f64() {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(CoeffError::NotRepresentable(what())),
    }
}

fn ratio_to_f64(
    num: &BigInt,
    den: &BigInt,
    what: impl FnOnce() -> String,
) -> Result<f64, CoeffError> {
    let r = BigRational::new(num.clone(), den.clone());
    match r.to_f64() {
        Some(v) if v.is_finite() => Ok(v),
        _ => Err(CoeffError::NotRepresentable(what())),
    }
}

/// All tables for a given `(N, m1)`, exact and as `f64` mirrors.
#[derive(Debug, Clone, Serialize)]
pub struct CoefficientTables {
    n_roots: usize,
    m1: usize,
    #[serde(serialize_with = "ser_matrix")]
    alpha: Vec<Vec<BigInt>>,
    #[serde(serialize_with = "ser_vector")]
    gamma: Vec<BigInt>,
    #[serde(serialize_with = "ser_matrix")]
    theta: Vec<Vec<BigInt>>,
    #[serde(serialize_with = "ser_vector")]
    phi: Vec<BigInt>,
    #[serde(skip)]
    beta: BetaTable,
    /// `(N+1-j)_{m1}` for `j = 0..=N`.
    #[serde(skip)]
    pochhammer_weights: Vec<BigInt>,
    #[serde(skip)]
    mirror: FloatMirror,
}

#[derive(Debug, Clone)]
struct FloatMirror {
    alpha: Vec<Vec<f64>>,
    gamma: Vec<f64>,
    theta: Vec<Vec<f64>>,
    phi: Vec<f64>,
    binom_m1: Vec<f64>,
    weights: Vec<f64>,
    scaled_weights: Vec<f64>,
    factorial_m1p1: f64,
}

fn ser_matrix<S: serde::Serializer>(m: &[Vec<BigInt>], s: S) -> Result<S::Ok, S::Error> {
    let rows: Vec<Vec<String>> = m
        .iter()
        .map(|r| r.iter().map(|v| v.to_string()).collect())
        .collect();
    serde::Serialize::serialize(&rows, s)
}

fn ser_vector<S: serde::Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    serde::Serialize::serialize(&items, s)
}

impl CoefficientTables {
    /// Builds every table for `(n_roots, m1)`.
    pub fn new(n_roots: usize, m1: usize) -> Result<Self, CoeffError> {
        check_domain(n_roots, m1)?;
        let beta = beta_table(n_roots, m1)?;
        let alpha = alpha_from_beta(&beta);
        let gamma = gamma_from_alpha(&alpha, m1);
        let (theta, phi) = theta_phi_from_alpha(&alpha, m1);
        let pochhammer_weights: Vec<BigInt> = (0..=n_roots)
            .map(|j| pochhammer((n_roots + 1 - j) as i64, m1 as u32))
            .collect();
        let fact = factorial(m1 as u32 + 1);

        let alpha_f = alpha
            .iter()
            .enumerate()
            .map(|(n, row)| {
                row.iter()
                    .enumerate()
                    .map(|(m, v)| to_f64(v, || format!("alpha[{}][{}]", n + 1, m + 1)))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let gamma_f = gamma
            .iter()
            .enumerate()
            .map(|(n, v)| to_f64(v, || format!("gamma[{}]", n + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        let theta_f = theta
            .iter()
            .enumerate()
            .map(|(k, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, v)| to_f64(v, || format!("theta[{}][{}]", k + 1, j + 1)))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let phi_f = phi
            .iter()
            .enumerate()
            .map(|(k, v)| to_f64(v, || format!("phi[{}]", k + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        let binom_m1 = (0..=m1)
            .map(|k| to_f64(&c(m1, k as i64), || format!("C({m1},{k})")))
            .collect::<Result<Vec<_>, _>>()?;
        let weights = pochhammer_weights
            .iter()
            .enumerate()
            .map(|(j, v)| to_f64(v, || format!("pochhammer weight {j}")))
            .collect::<Result<Vec<_>, _>>()?;
        let scaled_weights = pochhammer_weights
            .iter()
            .enumerate()
            .map(|(j, v)| ratio_to_f64(v, &fact, || format!("scaled pochhammer weight {j}")))
            .collect::<Result<Vec<_>, _>>()?;
        let factorial_m1p1 = to_f64(&fact, || format!("({}+1)!", m1))?;

        Ok(Self {
            n_roots,
            m1,
            alpha,
            gamma,
            theta,
            phi,
            beta,
            pochhammer_weights,
            mirror: FloatMirror {
                alpha: alpha_f,
                gamma: gamma_f,
                theta: theta_f,
                phi: phi_f,
                binom_m1,
                weights,
                scaled_weights,
                factorial_m1p1,
            },
        })
    }

    /// Shared, immutable tables for `(n_roots, m1)`; built on first request.
    pub fn shared(n_roots: usize, m1: usize) -> Result<Arc<Self>, CoeffError> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<CoefficientTables>>>> =
            OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(t) = cache
            .lock()
            .expect("table cache poisoned")
            .get(&(n_roots, m1))
        {
            return Ok(Arc::clone(t));
        }
        let built = Arc::new(Self::new(n_roots, m1)?);
        let mut guard = cache.lock().expect("table cache poisoned");
        Ok(Arc::clone(guard.entry((n_roots, m1)).or_insert(built)))
    }

    pub fn n_roots(&self) -> usize {
        self.n_roots
    }

    pub fn m1(&self) -> usize {
        self.m1
    }

    /// Exact `α_{nm}` (1-based).
    pub fn alpha(&self, n: usize, m: usize) -> &BigInt {
        &self.alpha[n - 1][m - 1]
    }

    /// Exact `γ_n` (1-based).
    pub fn gamma(&self, n: usize) -> &BigInt {
        &self.gamma[n - 1]
    }

    /// Exact `θ_{kj}` (1-based, `k ≤ m1`, `j ≤ N-1`).
    pub fn theta(&self, k: usize, j: usize) -> &BigInt {
        &self.theta[k - 1][j - 1]
    }

    /// Exact `φ_k` (1-based).
    pub fn phi(&self, k: usize) -> &BigInt {
        &self.phi[k - 1]
    }

    pub fn beta(&self) -> &BetaTable {
        &self.beta
    }

    pub fn alpha_matrix(&self) -> &[Vec<BigInt>] {
        &self.alpha
    }

    pub fn gamma_vector(&self) -> &[BigInt] {
        &self.gamma
    }

    pub fn theta_matrix(&self) -> &[Vec<BigInt>] {
        &self.theta
    }

    pub fn phi_vector(&self) -> &[BigInt] {
        &self.phi
    }

    /// Exact `(N+1-j)_{m1}` for `j = 0..=N`.
    pub fn pochhammer_weights(&self) -> &[BigInt] {
        &self.pochhammer_weights
    }

    pub(crate) fn alpha_f(&self, n: usize, m: usize) -> f64 {
        self.mirror.alpha[n - 1][m - 1]
    }

    pub(crate) fn gamma_f(&self, n: usize) -> f64 {
        self.mirror.gamma[n - 1]
    }

    pub(crate) fn theta_f(&self, k: usize, j: usize) -> f64 {
        self.mirror.theta[k - 1][j - 1]
    }

    pub(crate) fn phi_f(&self, k: usize) -> f64 {
        self.mirror.phi[k - 1]
    }

    /// `C(m1, k)` as `f64`, zero outside `0..=m1`.
    pub(crate) fn binom_m1_f(&self, k: i64) -> f64 {
        if k < 0 || k as usize > self.m1 {
            0.0
        } else {
            self.mirror.binom_m1[k as usize]
        }
    }

    /// `(N+1-j)_{m1}` as `f64`, `j = 0..=N`.
    pub(crate) fn weight_f(&self, j: usize) -> f64 {
        self.mirror.weights[j]
    }

    /// `(N+1-j)_{m1} / (m1+1)!` as `f64`, `j = 0..=N`.
    pub(crate) fn scaled_weight_f(&self, j: usize) -> f64 {
        self.mirror.scaled_weights[j]
    }

    pub(crate) fn factorial_m1p1_f(&self) -> f64 {
        self.mirror.factorial_m1p1
    }

    /// JSON rendering with every integer encoded as a decimal string.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("tables serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(5, 2), big(10));
        assert_eq!(binomial(3, 5), big(0));
        assert_eq!(binomial(7, 0), big(1));
        assert_eq!(binomial(4, -1), big(0));
        assert_eq!(
            binomial(60, 30),
            "118264581564861424".parse::<BigInt>().unwrap()
        );
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(pochhammer(3, 2), big(12));
        assert_eq!(pochhammer(-7, 0), big(1));
        assert_eq!(pochhammer(2, 3), big(24));
        assert_eq!(pochhammer(0, 3), big(0));
    }

    #[test]
    fn beta_examples() {
        let b = beta_table(3, 1).unwrap();
        assert_eq!(b.get(1, 3, 1), big(0));
        let b = beta_table(3, 2).unwrap();
        assert_eq!(b.get(2, 3, 1), big(-4));
        for n_roots in 2..=6 {
            for m1 in 1..=5 {
                let b = beta_table(n_roots, m1).unwrap();
                for k in 1..n_roots {
                    for n in 1..=n_roots {
                        for m in 1..=n_roots {
                            if m + k > n {
                                assert!(b.get(k, n, m).is_zero(), "β^({k})_{n}{m}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn alpha_gamma_spot_values() {
        let t = CoefficientTables::new(3, 5).unwrap();
        assert_eq!(t.alpha(2, 1), &big(5));
        assert_eq!(t.alpha(3, 1), &big(15));
        assert_eq!(t.alpha(3, 2), &big(5));
        assert_eq!(t.gamma(1), &big(-5));
        assert_eq!(t.gamma(2), &big(-15));
        assert_eq!(t.gamma(3), &big(-35));
        let t = CoefficientTables::new(2, 1).unwrap();
        assert_eq!(t.gamma(2), &big(-1));
    }

    #[test]
    fn alpha_is_strictly_lower_triangular() {
        let t = CoefficientTables::new(6, 4).unwrap();
        for n in 1..=6 {
            for m in n..=6 {
                assert!(t.alpha(n, m).is_zero());
            }
        }
    }

    #[test]
    fn theta_small_case() {
        let t = CoefficientTables::new(2, 1).unwrap();
        assert_eq!(t.theta(1, 1), &big(-1));
    }

    #[test]
    fn domain_errors() {
        assert_eq!(
            CoefficientTables::new(2, 0).unwrap_err().to_string(),
            "m1 must be ≥ 1 (got 0)"
        );
        assert!(matches!(
            CoefficientTables::new(1, 3),
            Err(CoeffError::TooFewRoots(1))
        ));
    }

    #[test]
    fn elem_sym_examples() {
        let a = Complex64::new(0.3, -1.0);
        let b = Complex64::new(2.0, 0.5);
        assert_eq!(elem_sym(&[a, b], 1), a + b);
        let v: Vec<Complex64> = [1.0, 2.0, 3.0]
            .iter()
            .map(|&r| Complex64::new(r, 0.0))
            .collect();
        assert_eq!(elem_sym(&v, 2), Complex64::new(11.0, 0.0));
        assert_eq!(elem_sym(&v, 0), Complex64::one());
        assert_eq!(elem_sym(&v, 7), Complex64::zero());
    }

    #[test]
    fn shared_tables_are_cached() {
        let a = CoefficientTables::shared(4, 3).unwrap();
        let b = CoefficientTables::shared(4, 3).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }

    #[test]
    fn json_uses_decimal_strings() {
        let t = CoefficientTables::new(3, 5).unwrap();
        let v = t.to_json();
        assert_eq!(v["alpha"][2][0], "15");
        assert_eq!(v["gamma"][2], "-35");
    }
}
