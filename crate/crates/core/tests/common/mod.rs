//! Oracles shared by the integration tests. Apart from reading the value
//! under test, nothing here calls into the library's table or Vieta code;
//! each helper is an independent computation (brute-force integer algebra,
//! jets, synthetic multiplication, dense solves).

#![allow(dead_code)]

use multiroot::coeffs::CoefficientTables;
use multiroot::Complex64;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform in the square `[-r, r]²`.
pub fn rand_c(rng: &mut impl Rng, r: f64) -> Complex64 {
    c(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

/// `n` points in `[-r, r]²` with pairwise distance at least `sep`.
pub fn separated(rng: &mut impl Rng, n: usize, r: f64, sep: f64) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = Vec::with_capacity(n);
    while out.len() < n {
        let z = rand_c(rng, r);
        if out.iter().all(|w| (w - z).norm() >= sep) {
            out.push(z);
        }
    }
    out
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / (1.0 + b.norm())
}

pub fn max_rel(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(u, v)| rel_err(*u, *v))
        .fold(0.0, f64::max)
}

// ---------- polynomials by synthetic multiplication ----------

/// Descending coefficients of `∏ (z - r)`, one linear factor at a time.
pub fn expand(roots: &[Complex64]) -> Vec<Complex64> {
    let mut p = vec![c(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::zero(); p.len() + 1];
        for (i, &a) in p.iter().enumerate() {
            next[i] += a;
            next[i + 1] -= a * r;
        }
        p = next;
    }
    p
}

/// Root multiset with `x[0]` repeated `m1 + 1` times.
pub fn with_multiplicity(x: &[Complex64], m1: usize) -> Vec<Complex64> {
    let mut v = vec![x[0]; m1 + 1];
    v.extend_from_slice(&x[1..]);
    v
}

/// `y_1..y_{N+m1}` by direct expansion.
pub fn expanded_y(x: &[Complex64], m1: usize) -> Vec<Complex64> {
    expand(&with_multiplicity(x, m1))[1..].to_vec()
}

pub fn horner(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter().fold(Complex64::zero(), |acc, &a| acc * z + a)
}

// ---------- jets: truncated Taylor series in t ----------

/// `(f, f', f''/2)` at one instant.
#[derive(Clone, Copy, Debug)]
pub struct Jet(pub [Complex64; 3]);

impl Jet {
    pub fn constant(v: Complex64) -> Self {
        Jet([v, Complex64::zero(), Complex64::zero()])
    }

    pub fn value(&self) -> Complex64 {
        self.0[0]
    }

    pub fn d1(&self) -> Complex64 {
        self.0[1]
    }

    pub fn d2(&self) -> Complex64 {
        self.0[2] * 2.0
    }

    fn mul(self, o: Jet) -> Jet {
        let (a, b) = (self.0, o.0);
        Jet([
            a[0] * b[0],
            a[0] * b[1] + a[1] * b[0],
            a[0] * b[2] + a[1] * b[1] + a[2] * b[0],
        ])
    }

    fn add(self, o: Jet) -> Jet {
        Jet([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }

    fn neg(self) -> Jet {
        Jet([-self.0[0], -self.0[1], -self.0[2]])
    }
}

/// A cubic path `x_n(t) = Σ_k c_{nk} t^k` for every root.
#[derive(Clone, Debug)]
pub struct CubicPath {
    pub coef: Vec<[Complex64; 4]>,
}

impl CubicPath {
    /// Random path whose roots stay well apart near `t = 0`.
    pub fn random(rng: &mut impl Rng, n: usize) -> Self {
        let base = separated(rng, n, 2.0, 0.6);
        let coef = base
            .into_iter()
            .map(|x0| [x0, rand_c(rng, 1.0), rand_c(rng, 0.5), rand_c(rng, 0.25)])
            .collect();
        Self { coef }
    }

    pub fn jets(&self, t: f64) -> Vec<Jet> {
        self.coef
            .iter()
            .map(|k| {
                let x = k[0] + k[1] * t + k[2] * t * t + k[3] * t * t * t;
                let v = k[1] + k[2] * (2.0 * t) + k[3] * (3.0 * t * t);
                let a = k[2] * 2.0 + k[3] * (6.0 * t);
                Jet([x, v, a / 2.0])
            })
            .collect()
    }

    pub fn x(&self, t: f64) -> Vec<Complex64> {
        self.jets(t).iter().map(Jet::value).collect()
    }

    pub fn xdot(&self, t: f64) -> Vec<Complex64> {
        self.jets(t).iter().map(Jet::d1).collect()
    }

    pub fn xddot(&self, t: f64) -> Vec<Complex64> {
        self.jets(t).iter().map(Jet::d2).collect()
    }
}

/// Coefficient jets of `(z - x1)^{m1+1} ∏_{n≥2} (z - x_n)`: entry `j` is `y_j`
/// (index 0 is the leading one).
pub fn coefficient_jets(roots: &[Jet], m1: usize) -> Vec<Jet> {
    let mut factors = vec![roots[0]; m1 + 1];
    factors.extend_from_slice(&roots[1..]);
    let one = Jet::constant(c(1.0, 0.0));
    let mut p = vec![one];
    for r in factors {
        let mut next = vec![Jet::constant(Complex64::zero()); p.len() + 1];
        for (i, a) in p.iter().enumerate() {
            next[i] = next[i].add(*a);
            next[i + 1] = next[i + 1].add(a.mul(r).neg());
        }
        p = next;
    }
    p
}

/// `(y, ẏ, ÿ)` for the first `N` coefficients along the path at `t`.
pub fn path_coefficients(
    path: &CubicPath,
    m1: usize,
    t: f64,
) -> (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>) {
    let jets = coefficient_jets(&path.jets(t), m1);
    let n = path.coef.len();
    let y = jets[1..=n].iter().map(Jet::value).collect();
    let yd = jets[1..=n].iter().map(Jet::d1).collect();
    let ydd = jets[1..=n].iter().map(Jet::d2).collect();
    (y, yd, ydd)
}

// ---------- exact integer linear algebra ----------

pub fn binom(n: i64, k: i64) -> BigInt {
    if k < 0 || k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn parity(e: i64) -> BigInt {
    if e.rem_euclid(2) == 0 {
        BigInt::one()
    } else {
        -BigInt::one()
    }
}

/// The full `(N+m1) × N` matrix `A(1)` (0-based storage).
pub fn a_matrix_int(n: usize, m1: usize) -> Vec<Vec<BigInt>> {
    (1..=n + m1)
        .map(|r| {
            (1..=n)
                .map(|j| {
                    if j == r {
                        BigInt::one()
                    } else if j < r {
                        binom(m1 as i64, (r - j) as i64) * parity((r + j) as i64)
                    } else {
                        BigInt::zero()
                    }
                })
                .collect()
        })
        .collect()
}

/// `a(1)`, length `N + m1`.
pub fn a_vector_int(n: usize, m1: usize) -> Vec<BigInt> {
    (1..=n + m1)
        .map(|r| parity(r as i64) * binom(m1 as i64, r as i64))
        .collect()
}

/// Inverse of the unit lower-triangular upper block of `A(1)`, by forward
/// substitution on each unit vector.
pub fn brute_inverse(n: usize, m1: usize) -> Vec<Vec<BigInt>> {
    let a = a_matrix_int(n, m1);
    let mut inv = vec![vec![BigInt::zero(); n]; n];
    for col in 0..n {
        for r in 0..n {
            let mut v = if r == col {
                BigInt::one()
            } else {
                BigInt::zero()
            };
            for j in 0..r {
                v -= &a[r][j] * &inv[j][col];
            }
            inv[r][col] = v;
        }
    }
    inv
}

/// The nilpotent `C = I - A^{(N)}` at `x1 = 1`.
pub fn nilpotent_c(n: usize, m1: usize) -> Vec<Vec<BigInt>> {
    let a = a_matrix_int(n, m1);
    (0..n)
        .map(|r| {
            (0..n)
                .map(|j| {
                    if r == j {
                        BigInt::zero()
                    } else {
                        -a[r][j].clone()
                    }
                })
                .collect()
        })
        .collect()
}

pub fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = a.len();
    let m = b[0].len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..b.len()).fold(BigInt::zero(), |acc, k| acc + &a[i][k] * &b[k][j]))
                .collect()
        })
        .collect()
}

/// `θ_{kj}` (`m1 × (N-1)`) and `φ_k` from `y_{N+k} = A_{N+k,·} A^{(N)-1} (y - a) + a_{N+k}`
/// at `x1 = 1`; homogeneity fixes the `x1` powers.
pub fn brute_extension(n: usize, m1: usize) -> (Vec<Vec<BigInt>>, Vec<BigInt>, Vec<BigInt>) {
    let a = a_matrix_int(n, m1);
    let av = a_vector_int(n, m1);
    let inv = brute_inverse(n, m1);
    let mut theta = Vec::new();
    let mut lead = Vec::new();
    let mut phi = Vec::new();
    for k in 1..=m1 {
        let row = &a[n + k - 1];
        // coefficient of y_j: Σ_l row_l inv_{l j}
        let coef: Vec<BigInt> = (0..n)
            .map(|j| (0..n).fold(BigInt::zero(), |acc, l| acc + &row[l] * &inv[l][j]))
            .collect();
        let shift = (0..n).fold(BigInt::zero(), |acc, j| acc + &coef[j] * &av[j]);
        theta.push(coef[..n - 1].to_vec());
        lead.push(coef[n - 1].clone());
        phi.push(&av[n + k - 1] - shift);
    }
    (theta, lead, phi)
}

// ---------- dense complex linear solve ----------

/// Gaussian elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Vec<Complex64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap();
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for k in col..n {
                let sub = a[col][k] * f;
                a[r][k] -= sub;
            }
            let sub = b[col] * f;
            b[r] -= sub;
        }
    }
    let mut x = vec![Complex64::zero(); n];
    for r in (0..n).rev() {
        let s: Complex64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

pub fn to_f64(v: &BigInt) -> f64 {
    use num_traits::ToPrimitive;
    v.to_f64().unwrap()
}

/// Componentwise-relative `max |A A⁻¹ - I|`.
pub fn inverse_residual(t: &CoefficientTables, x1: Complex64) -> f64 {
    let n = t.n_roots();
    let m1 = t.m1() as i64;
    let a = |r: usize, j: usize| -> Complex64 {
        if r == j {
            c(1.0, 0.0)
        } else if j < r {
            let s = if (r + j) % 2 == 0 { 1.0 } else { -1.0 };
            x1.powi((r - j) as i32) * (s * to_f64(&binom(m1, (r - j) as i64)))
        } else {
            Complex64::zero()
        }
    };
    let ainv = |r: usize, j: usize| -> Complex64 {
        if r == j {
            c(1.0, 0.0)
        } else if j < r {
            x1.powi((r - j) as i32) * to_f64(t.alpha(r, j))
        } else {
            Complex64::zero()
        }
    };
    let mut worst = 0.0_f64;
    for r in 1..=n {
        for s in 1..=n {
            let mut acc = Complex64::zero();
            let mut mag = 0.0;
            for l in 1..=n {
                let term = a(r, l) * ainv(l, s);
                acc += term;
                mag += term.norm();
            }
            if r == s {
                acc -= 1.0;
            }
            worst = worst.max(acc.norm() / mag.max(1.0));
        }
    }
    worst
}
