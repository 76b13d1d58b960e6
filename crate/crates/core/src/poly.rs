//! Dense complex polynomials, stored in descending-power order.

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    /// Coefficients from the highest power down to the constant term.
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    /// Builds from descending-order coefficients. Leading zeros are kept as-is.
    pub fn from_descending(coeffs: Vec<Complex64>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "polynomial needs at least one coefficient"
        );
        Self { coeffs }
    }

    /// `∏ (z - r)` over `roots`.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut coeffs = vec![Complex64::one()];
        for &r in roots {
            coeffs.push(Complex64::zero());
            for k in (1..coeffs.len()).rev() {
                let prev = coeffs[k - 1];
                coeffs[k] -= r * prev;
            }
        }
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .fold(Complex64::zero(), |acc, &c| acc * z + c)
    }

    /// Value and first derivative by a single Horner sweep.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::zero();
        let mut dp = Complex64::zero();
        for &c in &self.coeffs {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `Σ |c_k| |z|^k`, the natural scale for backward-error tests.
    pub fn abs_eval(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Self {
        let d = self.degree();
        if d == 0 {
            return Self::from_descending(vec![Complex64::zero()]);
        }
        let coeffs = self.coeffs[..d]
            .iter()
            .enumerate()
            .map(|(i, &c)| c * (d - i) as f64)
            .collect();
        Self { coeffs }
    }

    /// Synthetic division by `(z - root)`: returns the quotient and remainder.
    pub fn deflate(&self, root: Complex64) -> (Self, Complex64) {
        let d = self.degree();
        if d == 0 {
            return (
                Self::from_descending(vec![Complex64::zero()]),
                self.coeffs[0],
            );
        }
        let mut q = Vec::with_capacity(d);
        let mut acc = Complex64::zero();
        for &c in &self.coeffs[..d] {
            acc = acc * root + c;
            q.push(acc);
        }
        let rem = acc * root + self.coeffs[d];
        (Self { coeffs: q }, rem)
    }

    /// Divides by `(z - root)^times`, returning the quotient and the successive
    /// remainders. The `k`-th remainder is the Taylor coefficient
    /// `p^{(k)}(root)/k!` of the original polynomial.
    pub fn deflate_repeated(&self, root: Complex64, times: usize) -> (Self, Vec<Complex64>) {
        let mut cur = self.clone();
        let mut rems = Vec::with_capacity(times);
        for _ in 0..times {
            let (q, r) = cur.deflate(root);
            rems.push(r);
            cur = q;
        }
        (cur, rems)
    }

    /// Scales so the leading coefficient is one.
    pub fn monic(&self) -> Self {
        let lead = self.leading();
        Self {
            coeffs: self.coeffs.iter().map(|&c| c / lead).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn from_roots_expands() {
        let p = Polynomial::from_roots(&[c(1.0), c(1.0), c(2.0)]);
        assert_eq!(p.coeffs(), &[c(1.0), c(-4.0), c(5.0), c(-2.0)]);
    }

    #[test]
    fn horner_and_derivative() {
        let p = Polynomial::from_descending(vec![c(1.0), c(-4.0), c(5.0), c(-2.0)]);
        let (v, d) = p.eval_with_derivative(c(3.0));
        assert_eq!(v, c(4.0));
        assert_eq!(d, c(8.0));
        assert_eq!(p.derivative().eval(c(3.0)), d);
    }

    #[test]
    fn repeated_deflation_gives_taylor_coefficients() {
        // (z-1)^2 (z-2) around z=1: 0, 0, -1, 1
        let p = Polynomial::from_roots(&[c(1.0), c(1.0), c(2.0)]);
        let (q, rems) = p.deflate_repeated(c(1.0), 2);
        assert_eq!(rems, vec![c(0.0), c(0.0)]);
        assert_eq!(q.coeffs(), &[c(1.0), c(-2.0)]);
    }
}
