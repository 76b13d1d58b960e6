//! Simultaneous polynomial root extraction (Aberth–Ehrlich iteration).

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::Zero;

use crate::poly::Polynomial;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RootError {
    #[error("leading coefficient vanishes")]
    DegenerateLeading,
    #[error("non-finite coefficients")]
    NonFinite,
    #[error("no convergence after {iterations} iterations (backward error {backward_error:.3e})")]
    NoConvergence {
        iterations: usize,
        backward_error: f64,
    },
    #[error("degree {degree} cannot carry a root of multiplicity {multiplicity}")]
    DegreeTooLow { degree: usize, multiplicity: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    /// Accept when `|p(z)| ≤ tol · Σ |c_k| max(1, |z|)^k` for every root.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iter: 500,
        }
    }
}

/// Backward error `|p(z)| / Σ |c_k| max(1, |z|)^k`.
pub(crate) fn backward_error(p: &Polynomial, z: Complex64) -> f64 {
    let r = z.norm().max(1.0);
    let s = p.abs_eval(Complex64::new(r, 0.0));
    if s == 0.0 {
        0.0
    } else {
        p.eval(z).norm() / s
    }
}

fn initial_guesses(p: &Polynomial) -> Vec<Complex64> {
    // circle through the geometric mean of the Cauchy-style bound
    let d = p.degree();
    let c = p.coeffs();
    let lead = c[0].norm();
    let mut radius = 0.0_f64;
    for k in 1..=d {
        radius = radius.max((c[k].norm() / lead).powf(1.0 / k as f64));
    }
    if radius == 0.0 {
        radius = 1.0;
    }
    let centre = -c[1] / (c[0] * d as f64);
    (0..d)
        .map(|k| centre + Complex64::from_polar(radius, 2.0 * PI * k as f64 / d as f64 + 0.4))
        .collect()
}

/// All roots of `p`, optionally warm-started from `seeds` (e.g. the
/// previous time sample). Seeds that coincide are nudged apart.
pub fn roots_of(
    p: &Polynomial,
    seeds: Option<&[Complex64]>,
    opts: &RootOptions,
) -> Result<Vec<Complex64>, RootError> {
    if p.coeffs().iter().any(|c| !c.is_finite()) {
        return Err(RootError::NonFinite);
    }
    if p.leading().is_zero() {
        return Err(RootError::DegenerateLeading);
    }
    let p = p.monic();
    // exact zeros at the origin come off first; they would otherwise be
    // found only to ε^{1/k}
    let zeros = p.coeffs().iter().rev().take_while(|c| c.is_zero()).count();
    if zeros > 0 {
        let c = p.coeffs();
        let rest = Polynomial::from_descending(c[..c.len() - zeros].to_vec());
        let mut out = roots_of(&rest, None, opts)?;
        out.extend(std::iter::repeat(Complex64::zero()).take(zeros));
        return Ok(out);
    }
    let d = p.degree();
    match d {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![-p.coeffs()[1]]),
        _ => {}
    }
    let mut z = match seeds {
        Some(s) if s.len() == d && s.iter().all(|v| v.is_finite()) => {
            let mut z = s.to_vec();
            let spread = 1e-7 * (1.0 + z.iter().fold(0.0_f64, |m, v| m.max(v.norm())));
            for i in 1..d {
                for j in 0..i {
                    if (z[i] - z[j]).norm() < spread {
                        z[i] += Complex64::from_polar(spread, 0.7 + i as f64);
                    }
                }
            }
            z
        }
        _ => initial_guesses(&p),
    };

    // below this the residual is rounding noise and further steps only jitter
    let floor = 4.0 * d as f64 * f64::EPSILON;
    let mut done = vec![false; d];
    for _ in 0..opts.max_iter {
        let mut all = true;
        for k in 0..d {
            if done[k] {
                continue;
            }
            let (v, dv) = p.eval_with_derivative(z[k]);
            if backward_error(&p, z[k]) <= floor || v.is_zero() {
                done[k] = true;
                continue;
            }
            all = false;
            let ratio = v / dv;
            let repulsion: Complex64 = (0..d)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[k] -= step;
                if step.norm() <= 4.0 * f64::EPSILON * z[k].norm() {
                    done[k] = true;
                }
            } else {
                let kick = Complex64::from_polar(1e-3 * (1.0 + z[k].norm()), k as f64);
                z[k] += kick;
            }
        }
        if all {
            break;
        }
    }
    let worst = z.iter().map(|&r| backward_error(&p, r)).fold(0.0, f64::max);
    if !(worst <= opts.tol) {
        return Err(RootError::NoConvergence {
            iterations: opts.max_iter,
            backward_error: worst,
        });
    }
    Ok(z)
}

/// Roots of a polynomial known to have exactly one root of multiplicity
/// `m1 + 1`: that root first, then the simple ones.
///
/// The multiple root is a simple root of `p^{(m1)}`, which is where it is
/// located; it is then divided out and the quotient solved. Of the
/// candidates, the one leaving the smallest division remainders wins.
pub fn roots_with_multiplicity(
    p: &Polynomial,
    m1: usize,
    opts: &RootOptions,
) -> Result<Vec<Complex64>, RootError> {
    let p = p.monic();
    if p.degree() < m1 + 1 {
        return Err(RootError::DegreeTooLow {
            degree: p.degree(),
            multiplicity: m1 + 1,
        });
    }
    let mut w = p.clone();
    for _ in 0..m1 {
        w = w.derivative();
    }
    let mut best: Option<(f64, Complex64)> = None;
    for mut z in roots_of(&w, None, opts)? {
        let (v, dv) = w.eval_with_derivative(z);
        if dv.norm() > 0.0 && (v / dv).is_finite() {
            z -= v / dv;
        }
        let (_, rems) = p.deflate_repeated(z, m1 + 1);
        let r = rems.iter().map(|r| r.norm()).fold(0.0, f64::max);
        if best.map_or(true, |(b, _)| r < b) {
            best = Some((r, z));
        }
    }
    let x1 = best
        .map(|(_, z)| z)
        .expect("derivative has at least one root");
    let (quot, _) = p.deflate_repeated(x1, m1 + 1);
    let mut out = vec![x1];
    out.extend(roots_of(&quot, None, opts)?);
    Ok(out)
}
