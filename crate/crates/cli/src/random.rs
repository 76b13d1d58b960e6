//! Seeded random initial-value problems for `compare --random`.

use std::f64::consts::PI;

use multiroot::config::ExperimentConfig;
use multiroot::models::{Component, GeneratingModel, Order, Rational};
use multiroot::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const RATES: [(i64, i64); 4] = [(1, 2), (1, 3), (1, 4), (2, 3)];

fn point(rng: &mut impl Rng, r: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-r..r), rng.gen_range(-r..r))
}

/// Two or three roots, `1 ≤ m1 ≤ 4`, harmonic or exponential-velocity
/// components with small rational rates, roots at least 0.5 apart.
pub fn random_configs(count: usize, seed: u64) -> Vec<ExperimentConfig> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let n = rng.gen_range(2..=3);
            let m1 = rng.gen_range(1..=4);
            let components = (0..n)
                .map(|_| {
                    let (p, q) = RATES[rng.gen_range(0..RATES.len())];
                    let r = Rational::new(p, q);
                    if rng.gen_bool(0.5) {
                        Component::Harmonic { r }
                    } else {
                        Component::ExpVelocity { r }
                    }
                })
                .collect();
            let model = GeneratingModel::new(Order::Second, 2.0 * PI, components)
                .expect("valid random model");
            let mut x0: Vec<Complex64> = Vec::with_capacity(n);
            while x0.len() < n {
                let z = point(&mut rng, 3.0);
                if x0.iter().all(|w| (w - z).norm() > 0.5) {
                    x0.push(z);
                }
            }
            let xdot0 = (0..n).map(|_| point(&mut rng, 1.0)).collect();
            let t_end = model.period().map(|p| p.value);
            ExperimentConfig {
                name: Some(format!("random-{seed}-{k}")),
                m1,
                model,
                t0: 0.0,
                x0,
                xdot0: Some(xdot0),
                t_end,
                dt: Some(1e-3),
                engine: None,
                tol_root: None,
                tol_period: None,
                out: None,
                format: None,
            }
        })
        .collect()
}
