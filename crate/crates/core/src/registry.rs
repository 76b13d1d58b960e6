//! Built-in worked examples with their initial data and reference periods.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::models::{Component, GeneratingModel, Order, Rational};
use crate::solver::Ivp;

/// A period reported for a group of roots (1-based indices).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReferencePeriod {
    pub roots: Vec<usize>,
    pub period: f64,
    pub asymptotic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Example {
    pub name: &'static str,
    pub summary: &'static str,
    pub m1: usize,
    pub model: GeneratingModel,
    pub x0: Vec<Complex64>,
    pub xdot0: Vec<Complex64>,
    /// Span long enough to test the reference periods.
    pub t_end: f64,
    pub dt: f64,
    pub reference_periods: Vec<ReferencePeriod>,
}

impl Example {
    pub fn ivp(&self) -> Ivp {
        Ivp::new(
            self.m1,
            self.model.clone(),
            0.0,
            self.x0.clone(),
            Some(self.xdot0.clone()),
        )
    }

    pub fn config(&self) -> ExperimentConfig {
        ExperimentConfig {
            name: Some(self.name.to_string()),
            m1: self.m1,
            model: self.model.clone(),
            t0: 0.0,
            x0: self.x0.clone(),
            xdot0: Some(self.xdot0.clone()),
            t_end: Some(self.t_end),
            dt: Some(self.dt),
            engine: None,
            tol_root: None,
            tol_period: None,
            out: None,
            format: None,
        }
    }

    /// Reference period of root `n` (1-based).
    pub fn reference_for(&self, n: usize) -> Option<&ReferencePeriod> {
        self.reference_periods.iter().find(|r| r.roots.contains(&n))
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn periodic(roots: &[usize], period: f64) -> ReferencePeriod {
    ReferencePeriod {
        roots: roots.to_vec(),
        period,
        asymptotic: false,
    }
}

const OMEGA: f64 = 2.0 * PI;

/// All built-in examples, in a fixed order.
pub fn examples() -> Vec<Example> {
    vec![
        Example {
            name: "two-body-exp",
            summary: "two bodies, m1 = 17, exponential-velocity model r = (1/2, 1/3)",
            m1: 17,
            model: GeneratingModel::exp_velocity(OMEGA, &[q(1, 2), q(1, 3)]).unwrap(),
            x0: vec![c(3.19, 3.67), c(-47.46, -23.83)],
            xdot0: vec![c(0.56, 4.97), c(27.85, -52.55)],
            t_end: 24.0,
            dt: 1e-3,
            reference_periods: vec![periodic(&[1, 2], 12.0)],
        },
        Example {
            name: "two-body-harmonic",
            summary: "two bodies, m1 = 11, harmonic model r = (1/3, 1/2)",
            m1: 11,
            model: GeneratingModel::harmonic(OMEGA, &[q(1, 3), q(1, 2)]).unwrap(),
            x0: vec![c(-18.14, 35.16), c(102.58, -154.58)],
            xdot0: vec![c(51.09, -77.17), c(-308.45, 508.99)],
            t_end: 24.0,
            dt: 1e-3,
            reference_periods: vec![periodic(&[1, 2], 12.0)],
        },
        Example {
            name: "two-body-mixed",
            summary: "two bodies, m1 = 3, exponential-velocity r1 = 1/3 with harmonic r2 = 1/4",
            m1: 3,
            model: GeneratingModel::new(
                Order::Second,
                OMEGA,
                vec![
                    Component::ExpVelocity { r: q(1, 3) },
                    Component::Harmonic { r: q(1, 4) },
                ],
            )
            .unwrap(),
            x0: vec![c(33.68, 30.30), c(-160.42, -84.73)],
            xdot0: vec![c(66.18, 77.73), c(-474.40, -227.29)],
            t_end: 48.0,
            dt: 1e-3,
            reference_periods: vec![periodic(&[1, 2], 24.0)],
        },
        Example {
            name: "two-body-damped",
            summary: "two bodies, m1 = 6, harmonic r1 = 1/3 with damped a = 0.1",
            m1: 6,
            model: GeneratingModel::new(
                Order::Second,
                OMEGA,
                vec![
                    Component::Harmonic { r: q(1, 3) },
                    Component::Damped { a: 0.1 },
                ],
            )
            .unwrap(),
            x0: vec![c(295.50, 156.68), c(-1082.47, -679.55)],
            xdot0: vec![c(14.47, 5.64), c(0.36, 1.79)],
            t_end: 200.0,
            dt: 1e-3,
            reference_periods: vec![ReferencePeriod {
                roots: vec![1, 2],
                period: 3.0,
                asymptotic: true,
            }],
        },
        Example {
            name: "three-body-exp",
            summary: "three bodies, m1 = 5, exponential-velocity model r = (1/2, 1/3, 1/2)",
            m1: 5,
            model: GeneratingModel::exp_velocity(OMEGA, &[q(1, 2), q(1, 3), q(1, 2)]).unwrap(),
            x0: vec![c(-0.06, -0.69), c(8.51, 40.06), c(-31.70, -13.50)],
            xdot0: vec![c(3.94, -0.82), c(-52.50, 13.06), c(-10.87, -17.44)],
            t_end: 48.0,
            dt: 1e-3,
            reference_periods: vec![periodic(&[1], 12.0), periodic(&[2, 3], 24.0)],
        },
        Example {
            name: "three-body-harmonic",
            summary: "three bodies, m1 = 5, harmonic model r = (1/2, 1/3, 1/4)",
            m1: 5,
            model: GeneratingModel::harmonic(OMEGA, &[q(1, 2), q(1, 3), q(1, 4)]).unwrap(),
            x0: vec![c(16.92, -28.19), c(29.24, 90.02), c(-70.22, 40.41)],
            xdot0: vec![c(42.07, 19.38), c(-88.07, 23.34), c(-37.49, -99.06)],
            t_end: 48.0,
            dt: 1e-3,
            reference_periods: vec![periodic(&[1], 6.0), periodic(&[2, 3], 24.0)],
        },
    ]
}

pub fn example(name: &str) -> Option<Example> {
    examples().into_iter().find(|e| e.name == name)
}
