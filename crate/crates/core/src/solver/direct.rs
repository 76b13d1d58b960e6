//! Classical RK4 on the root equations of motion, with substeps shrunk
//! near close encounters.

use num_complex::Complex64;

use super::{
    sample_times, Engine, GapMonitor, Ivp, SolverConfig, SolverError, Trajectory, TrajectoryMeta,
};
use crate::dynamics::{DynamicsError, DynamicsOptions, FirstOrderRHS, SecondOrderRHS};
use crate::models::Order;
use crate::vieta::min_gap;

enum Rhs {
    First(FirstOrderRHS),
    Second(SecondOrderRHS),
}

/// Position/velocity pair; `v` is unused (empty) for first-order problems.
#[derive(Clone)]
struct State {
    x: Vec<Complex64>,
    v: Vec<Complex64>,
}

impl Rhs {
    /// Time derivative of the state.
    fn eval(&self, t: f64, s: &State) -> Result<State, DynamicsError> {
        match self {
            Rhs::First(r) => Ok(State {
                x: r.eval(t, &s.x)?,
                v: Vec::new(),
            }),
            Rhs::Second(r) => Ok(State {
                x: s.v.clone(),
                v: r.eval(t, &s.x, &s.v)?,
            }),
        }
    }
}

fn axpy(s: &State, d: &State, h: f64) -> State {
    let f = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(u, w)| u + w * h).collect();
    State {
        x: f(&s.x, &d.x),
        v: f(&s.v, &d.v),
    }
}

fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

fn rk4(rhs: &Rhs, t: f64, s: &State, k1: &State, h: f64) -> Result<State, DynamicsError> {
    let k2 = rhs.eval(t + h / 2.0, &axpy(s, k1, h / 2.0))?;
    let k3 = rhs.eval(t + h / 2.0, &axpy(s, &k2, h / 2.0))?;
    let k4 = rhs.eval(t + h, &axpy(s, &k3, h))?;
    let comb = |a: &[Complex64],
                b1: &[Complex64],
                b2: &[Complex64],
                b3: &[Complex64],
                b4: &[Complex64]| {
        (0..a.len())
            .map(|i| a[i] + (b1[i] + b2[i] * 2.0 + b3[i] * 2.0 + b4[i]) * (h / 6.0))
            .collect()
    };
    Ok(State {
        x: comb(&s.x, &k1.x, &k2.x, &k3.x, &k4.x),
        v: comb(&s.v, &k1.v, &k2.v, &k3.v, &k4.v),
    })
}

/// Integrates the root ODE directly and samples it on the same grid as
/// [`solve_algebraic`](super::solve_algebraic).
pub fn integrate_direct(
    ivp: &Ivp,
    t_end: f64,
    dt: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory, SolverError> {
    ivp.validate()?;
    let times = sample_times(ivp.t0, t_end, dt)?;
    let opts = DynamicsOptions {
        collision_rel: Some(cfg.collision_rel),
        ..DynamicsOptions::default()
    };
    let model = ivp.model.clone();
    let rhs = match model.order() {
        Order::First => Rhs::First(
            FirstOrderRHS::new(model, ivp.m1)
                .map_err(|source| dyn_err(ivp.t0, source))?
                .with_options(opts),
        ),
        Order::Second => Rhs::Second(
            SecondOrderRHS::new(model, ivp.m1)
                .map_err(|source| dyn_err(ivp.t0, source))?
                .with_options(opts),
        ),
    };
    let mut state = State {
        x: ivp.x0.clone(),
        v: match (&rhs, &ivp.xdot0) {
            (Rhs::Second(_), Some(v)) => v.clone(),
            _ => Vec::new(),
        },
    };
    let substeps = cfg.substeps.max(1);

    let mut positions = Vec::with_capacity(times.len());
    let mut velocities = Vec::with_capacity(times.len());
    let mut gaps = GapMonitor::default();
    let mut events = Vec::new();

    let mut t = ivp.t0;
    for (k, &target) in times.iter().enumerate() {
        if k > 0 {
            let h_base = (target - times[k - 1]) / substeps as f64;
            while (target - t) * h_base.signum() > 1e-12 * h_base.abs() {
                let k1 = rhs.eval(t, &state).map_err(|source| dyn_err(t, source))?;
                let remaining = target - t;
                let mut h = if h_base.abs() < remaining.abs() {
                    h_base
                } else {
                    remaining
                };
                let mut halvings = 0;
                if let Some(kappa) = cfg.step_kappa {
                    let gap = min_gap(&state.x);
                    let (vmax, amax) = match rhs {
                        Rhs::First(_) => (max_norm(&k1.x), 0.0),
                        Rhs::Second(_) => (max_norm(&state.v), max_norm(&k1.v)),
                    };
                    while h.abs() * vmax > kappa * gap || h * h * amax > kappa * gap {
                        h /= 2.0;
                        halvings += 1;
                        if halvings > cfg.max_step_halvings {
                            return Err(SolverError::StepUnderflow { t, h });
                        }
                    }
                }
                let next = loop {
                    match rk4(&rhs, t, &state, &k1, h) {
                        Ok(s) => break s,
                        Err(DynamicsError::Collision(_)) if halvings < cfg.max_step_halvings => {
                            h /= 2.0;
                            halvings += 1;
                        }
                        Err(DynamicsError::Collision(_)) => {
                            return Err(SolverError::StepUnderflow { t, h })
                        }
                        Err(source) => return Err(dyn_err(t, source)),
                    }
                };
                if next.x.iter().chain(&next.v).any(|z| !z.is_finite()) {
                    return Err(SolverError::NonFinite { t: t + h });
                }
                state = next;
                t = if (target - (t + h)).abs() <= 1e-12 * h_base.abs() {
                    target
                } else {
                    t + h
                };
            }
            t = target;
        }
        let vel = match &rhs {
            Rhs::Second(_) => state.v.clone(),
            Rhs::First(r) => r.eval(t, &state.x).map_err(|source| dyn_err(t, source))?,
        };
        events.extend(gaps.push(t, &state.x, cfg.near_collision_rel));
        positions.push(state.x.clone());
        velocities.push(vel);
    }

    Ok(Trajectory {
        meta: TrajectoryMeta::new(Engine::Direct, ivp.m1, dt, cfg),
        times,
        positions,
        velocities: Some(velocities),
        branch_events: events,
    })
}

fn dyn_err(t: f64, source: DynamicsError) -> SolverError {
    match source {
        DynamicsError::Collision(source) => SolverError::Collision { t, source },
        DynamicsError::Model(e) => SolverError::Model(e),
        DynamicsError::Coefficients(e) => SolverError::Coefficients(e),
        source => SolverError::Dynamics { t, source },
    }
}
