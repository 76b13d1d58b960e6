//! Exact-flow engine: evolve the coefficients in closed form, then recover
//! the roots at each sample.

use num_complex::Complex64;

use super::assign::track_assignment;
use super::roots::{roots_of, RootOptions};
use super::{
    sample_times, BranchEvent, Engine, GapMonitor, Ivp, SolverConfig, SolverError, Trajectory,
    TrajectoryMeta,
};
use crate::coeffs::CoefficientTables;
use crate::dynamics::{DynamicsOptions, Kinematics};
use crate::models::{GeneratingModel, Order};
use crate::vieta::{
    assemble_polynomial, check_distinct, coeff_derivs_from_roots, coeffs_from_roots, extend_y,
    extension_residual, multiple_root_equation, scale, RootState,
};

#[derive(Debug, Clone)]
struct CoeffPoint {
    t: f64,
    y: Vec<Complex64>,
    /// `ẏ`; for first-order models this is `f(y)`.
    v: Vec<Complex64>,
}

/// Coefficient evolution: exact from the initial data, or RK4 for linear
/// systems without a registered flow.
struct CoeffFlow<'a> {
    model: &'a GeneratingModel,
    initial: CoeffPoint,
}

impl CoeffFlow<'_> {
    fn at(&self, from: &CoeffPoint, t: f64) -> Result<CoeffPoint, SolverError> {
        let m = self.model;
        if m.has_closed_form() {
            let v0 = (m.order() == Order::Second).then_some(&self.initial.v[..]);
            let (y, v) = m.flow(self.initial.t, t, &self.initial.y, v0)?;
            return Ok(CoeffPoint { t, y, v });
        }
        self.integrate(from, t)
    }

    fn integrate(&self, from: &CoeffPoint, t: f64) -> Result<CoeffPoint, SolverError> {
        let m = self.model;
        let sys = m
            .linear_system()
            .expect("numeric flow needs a linear system");
        let norm = |a: &Vec<Vec<Complex64>>| {
            a.iter()
                .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        let rate = match m.order() {
            Order::Second => norm(&sys.a).sqrt() + sys.b.as_ref().map_or(0.0, norm),
            Order::First => norm(&sys.a),
        }
        .max(1e-12);
        let span = t - from.t;
        let steps = ((span.abs() * rate / 0.01).ceil() as usize).max(1);
        let h = span / steps as f64;
        let n = from.y.len();
        let second = m.order() == Order::Second;
        // state (y, v); for first order v is recomputed
        let f = |y: &[Complex64],
                 v: &[Complex64]|
         -> Result<(Vec<Complex64>, Vec<Complex64>), SolverError> {
            if second {
                Ok((v.to_vec(), m.rhs(0.0, y, Some(v))?))
            } else {
                Ok((m.rhs(0.0, y, None)?, vec![Complex64::new(0.0, 0.0); n]))
            }
        };
        let axpy = |a: &[Complex64], b: &[Complex64], s: f64| -> Vec<Complex64> {
            a.iter().zip(b).map(|(x, y)| x + y * s).collect()
        };
        let (mut y, mut v) = (from.y.clone(), from.v.clone());
        for _ in 0..steps {
            let (k1y, k1v) = f(&y, &v)?;
            let (k2y, k2v) = f(&axpy(&y, &k1y, h / 2.0), &axpy(&v, &k1v, h / 2.0))?;
            let (k3y, k3v) = f(&axpy(&y, &k2y, h / 2.0), &axpy(&v, &k2v, h / 2.0))?;
            let (k4y, k4v) = f(&axpy(&y, &k3y, h), &axpy(&v, &k3v, h))?;
            for i in 0..n {
                y[i] += (k1y[i] + k2y[i] * 2.0 + k3y[i] * 2.0 + k4y[i]) * (h / 6.0);
                v[i] += (k1v[i] + k2v[i] * 2.0 + k3v[i] * 2.0 + k4v[i]) * (h / 6.0);
            }
        }
        if !second {
            v = m.rhs(t, &y, None)?;
        }
        Ok(CoeffPoint { t, y, v })
    }
}

#[derive(Debug, Clone)]
struct Sample {
    coeff: CoeffPoint,
    /// Tracked roots, `x[0]` the multiple one.
    x: Vec<Complex64>,
    /// Roots of the multiple-root equation, `x1` first.
    eq_roots: Vec<Complex64>,
}

enum StepFailure {
    /// Roots moved too far for the matching to be trusted; refine.
    TooFar,
    Fatal(SolverError),
}

impl From<SolverError> for StepFailure {
    fn from(e: SolverError) -> Self {
        StepFailure::Fatal(e)
    }
}

const AMBIGUITY_REFINEMENTS: usize = 8;

struct Engine1<'a> {
    tables: &'a CoefficientTables,
    flow: CoeffFlow<'a>,
    cfg: &'a SolverConfig,
    ropts: RootOptions,
    events: Vec<BranchEvent>,
}

fn nearest(z: Complex64, pool: &[Complex64]) -> usize {
    (0..pool.len())
        .min_by(|&a, &b| (pool[a] - z).norm().total_cmp(&(pool[b] - z).norm()))
        .unwrap()
}

fn gap_to_others(z: Complex64, pool: &[Complex64], skip: usize) -> f64 {
    pool.iter()
        .enumerate()
        .filter(|&(k, _)| k != skip)
        .map(|(_, w)| (w - z).norm())
        .fold(f64::INFINITY, f64::min)
}

impl Engine1<'_> {
    fn threshold(&self, x: &[Complex64]) -> f64 {
        self.cfg.collision_rel * (1.0 + x.iter().fold(0.0_f64, |m, z| m.max(z.norm())))
    }

    /// Roots for the coefficients `c`, continued from `prev`.
    fn extract(
        &mut self,
        prev: &Sample,
        c: CoeffPoint,
        depth: usize,
    ) -> Result<Sample, StepFailure> {
        let t = c.t;
        let m1 = self.tables.m1();
        let big_n = self.tables.n_roots();
        if c.y.iter().chain(&c.v).any(|z| !z.is_finite()) {
            return Err(SolverError::NonFinite { t }.into());
        }

        let eq = multiple_root_equation(&c.y, self.tables);
        let mut eq_roots = match roots_of(&eq, Some(&prev.eq_roots), &self.ropts) {
            Ok(r) => r,
            Err(_) if prev.coeff.t != t => return Err(StepFailure::TooFar),
            Err(source) => return Err(SolverError::RootFinding { t, source }.into()),
        };
        let k = nearest(prev.x[0], &eq_roots);
        eq_roots.swap(0, k);
        // one Newton polish on the simple root
        let (pv, dv) = eq.eval_with_derivative(eq_roots[0]);
        if dv.norm() > 0.0 && (pv / dv).is_finite() {
            eq_roots[0] -= pv / dv;
        }
        let x1 = eq_roots[0];
        if (x1 - prev.x[0]).norm() > self.cfg.motion_fraction * gap_to_others(x1, &eq_roots, 0) {
            return Err(StepFailure::TooFar);
        }
        // the other equation roots keep their previous order for seeding
        let rest_prev: Vec<Complex64> = prev.eq_roots[1..].to_vec();
        if !rest_prev.is_empty() {
            let a = track_assignment(&rest_prev, &eq_roots[1..]);
            let ordered = a.apply(&eq_roots[1..]);
            eq_roots[1..].copy_from_slice(&ordered);
        }

        let mut y_full = c.y.clone();
        y_full.extend(extend_y(&c.y, x1, self.tables));
        let poly = assemble_polynomial(&y_full);
        let (quot, rems) = poly.deflate_repeated(x1, m1 + 1);

        let mut x = Vec::with_capacity(big_n);
        x.push(x1);
        let mut flagged = None;
        if big_n > 1 {
            let cand = match roots_of(&quot, Some(&prev.x[1..]), &self.ropts) {
                Ok(r) => r,
                Err(_) if prev.coeff.t != t => return Err(StepFailure::TooFar),
                Err(source) => return Err(SolverError::RootFinding { t, source }.into()),
            };
            let a = track_assignment(&prev.x[1..], &cand);
            x.extend(a.apply(&cand));
            let thr = self.threshold(&x);
            if a.is_ambiguous(thr) {
                // try a finer step first; keep the flag only if it persists
                if depth < AMBIGUITY_REFINEMENTS && prev.coeff.t != t {
                    return Err(StepFailure::TooFar);
                }
                let (margin, i, j) = a.swap_margin.unwrap();
                flagged = Some(BranchEvent::AmbiguousAssignment {
                    t,
                    i: i + 2,
                    j: j + 2,
                    margin,
                });
            }
        }

        let thr = self.threshold(&x);
        check_distinct(&x, thr).map_err(|source| SolverError::Collision { t, source })?;
        for n in 1..big_n {
            if (x[n] - prev.x[n]).norm() > self.cfg.motion_fraction * gap_to_others(x[n], &x, n) {
                return Err(StepFailure::TooFar);
            }
        }

        let sc = scale(&x, m1);
        let limit = 1e-6 * sc;
        let residual = rems.iter().map(|r| r.norm()).fold(0.0, f64::max);
        if !(residual <= limit) {
            return Err(SolverError::MultiplicityLost { t, residual, limit }.into());
        }
        if self.cfg.check_extension {
            let residual = extension_residual(&y_full, x1, self.tables);
            let limit = 1e-8 * sc;
            if !(residual <= limit) {
                return Err(SolverError::MultiplicityLost { t, residual, limit }.into());
            }
        }
        self.events.extend(flagged);
        Ok(Sample {
            coeff: c,
            x,
            eq_roots,
        })
    }

    fn advance(&mut self, prev: &Sample, t: f64, depth: usize) -> Result<Sample, SolverError> {
        let c = self.flow.at(&prev.coeff, t)?;
        match self.extract(prev, c, depth) {
            Ok(s) => Ok(s),
            Err(StepFailure::Fatal(e)) => Err(e),
            Err(StepFailure::TooFar) => {
                if depth >= self.cfg.max_refine_depth {
                    return Err(SolverError::RefinementDepth {
                        t,
                        depth: self.cfg.max_refine_depth,
                    });
                }
                let mid = 0.5 * (prev.coeff.t + t);
                let s_mid = self.advance(prev, mid, depth + 1)?;
                self.advance(&s_mid, t, depth + 1)
            }
        }
    }

    fn velocities(&self, s: &Sample) -> Result<Vec<Complex64>, SolverError> {
        let t = s.coeff.t;
        let opts = DynamicsOptions {
            collision_threshold: Some(self.threshold(&s.x)),
            ..DynamicsOptions::default()
        };
        let k = Kinematics::new(&s.x, self.tables, &opts)
            .map_err(|source| SolverError::Dynamics { t, source })?;
        k.h_first_all(&s.coeff.y, &s.coeff.v)
            .map_err(|source| SolverError::Dynamics { t, source })
    }
}

/// Samples the trajectory on `t0, t0 ± dt, …` through `t_end` using the
/// coefficient flow and root extraction. Velocities come from the
/// first-order root equations with the flow's `ẏ`.
pub fn solve_algebraic(
    ivp: &Ivp,
    t_end: f64,
    dt: f64,
    cfg: &SolverConfig,
) -> Result<Trajectory, SolverError> {
    ivp.validate()?;
    let times = sample_times(ivp.t0, t_end, dt)?;
    let big_n = ivp.n_roots();
    let tables = CoefficientTables::shared(big_n, ivp.m1)?;
    let model = &ivp.model;

    let state = match &ivp.xdot0 {
        Some(v) => RootState::with_velocities(ivp.x0.clone(), v.clone(), ivp.m1),
        None => RootState::new(ivp.x0.clone(), ivp.m1),
    };
    let y0 = coeffs_from_roots(&state)[..big_n].to_vec();
    let v0 = match model.order() {
        Order::Second => coeff_derivs_from_roots(&state),
        Order::First => model.rhs(ivp.t0, &y0, None)?,
    };
    let initial = CoeffPoint {
        t: ivp.t0,
        y: y0,
        v: v0,
    };

    let ropts = RootOptions {
        tol: cfg.tol_root,
        ..RootOptions::default()
    };
    let eq = multiple_root_equation(&initial.y, &tables);
    let mut eq_roots = roots_of(&eq, None, &ropts)
        .map_err(|source| SolverError::RootFinding { t: ivp.t0, source })?;
    let k = nearest(ivp.x0[0], &eq_roots);
    eq_roots.swap(0, k);
    eq_roots[0] = ivp.x0[0];

    let mut eng = Engine1 {
        tables: &tables,
        flow: CoeffFlow {
            model,
            initial: initial.clone(),
        },
        cfg,
        ropts,
        events: Vec::new(),
    };
    let mut cur = Sample {
        coeff: initial,
        x: ivp.x0.clone(),
        eq_roots,
    };

    let mut positions = Vec::with_capacity(times.len());
    let mut velocities = Vec::with_capacity(times.len());
    let mut gaps = GapMonitor::default();
    let mut near = Vec::new();

    positions.push(cur.x.clone());
    velocities.push(match &ivp.xdot0 {
        Some(v) if model.order() == Order::Second => v.clone(),
        _ => eng.velocities(&cur)?,
    });
    near.extend(gaps.push(ivp.t0, &cur.x, cfg.near_collision_rel));

    for &t in &times[1..] {
        cur = eng.advance(&cur, t, 0)?;
        velocities.push(eng.velocities(&cur)?);
        near.extend(gaps.push(t, &cur.x, cfg.near_collision_rel));
        positions.push(cur.x.clone());
    }

    let mut branch_events = eng.events;
    branch_events.extend(near);
    branch_events.sort_by(|a, b| a.time().total_cmp(&b.time()));
    if times.len() > 1 && times[1] < times[0] {
        branch_events.reverse();
    }

    Ok(Trajectory {
        meta: TrajectoryMeta::new(Engine::Algebraic, ivp.m1, dt, cfg),
        times,
        positions,
        velocities: Some(velocities),
        branch_events,
    })
}
