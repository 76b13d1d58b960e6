//! Time evolution: an exact algebraic engine (coefficient flow + root
//! extraction), a direct integrator of the root equations of motion, and
//! period detection on the resulting trajectories.

mod algebraic;
mod assign;
mod direct;
mod period;
mod roots;

pub use algebraic::solve_algebraic;
pub use assign::{track_assignment, Assignment};
pub use direct::integrate_direct;
pub use period::{estimate_period, PeriodOptions, PeriodReport, PeriodVerdict};
pub use roots::{roots_of, roots_with_multiplicity, RootError, RootOptions};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeffs::CoeffError;
use crate::dynamics::DynamicsError;
use crate::models::{GeneratingModel, ModelError, Order};
use crate::vieta::{check_distinct, collision_threshold, CollisionError};

/// Initial-value problem in root space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ivp {
    pub m1: usize,
    pub model: GeneratingModel,
    pub t0: f64,
    /// Distinct roots; `x0[0]` is the multiple one.
    pub x0: Vec<Complex64>,
    /// Required for second-order models.
    #[serde(default)]
    pub xdot0: Option<Vec<Complex64>>,
}

impl Ivp {
    pub fn new(
        m1: usize,
        model: GeneratingModel,
        t0: f64,
        x0: Vec<Complex64>,
        xdot0: Option<Vec<Complex64>>,
    ) -> Self {
        Self {
            m1,
            model,
            t0,
            x0,
            xdot0,
        }
    }

    pub fn n_roots(&self) -> usize {
        self.x0.len()
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if self.m1 == 0 {
            return Err(SolverError::Coefficients(CoeffError::InvalidMultiplicity(
                0,
            )));
        }
        if self.x0.is_empty() {
            return Err(SolverError::InvalidInput("no roots given".into()));
        }
        self.model.validate()?;
        if self.model.dimension() != self.x0.len() {
            return Err(SolverError::InvalidInput(format!(
                "model drives {} coefficients but {} roots were given",
                self.model.dimension(),
                self.x0.len()
            )));
        }
        match (&self.xdot0, self.model.order()) {
            (None, Order::Second) => {
                return Err(SolverError::InvalidInput(
                    "second-order model needs initial velocities".into(),
                ))
            }
            (Some(v), _) if v.len() != self.x0.len() => {
                return Err(SolverError::InvalidInput(
                    "velocity count differs from root count".into(),
                ))
            }
            _ => {}
        }
        if !self.t0.is_finite() || self.x0.iter().any(|z| !z.is_finite()) {
            return Err(SolverError::InvalidInput("non-finite initial data".into()));
        }
        check_distinct(&self.x0, collision_threshold(&self.x0))
            .map_err(|source| SolverError::Collision { t: self.t0, source })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Algebraic,
    Direct,
}

/// Something noteworthy along the path that did not stop the solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BranchEvent {
    /// Local minimum of the pairwise distance between two roots (1-based).
    NearCollision {
        t: f64,
        i: usize,
        j: usize,
        distance: f64,
    },
    /// Optimal matching only marginally better than a swap.
    AmbiguousAssignment {
        t: f64,
        i: usize,
        j: usize,
        margin: f64,
    },
}

impl BranchEvent {
    pub fn time(&self) -> f64 {
        match self {
            BranchEvent::NearCollision { t, .. } | BranchEvent::AmbiguousAssignment { t, .. } => *t,
        }
    }
}

/// How a trajectory was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub engine: Engine,
    pub m1: usize,
    pub dt: f64,
    pub tol_root: f64,
    pub collision_rel: f64,
}

impl TrajectoryMeta {
    pub(crate) fn new(engine: Engine, m1: usize, dt: f64, cfg: &SolverConfig) -> Self {
        Self {
            engine,
            m1,
            dt,
            tol_root: cfg.tol_root,
            collision_rel: cfg.collision_rel,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub meta: TrajectoryMeta,
    /// Sample times, monotone in the direction of integration.
    pub times: Vec<f64>,
    /// `positions[k][n]` is root `n` at `times[k]`.
    pub positions: Vec<Vec<Complex64>>,
    pub velocities: Option<Vec<Vec<Complex64>>>,
    pub branch_events: Vec<BranchEvent>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_roots(&self) -> usize {
        self.positions.first().map_or(0, Vec::len)
    }

    /// Samples of root `n` (0-based).
    pub fn coordinate(&self, n: usize) -> Vec<Complex64> {
        self.positions.iter().map(|p| p[n]).collect()
    }

    /// Largest `|a - b|` over all samples and roots.
    pub fn max_deviation(&self, other: &Trajectory) -> f64 {
        self.positions
            .iter()
            .zip(&other.positions)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(u, v)| (u - v).norm()))
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Backward-error tolerance for root extraction.
    pub tol_root: f64,
    /// Relative collision threshold: roots closer than `rel (1 + max |x|)` collide.
    pub collision_rel: f64,
    /// Relative scale below which a pairwise distance minimum is reported.
    pub near_collision_rel: f64,
    /// Maximum bisection depth when root motion between samples is too large.
    pub max_refine_depth: usize,
    /// Roots may move at most this fraction of the local gap per step.
    pub motion_fraction: f64,
    /// Check the trailing-coefficient identities at every sample.
    pub check_extension: bool,
    /// Direct engine: substeps per output interval before adaptation.
    pub substeps: usize,
    /// Direct engine: substep limited by `h |v| ≤ κ gap` and `h² |a| ≤ κ gap`;
    /// `None` keeps the substep fixed.
    pub step_kappa: Option<f64>,
    pub max_step_halvings: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_root: 1e-9,
            collision_rel: 1e-8,
            near_collision_rel: 1e-2,
            max_refine_depth: 40,
            motion_fraction: 0.25,
            check_extension: cfg!(debug_assertions),
            substeps: 1,
            step_kappa: Some(0.01),
            max_step_halvings: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Coefficients(#[from] CoeffError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("collision at t = {t}: {source}")]
    Collision { t: f64, source: CollisionError },
    #[error("root extraction failed at t = {t}: {source}")]
    RootFinding { t: f64, source: RootError },
    #[error(
        "multiple-root structure lost at t = {t} (residual {residual:.3e}, limit {limit:.3e})"
    )]
    MultiplicityLost { t: f64, residual: f64, limit: f64 },
    #[error("step refinement exceeded depth {depth} near t = {t}")]
    RefinementDepth { t: f64, depth: usize },
    #[error("step size underflow at t = {t} (h = {h:.3e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("equations of motion failed at t = {t}: {source}")]
    Dynamics { t: f64, source: DynamicsError },
}

impl SolverError {
    /// Time at which a numerical failure happened, if any.
    pub fn time(&self) -> Option<f64> {
        match self {
            SolverError::Collision { t, .. }
            | SolverError::RootFinding { t, .. }
            | SolverError::MultiplicityLost { t, .. }
            | SolverError::RefinementDepth { t, .. }
            | SolverError::StepUnderflow { t, .. }
            | SolverError::NonFinite { t }
            | SolverError::Dynamics { t, .. } => Some(*t),
            _ => None,
        }
    }

    /// Whether the failure is a bad request rather than a numerical breakdown.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            SolverError::InvalidInput(_) | SolverError::Coefficients(_) | SolverError::Model(_)
        )
    }
}

/// Output grid `t0 + k dt` (toward `t_end`), `round(|t_end - t0| / dt) + 1` points.
pub(crate) fn sample_times(t0: f64, t_end: f64, dt: f64) -> Result<Vec<f64>, SolverError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SolverError::InvalidInput(format!(
            "dt must be positive, got {dt}"
        )));
    }
    if !t_end.is_finite() {
        return Err(SolverError::InvalidInput("t_end must be finite".into()));
    }
    let span = t_end - t0;
    let steps = (span.abs() / dt).round();
    if steps > 5e8 {
        return Err(SolverError::InvalidInput(
            "too many samples requested".into(),
        ));
    }
    let dir = if span < 0.0 { -1.0 } else { 1.0 };
    Ok((0..=steps as usize)
        .map(|k| t0 + dir * dt * k as f64)
        .collect())
}

/// Tracks pairwise-distance minima for near-collision reporting.
#[derive(Debug, Default)]
pub(crate) struct GapMonitor {
    history: Vec<(f64, Vec<f64>)>,
}

impl GapMonitor {
    /// Feeds one sample and returns the events whose minimum lies at the previous sample.
    pub(crate) fn push(&mut self, t: f64, x: &[Complex64], rel: f64) -> Vec<BranchEvent> {
        let n = x.len();
        let mut d = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                d.push((x[i] - x[j]).norm());
            }
        }
        self.history.push((t, d));
        if self.history.len() > 3 {
            self.history.remove(0);
        }
        let mut out = Vec::new();
        if self.history.len() == 3 {
            let scale = 1.0 + x.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
            let (a, b, c) = (&self.history[0].1, &self.history[1].1, &self.history[2].1);
            let tb = self.history[1].0;
            let mut k = 0;
            for i in 0..n {
                for j in (i + 1)..n {
                    if b[k] < a[k] && b[k] <= c[k] && b[k] < rel * scale {
                        out.push(BranchEvent::NearCollision {
                            t: tb,
                            i: i + 1,
                            j: j + 1,
                            distance: b[k],
                        });
                    }
                    k += 1;
                }
            }
        }
        out
    }
}
