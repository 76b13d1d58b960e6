//! Recurrence-based period detection on sampled trajectories.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{SolverError, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodOptions {
    /// Recurrence tolerance on `|x(t+T) - x(t)| / (1 + |x(t)|)`.
    pub tol: f64,
    /// Multiples of the candidate tried, in ascending order.
    pub max_multiple: usize,
    /// Blocks used to test monotone decay of the recurrence defect.
    pub blocks: usize,
}

impl Default for PeriodOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            max_multiple: 4,
            blocks: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum PeriodVerdict {
    Periodic {
        period: f64,
        multiple: usize,
        defect: f64,
    },
    /// The recurrence defect decays monotonically below tolerance.
    Asymptotic {
        period: f64,
        multiple: usize,
        defect: f64,
        initial_defect: f64,
    },
    Aperiodic {
        best_defect: f64,
    },
    /// Not even the candidate fits inside the sampled span.
    InsufficientSpan,
}

impl PeriodVerdict {
    pub fn period(&self) -> Option<f64> {
        match self {
            PeriodVerdict::Periodic { period, .. } | PeriodVerdict::Asymptotic { period, .. } => {
                Some(*period)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodReport {
    /// 0-based root index.
    pub coordinate: usize,
    pub verdict: PeriodVerdict,
}

fn defects(z: &[Complex64], lag: usize) -> Vec<f64> {
    (0..z.len() - lag)
        .map(|i| (z[i + lag] - z[i]).norm() / (1.0 + z[i].norm()))
        .collect()
}

fn decays(d: &[f64], blocks: usize, tol: f64) -> Option<(f64, f64)> {
    let blocks = blocks.max(2);
    if d.len() < blocks {
        return None;
    }
    let size = d.len() / blocks;
    let maxima: Vec<f64> = (0..blocks)
        .map(|b| {
            let end = if b + 1 == blocks {
                d.len()
            } else {
                (b + 1) * size
            };
            d[b * size..end].iter().cloned().fold(0.0, f64::max)
        })
        .collect();
    let monotone = maxima
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-13);
    let (first, last) = (maxima[0], *maxima.last().unwrap());
    (monotone && last < tol && first > tol).then_some((last, first))
}

/// Classifies every coordinate of `traj` against `candidate` and its multiples.
///
/// The candidate must be a whole number of sample intervals.
pub fn estimate_period(
    traj: &Trajectory,
    candidate: f64,
    opts: &PeriodOptions,
) -> Result<Vec<PeriodReport>, SolverError> {
    if traj.len() < 2 {
        return Err(SolverError::InvalidInput(
            "trajectory has fewer than two samples".into(),
        ));
    }
    if !(candidate > 0.0 && candidate.is_finite()) {
        return Err(SolverError::InvalidInput(format!(
            "candidate period must be positive, got {candidate}"
        )));
    }
    let dt = (traj.times[1] - traj.times[0]).abs();
    let steps = candidate / dt;
    let lag = steps.round();
    if (steps - lag).abs() > 1e-6 * steps.max(1.0) || lag < 1.0 {
        return Err(SolverError::InvalidInput(format!(
            "candidate {candidate} is not a multiple of the sample spacing {dt}"
        )));
    }
    let lag = lag as usize;

    let reports = (0..traj.n_roots())
        .map(|n| {
            let z = traj.coordinate(n);
            let mut best = f64::INFINITY;
            let mut tested = Vec::new();
            for k in 1..=opts.max_multiple.max(1) {
                let l = k * lag;
                if l >= z.len() {
                    break;
                }
                let d = defects(&z, l);
                let worst = d.iter().cloned().fold(0.0, f64::max);
                best = best.min(worst);
                if worst < opts.tol {
                    return PeriodReport {
                        coordinate: n,
                        verdict: PeriodVerdict::Periodic {
                            period: candidate * k as f64,
                            multiple: k,
                            defect: worst,
                        },
                    };
                }
                tested.push((k, d));
            }
            if tested.is_empty() {
                return PeriodReport {
                    coordinate: n,
                    verdict: PeriodVerdict::InsufficientSpan,
                };
            }
            for (k, d) in &tested {
                if let Some((defect, initial_defect)) = decays(d, opts.blocks, opts.tol) {
                    return PeriodReport {
                        coordinate: n,
                        verdict: PeriodVerdict::Asymptotic {
                            period: candidate * *k as f64,
                            multiple: *k,
                            defect,
                            initial_defect,
                        },
                    };
                }
            }
            PeriodReport {
                coordinate: n,
                verdict: PeriodVerdict::Aperiodic { best_defect: best },
            }
        })
        .collect();
    Ok(reports)
}
