//! Drive solvers: single-point conjugate focusing and multi-point
//! Gerchberg–Saxton phase retrieval across one or more boards.

use num_complex::Complex64;

use super::array::{wrap_phase, DriveState, PhasedArrayModel};
use super::geometry::Vec3;
use super::transducer::{piston_pressure, Medium, NEAR_FIELD_GUARD};
use super::AcousticsError;

pub const MAX_TARGETS: usize = 32;

/// Phases that bring every element's contribution to phase zero at `target`.
pub fn focus_phases(array: &PhasedArrayModel, target: &Vec3, medium: &Medium) -> Result<DriveState, AcousticsError> {
    let k = medium.wavenumber();
    let mut phases = Vec::with_capacity(array.len());
    for element in array.elements() {
        let d = (target - element.position).norm();
        if d < NEAR_FIELD_GUARD {
            return Err(AcousticsError::TargetOnElement);
        }
        phases.push(wrap_phase(-k * d));
    }
    DriveState::new(phases, vec![1.0; array.len()])
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultipointSolution {
    /// One drive per input board, in input order.
    pub drives: Vec<DriveState>,
    /// Complex pressure achieved at each target by the returned drives.
    pub achieved: Vec<Complex64>,
    /// Uniformity residual (`max|p| / min|p| − 1`) of the retained drive
    /// after each iteration.
    pub residual_history: Vec<f64>,
    /// Uniformity residual of the raw iterate after each iteration.
    pub raw_residual_history: Vec<f64>,
}

impl MultipointSolution {
    pub fn residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::INFINITY)
    }

    /// True when the residual never grew from one iteration to the next.
    pub fn residual_non_increasing(&self, slack: f64) -> bool {
        self.residual_history
            .windows(2)
            .all(|w| w[1] <= w[0] * (1.0 + slack) + slack)
    }
}

/// Anything that turns a set of focal targets into board drives.
pub trait MultipointSolver {
    fn solve(
        &self,
        arrays: &[&PhasedArrayModel],
        targets: &[Vec3],
        medium: &Medium,
    ) -> Result<MultipointSolution, AcousticsError>;
}

/// Matrix-free weighted Gerchberg–Saxton iteration.
///
/// Each pass forward-propagates the element drives to the targets, keeps the
/// target phases while steering the amplitudes toward a uniform goal through
/// multiplicative weights, back-propagates the conjugate, and projects every
/// element onto unit amplitude. With a single target the first pass is exact
/// conjugate focusing.
///
/// The raw iterates are not monotone in uniformity, so the solver retains the
/// most uniform iterate seen so far and returns that one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GerchbergSaxton {
    pub iterations: usize,
}

impl Default for GerchbergSaxton {
    fn default() -> Self {
        Self { iterations: 100 }
    }
}

/// Amplitude-uniformity residual `max|p| / min|p| − 1`.
pub fn uniformity_residual(achieved: &[Complex64]) -> f64 {
    let (lo, hi) = achieved
        .iter()
        .map(|p| p.norm())
        .fold((f64::INFINITY, 0.0_f64), |(lo, hi), a| (lo.min(a), hi.max(a)));
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo - 1.0
    }
}

fn validate_targets(arrays: &[&PhasedArrayModel], targets: &[Vec3]) -> Result<(), AcousticsError> {
    if targets.is_empty() || targets.len() > MAX_TARGETS {
        return Err(AcousticsError::TargetCount(targets.len()));
    }
    for (i, a) in targets.iter().enumerate() {
        for b in &targets[i + 1..] {
            if (a - b).norm() < NEAR_FIELD_GUARD {
                return Err(AcousticsError::DuplicateTargets);
            }
        }
        for array in arrays {
            if array.elements().iter().any(|e| (a - e.position).norm() < NEAR_FIELD_GUARD) {
                return Err(AcousticsError::TargetOnElement);
            }
        }
    }
    Ok(())
}

impl MultipointSolver for GerchbergSaxton {
    fn solve(
        &self,
        arrays: &[&PhasedArrayModel],
        targets: &[Vec3],
        medium: &Medium,
    ) -> Result<MultipointSolution, AcousticsError> {
        if self.iterations == 0 {
            return Err(AcousticsError::InvalidSolver("iterations must be ≥ 1".into()));
        }
        validate_targets(arrays, targets)?;

        // propagation[t][j]: unit-drive pressure of element j (all boards
        // concatenated) at target t
        let elements: Vec<_> = arrays.iter().flat_map(|a| a.elements().iter()).collect();
        let n = elements.len();
        let mut propagation = Vec::with_capacity(targets.len());
        for target in targets {
            let row: Result<Vec<Complex64>, _> = elements
                .iter()
                .map(|e| piston_pressure(e, 0.0, 1.0, target, medium))
                .collect();
            propagation.push(row?);
        }

        let forward = |q: &[Complex64]| -> Vec<Complex64> {
            propagation
                .iter()
                .map(|row| row.iter().zip(q).map(|(g, x)| g * x).sum())
                .collect()
        };

        let mut q = vec![Complex64::new(1.0, 0.0); n];
        let mut weights = vec![1.0; targets.len()];
        let mut history = Vec::with_capacity(self.iterations);
        let mut raw_history = Vec::with_capacity(self.iterations);
        let mut achieved = forward(&q);
        let mut best: Option<(f64, Vec<Complex64>, Vec<Complex64>)> = None;
        for _ in 0..self.iterations {
            // target plane: keep phase, push amplitudes toward their mean
            let mean = achieved.iter().map(|p| p.norm()).sum::<f64>() / achieved.len() as f64;
            let goal: Vec<Complex64> = achieved
                .iter()
                .zip(weights.iter_mut())
                .map(|(p, w)| {
                    let a = p.norm();
                    if a > 0.0 {
                        *w *= mean / a;
                        p / a * *w
                    } else {
                        Complex64::new(*w, 0.0)
                    }
                })
                .collect();
            // element plane: back-propagate and keep phase at unit amplitude
            for (j, qj) in q.iter_mut().enumerate() {
                let back: Complex64 = propagation.iter().zip(&goal).map(|(row, g)| row[j].conj() * g).sum();
                if back.norm() > 0.0 {
                    *qj = back / back.norm();
                }
            }
            achieved = forward(&q);
            let residual = uniformity_residual(&achieved);
            raw_history.push(residual);
            if best.as_ref().is_none_or(|(r, _, _)| residual < *r) {
                best = Some((residual, q.clone(), achieved.clone()));
            }
            history.push(best.as_ref().map_or(residual, |(r, _, _)| *r));
        }
        let (_, q, achieved) = best.expect("at least one iteration ran");

        let mut drives = Vec::with_capacity(arrays.len());
        let mut offset = 0;
        for array in arrays {
            let slice = &q[offset..offset + array.len()];
            drives.push(DriveState::from_raw(
                slice.iter().map(|c| c.arg()),
                slice.iter().map(|c| c.norm()),
            )?);
            offset += array.len();
        }
        Ok(MultipointSolution {
            drives,
            achieved,
            residual_history: history,
            raw_residual_history: raw_history,
        })
    }
}

pub fn multipoint_solve(
    arrays: &[&PhasedArrayModel],
    targets: &[Vec3],
    iterations: usize,
    medium: &Medium,
) -> Result<MultipointSolution, AcousticsError> {
    GerchbergSaxton { iterations }.solve(arrays, targets, medium)
}
