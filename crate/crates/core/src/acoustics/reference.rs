//! Reference board arrangements for the three interaction modes, used to
//! compare peak pressures between modes.
//!
//! * Single: one horizontal board, focus 50 mm above its centre.
//! * Shared: two boards tilted 45°, both facing +y, centres 150 mm apart
//!   along x. They share one focus 100 mm along the common tilted axis from
//!   the midpoint between them, so each board sees it off-axis.
//! * Joint: two vertical boards facing each other 100 mm apart playing the
//!   levitation signature; the peak is the antinode next to the trap.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use super::array::{ArrayConfig, CALIBRATION_FOCAL_DISTANCE};
use super::field::field_at;
use super::geometry::{Pose, Vec3};
use super::levitation::levitation_signature;
use super::profile::LineProfile;
use super::solver::{focus_phases, multipoint_solve};
use super::transducer::Medium;
use super::AcousticsError;

pub const SHARED_BOARD_SPACING: f64 = 0.15;
pub const SHARED_FOCAL_RANGE: f64 = 2.0 * CALIBRATION_FOCAL_DISTANCE;
pub const JOINT_SEPARATION: f64 = 0.10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferencePeaks {
    pub single: f64,
    pub shared: f64,
    pub joint: f64,
}

pub fn single_board_peak(config: &ArrayConfig, medium: &Medium) -> Result<f64, AcousticsError> {
    let array = config.build(Pose::identity())?;
    let focus = Vec3::new(0.0, 0.0, CALIBRATION_FOCAL_DISTANCE);
    let drive = focus_phases(&array, &focus, medium)?;
    Ok(field_at(&[(&array, &drive)], &focus, medium)?.norm())
}

pub fn shared_focus_peak(config: &ArrayConfig, medium: &Medium, iterations: usize) -> Result<f64, AcousticsError> {
    let half = SHARED_BOARD_SPACING / 2.0;
    let a = config.build(Pose::new(Vec3::new(-half, 0.0, 0.0), FRAC_PI_2, FRAC_PI_4)?)?;
    let b = config.build(Pose::new(Vec3::new(half, 0.0, 0.0), FRAC_PI_2, FRAC_PI_4)?)?;
    let focus = a.normal() * SHARED_FOCAL_RANGE;
    let solution = multipoint_solve(&[&a, &b], &[focus], iterations, medium)?;
    Ok(field_at(
        &[(&a, &solution.drives[0]), (&b, &solution.drives[1])],
        &focus,
        medium,
    )?
    .norm())
}

pub fn joint_trap_peak(config: &ArrayConfig, medium: &Medium) -> Result<f64, AcousticsError> {
    let half = JOINT_SEPARATION / 2.0;
    let a = config.build(Pose::new(Vec3::new(-half, 0.0, 0.0), 0.0, FRAC_PI_2)?)?;
    let b = config.build(Pose::new(Vec3::new(half, 0.0, 0.0), PI, FRAC_PI_2)?)?;
    let trap = Vec3::zeros();
    let (da, db) = levitation_signature(&a, &b, &trap, medium)?;
    let reach = medium.wavelength();
    let profile = LineProfile::scan(
        &[(&a, &da), (&b, &db)],
        Vec3::new(-reach, 0.0, 0.0),
        Vec3::new(reach, 0.0, 0.0),
        401,
        medium,
    )?;
    Ok(profile.samples.iter().copied().fold(0.0, f64::max))
}

pub fn reference_peaks(config: &ArrayConfig, medium: &Medium) -> Result<ReferencePeaks, AcousticsError> {
    Ok(ReferencePeaks {
        single: single_board_peak(config, medium)?,
        shared: shared_focus_peak(config, medium, 50)?,
        joint: joint_trap_peak(config, medium)?,
    })
}
