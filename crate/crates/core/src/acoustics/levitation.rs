use std::f64::consts::PI;

use super::array::{DriveState, PhasedArrayModel};
use super::geometry::Vec3;
use super::solver::focus_phases;
use super::transducer::Medium;
use super::AcousticsError;

/// Largest allowed deviation from anti-parallel board normals.
pub const MAX_OPPOSITION_DEVIATION_DEG: f64 = 30.0;

/// Angle (deg) between `normal_a` and `-normal_b`.
pub fn opposition_deviation_deg(normal_a: &Vec3, normal_b: &Vec3) -> f64 {
    let c = (normal_a.dot(&-normal_b) / (normal_a.norm() * normal_b.norm())).clamp(-1.0, 1.0);
    c.acos().to_degrees()
}

/// Twin-sided trap: both boards focus on `trap_point` and board B is shifted
/// by π, leaving a pressure node at the trap with antinodes λ/4 either side
/// along the board axis.
pub fn levitation_signature(
    array_a: &PhasedArrayModel,
    array_b: &PhasedArrayModel,
    trap_point: &Vec3,
    medium: &Medium,
) -> Result<(DriveState, DriveState), AcousticsError> {
    let na = array_a.normal();
    let nb = array_b.normal();
    let deviation = opposition_deviation_deg(&na, &nb);
    if deviation > MAX_OPPOSITION_DEVIATION_DEG {
        return Err(AcousticsError::NotOpposed { deviation_deg: deviation });
    }
    let ahead_a = (trap_point - array_a.center()).dot(&na);
    let ahead_b = (trap_point - array_b.center()).dot(&nb);
    if ahead_a <= 0.0 || ahead_b <= 0.0 {
        return Err(AcousticsError::TrapNotBetweenBoards);
    }
    let drive_a = focus_phases(array_a, trap_point, medium)?;
    let drive_b = focus_phases(array_b, trap_point, medium)?.with_phase_offset(PI);
    Ok((drive_a, drive_b))
}
