use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use super::AcousticsError;

pub type Vec3 = Vector3<f64>;

/// Wraps an angle into `[-π, π)`.
pub fn wrap_angle(angle: f64) -> f64 {
    let wrapped = (angle + PI).rem_euclid(TAU) - PI;
    // rem_euclid can return TAU for tiny negative inputs
    if wrapped >= PI {
        wrapped - TAU
    } else {
        wrapped
    }
}

/// Rigid placement of a board (or robot body) on the table.
///
/// `yaw` rotates about the world vertical (+z). `pitch` tilts the board
/// normal from +z toward the heading direction, so a pitch of π/2 leaves the
/// board standing vertical and facing forward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    yaw: f64,
    pitch: f64,
}

impl Pose {
    pub fn new(position: Vec3, yaw: f64, pitch: f64) -> Result<Self, AcousticsError> {
        if !(0.0..=FRAC_PI_2 + 1e-12).contains(&pitch) || !pitch.is_finite() {
            return Err(AcousticsError::InvalidPose(format!(
                "pitch {pitch} rad outside [0, π/2]"
            )));
        }
        if !yaw.is_finite() || !position.iter().all(|c| c.is_finite()) {
            return Err(AcousticsError::InvalidPose("non-finite pose".into()));
        }
        Ok(Self {
            position,
            yaw: wrap_angle(yaw),
            pitch: pitch.min(FRAC_PI_2),
        })
    }

    pub fn identity() -> Self {
        Self {
            position: Vec3::zeros(),
            yaw: 0.0,
            pitch: 0.0,
        }
    }

    pub fn at(position: Vec3) -> Self {
        Self {
            position,
            ..Self::identity()
        }
    }

    pub fn yaw(&self) -> f64 {
        self.yaw
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn rotation(&self) -> Rotation3<f64> {
        Rotation3::from_axis_angle(&Vector3::z_axis(), self.yaw)
            * Rotation3::from_axis_angle(&Vector3::y_axis(), self.pitch)
    }

    /// Board normal in world coordinates.
    pub fn normal(&self) -> Vec3 {
        self.rotation() * Vec3::z()
    }

    /// Maps a board-local point into the world frame.
    pub fn to_world(&self, local: &Vec3) -> Vec3 {
        self.position + self.rotation() * local
    }

    /// Applies a table-plane rigid motion: rotation by `angle` about the
    /// world vertical through the origin, then translation.
    pub fn moved(&self, angle: f64, translation: &Vec3) -> Self {
        let rot = Rotation3::from_axis_angle(&Vector3::z_axis(), angle);
        Self {
            position: rot * self.position + translation,
            yaw: wrap_angle(self.yaw + angle),
            pitch: self.pitch,
        }
    }
}
