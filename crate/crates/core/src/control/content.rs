use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::acoustics::{wrap_angle, Pose, Vec3};
use crate::robot::{HingeSetting, PlanarPose};

use super::ControlError;

/// Where a bot should stand: table position and heading.
pub type Station = PlanarPose;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Haptic,
    Audio,
    Levitation,
}

impl Modality {
    pub fn hinge(self) -> HingeSetting {
        match self {
            Self::Haptic => HingeSetting::Horizontal,
            Self::Audio => HingeSetting::Slope,
            Self::Levitation => HingeSetting::Vertical,
        }
    }
}

/// Amplitude modulation of the carrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Modulation {
    pub frequency: f64,
    pub depth: f64,
}

impl Default for Modulation {
    fn default() -> Self {
        Self { frequency: 200.0, depth: 1.0 }
    }
}

/// What the swarm should render.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentSpec {
    pub modality: Modality,
    /// Hands for haptics, one shared ear point for audio; unused for
    /// levitation.
    #[serde(default)]
    pub targets: Vec<Vec3>,
    #[serde(default)]
    pub modulation: Modulation,
    #[serde(default)]
    pub trap: Option<Vec3>,
}

impl ContentSpec {
    pub fn validate(&self) -> Result<(), ControlError> {
        let m = self.modulation;
        if !(0.0..=1.0).contains(&m.depth) || !(m.frequency >= 0.0) {
            return Err(ControlError::InvalidContent(format!("modulation {m:?}")));
        }
        match self.modality {
            Modality::Levitation if self.trap.is_none() => {
                Err(ControlError::InvalidContent("levitation needs a trap point".into()))
            }
            Modality::Haptic if self.targets.is_empty() => {
                Err(ControlError::InvalidContent("haptics needs at least one hand target".into()))
            }
            Modality::Audio if self.targets.len() != 1 => {
                Err(ControlError::InvalidContent("audio needs exactly one shared focal point".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub pos_tol: f64,
    pub yaw_tol_deg: f64,
    /// Poses older than this are not acted on, s.
    pub staleness: f64,
    pub dispenser_pos_tol: f64,
    pub dispenser_yaw_tol_deg: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { pos_tol: 0.01, yaw_tol_deg: 2.0, staleness: 0.25, dispenser_pos_tol: 0.003, dispenser_yaw_tol_deg: 0.5 }
    }
}

/// True iff the bot is within `pos_tol` of the station on the table and
/// within `yaw_tol` of its heading.
pub fn alignment_check(pose: &PlanarPose, station: &Station, tol: &Tolerances) -> bool {
    pose.distance_to(station.x, station.y) <= tol.pos_tol
        && wrap_angle(pose.yaw - station.yaw).abs() <= tol.yaw_tol_deg.to_radians()
}

/// Where the board sits on its robot. The hinge pivot is `pivot_height`
/// above the robot centre; tilting swings the board centre forward by up
/// to `pivot_forward`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MountGeometry {
    pub pivot_height: f64,
    pub pivot_forward: f64,
}

impl Default for MountGeometry {
    fn default() -> Self {
        Self { pivot_height: 0.10, pivot_forward: 0.03 }
    }
}

impl MountGeometry {
    pub fn board_centre(&self, robot: &PlanarPose, pitch: f64) -> Vec3 {
        let reach = self.pivot_forward * pitch.sin();
        Vec3::new(robot.x + reach * robot.yaw.cos(), robot.y + reach * robot.yaw.sin(), self.pivot_height)
    }

    pub fn board_pose(&self, robot: &PlanarPose, pitch: f64) -> Pose {
        Pose::new(self.board_centre(robot, pitch), robot.yaw, pitch.clamp(0.0, FRAC_PI_2))
            .expect("finite robot pose and clamped pitch")
    }

    /// Robot pose that puts the board centre over `(x, y)` at `pitch`.
    fn robot_for_board(&self, x: f64, y: f64, yaw: f64, pitch: f64) -> Station {
        let reach = self.pivot_forward * pitch.sin();
        PlanarPose::new(x - reach * yaw.cos(), y - reach * yaw.sin(), yaw)
    }
}

/// Station layout per modality. All distances in metres, angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StationGeometry {
    pub mount: MountGeometry,
    /// Heading of the audio pair toward the listener.
    pub audio_heading: f64,
    pub audio_spacing: f64,
    /// Distance from the board centre to the ear along the tilted normal.
    pub audio_standoff: f64,
    /// Direction of the line joining the two levitation boards.
    pub levitation_axis: f64,
    pub levitation_separation: f64,
    pub dispenser_arm: f64,
    pub chute_height: f64,
}

impl Default for StationGeometry {
    fn default() -> Self {
        Self {
            mount: MountGeometry::default(),
            audio_heading: 0.0,
            audio_spacing: 0.15,
            audio_standoff: 0.3,
            levitation_axis: 0.0,
            levitation_separation: 0.10,
            dispenser_arm: 0.15,
            chute_height: 0.25,
        }
    }
}

impl StationGeometry {
    /// Board flat and centred under the hand.
    pub fn haptic_station(&self, hand: &Vec3) -> Station {
        self.mount.robot_for_board(hand.x, hand.y, 0.0, 0.0)
    }

    /// Two boards side by side, tilted toward the ear.
    pub fn audio_stations(&self, ear: &Vec3) -> [Station; 2] {
        let h = self.audio_heading;
        let back = self.audio_standoff * FRAC_PI_4.sin();
        let (cx, cy) = (ear.x - back * h.cos(), ear.y - back * h.sin());
        let half = 0.5 * self.audio_spacing;
        let (lx, ly) = (-h.sin() * half, h.cos() * half);
        [
            self.mount.robot_for_board(cx + lx, cy + ly, h, FRAC_PI_4),
            self.mount.robot_for_board(cx - lx, cy - ly, h, FRAC_PI_4),
        ]
    }

    /// Two vertical boards facing each other across the trap.
    pub fn levitation_stations(&self, trap: &Vec3) -> [Station; 2] {
        let a = self.levitation_axis;
        let half = 0.5 * self.levitation_separation;
        let (ux, uy) = (a.cos(), a.sin());
        [
            self.mount.robot_for_board(trap.x - half * ux, trap.y - half * uy, a, FRAC_PI_2),
            self.mount.robot_for_board(trap.x + half * ux, trap.y + half * uy, a + PI, FRAC_PI_2),
        ]
    }

    /// Dispenser square to the levitation axis with its chute over the trap.
    pub fn dispenser_station(&self, trap: &Vec3) -> Station {
        let yaw = self.levitation_axis + FRAC_PI_2;
        PlanarPose::new(trap.x - self.dispenser_arm * yaw.cos(), trap.y - self.dispenser_arm * yaw.sin(), yaw)
    }

    pub fn chute_exit(&self, dispenser: &PlanarPose) -> Vec3 {
        Vec3::new(
            dispenser.x + self.dispenser_arm * dispenser.yaw.cos(),
            dispenser.y + self.dispenser_arm * dispenser.yaw.sin(),
            self.chute_height,
        )
    }
}
