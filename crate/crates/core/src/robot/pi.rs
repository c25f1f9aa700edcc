use serde::{Deserialize, Serialize};

use super::kinematics::{DiffDriveParams, PlanarPose};
use super::RobotError;

/// Proportional-integral term with a clamped accumulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PIState {
    pub kp: f64,
    pub ki: f64,
    pub integral: f64,
    pub clamp: f64,
}

impl PIState {
    pub fn new(kp: f64, ki: f64, clamp: f64) -> Self {
        Self { kp, ki, integral: 0.0, clamp }
    }

    pub fn heading_default() -> Self {
        Self::new(2.0, 0.1, 0.5)
    }

    pub fn speed_default() -> Self {
        Self::new(1.0, 0.05, 0.2)
    }

    pub fn validate(&self) -> Result<(), RobotError> {
        if self.kp >= 0.0 && self.ki >= 0.0 && self.clamp >= 0.0 {
            Ok(())
        } else {
            Err(RobotError::InvalidParams(format!("PI gains and clamp must be ≥ 0: {self:?}")))
        }
    }

    pub fn update(&mut self, error: f64, dt: f64) -> f64 {
        self.integral = (self.integral + error * dt).clamp(-self.clamp, self.clamp);
        self.kp * error + self.ki * self.integral
    }

    pub fn reset(&mut self) {
        self.integral = 0.0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WaypointParams {
    pub arrival_radius: f64,
    /// Cap on forward speed below the wheel limit, m/s.
    pub speed_limit: f64,
}

impl Default for WaypointParams {
    fn default() -> Self {
        Self { arrival_radius: 0.01, speed_limit: f64::INFINITY }
    }
}

/// One control update toward `waypoint = (x, y)`. Returns wheel speeds
/// `(vL, vR)`.
///
/// The turn term never exceeds the wheel limit, and forward speed is scaled
/// by the cosine of the heading error and then limited so neither wheel
/// exceeds `max_wheel_speed`.
pub fn pi_waypoint(
    pose: &PlanarPose,
    (wx, wy): (f64, f64),
    heading: &mut PIState,
    speed: &mut PIState,
    drive: &DiffDriveParams,
    limits: &WaypointParams,
    dt: f64,
) -> Result<(f64, f64), RobotError> {
    if !(dt > 0.0) {
        return Err(RobotError::NonPositiveDt(dt));
    }
    let distance = pose.distance_to(wx, wy);
    if distance <= limits.arrival_radius {
        heading.reset();
        speed.reset();
        return Ok((0.0, 0.0));
    }
    let max = drive.max_wheel_speed;
    let bearing = pose.bearing_to(wx, wy);
    let omega = heading.update(bearing, dt);
    let turn = (0.5 * omega * drive.wheel_base).clamp(-max, max);
    let alignment = bearing.cos().max(0.0);
    let forward = (speed.update(distance, dt) * alignment)
        .clamp(0.0, max - turn.abs())
        .min(limits.speed_limit);
    Ok((forward - turn, forward + turn))
}
