use serde::{Deserialize, Serialize};

use crate::acoustics::{wrap_angle, Vec3};

use super::RobotError;

/// Below this yaw rate the step is integrated as a straight line.
const STRAIGHT_LINE_RATE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiffDriveParams {
    pub wheel_base: f64,
    pub max_wheel_speed: f64,
    pub body_radius: f64,
}

impl Default for DiffDriveParams {
    fn default() -> Self {
        Self { wheel_base: 0.08, max_wheel_speed: 0.15, body_radius: 0.04 }
    }
}

impl DiffDriveParams {
    pub fn validate(&self) -> Result<(), RobotError> {
        let ok = [self.wheel_base, self.max_wheel_speed, self.body_radius]
            .iter()
            .all(|v| v.is_finite() && *v > 0.0);
        if ok {
            Ok(())
        } else {
            Err(RobotError::InvalidParams(format!("drive parameters must be positive: {self:?}")))
        }
    }
}

/// Position on the table plane plus heading, yaw wrapped to [−π, π).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PlanarPose {
    pub x: f64,
    pub y: f64,
    pub yaw: f64,
}

impl PlanarPose {
    pub fn new(x: f64, y: f64, yaw: f64) -> Self {
        Self { x, y, yaw: wrap_angle(yaw) }
    }

    pub fn position(&self) -> Vec3 {
        Vec3::new(self.x, self.y, 0.0)
    }

    pub fn distance_to(&self, x: f64, y: f64) -> f64 {
        (x - self.x).hypot(y - self.y)
    }

    pub fn bearing_to(&self, x: f64, y: f64) -> f64 {
        wrap_angle((y - self.y).atan2(x - self.x) - self.yaw)
    }

    /// Rotate about the origin by `angle`, then translate.
    pub fn transformed(&self, angle: f64, tx: f64, ty: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Self::new(c * self.x - s * self.y + tx, s * self.x + c * self.y + ty, self.yaw + angle)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DiffDriveState {
    pub pose: PlanarPose,
    pub v_left: f64,
    pub v_right: f64,
}

impl DiffDriveState {
    pub fn at(pose: PlanarPose) -> Self {
        Self { pose, v_left: 0.0, v_right: 0.0 }
    }

    /// Set wheel speeds, saturating each at the motor limit.
    pub fn command(&mut self, v_left: f64, v_right: f64, params: &DiffDriveParams) {
        let m = params.max_wheel_speed;
        self.v_left = v_left.clamp(-m, m);
        self.v_right = v_right.clamp(-m, m);
    }

    pub fn halt(&mut self) {
        self.v_left = 0.0;
        self.v_right = 0.0;
    }

    pub fn forward_speed(&self) -> f64 {
        0.5 * (self.v_left + self.v_right)
    }

    pub fn yaw_rate(&self, params: &DiffDriveParams) -> f64 {
        (self.v_right - self.v_left) / params.wheel_base
    }
}

/// Exact unicycle integration over `dt` with the wheel speeds held constant.
pub fn dd_step(state: &DiffDriveState, params: &DiffDriveParams, dt: f64) -> Result<DiffDriveState, RobotError> {
    if !(dt > 0.0) {
        return Err(RobotError::NonPositiveDt(dt));
    }
    let v = state.forward_speed();
    let omega = state.yaw_rate(params);
    let PlanarPose { x, y, yaw } = state.pose;
    let (x, y) = if omega.abs() < STRAIGHT_LINE_RATE {
        (x + v * dt * yaw.cos(), y + v * dt * yaw.sin())
    } else {
        // chord of the arc: length v·dt·sinc(ωdt/2), direction at mid-heading
        let half = 0.5 * omega * dt;
        let chord = v * dt * half.sin() / half;
        let mid = yaw + half;
        (x + chord * mid.cos(), y + chord * mid.sin())
    };
    Ok(DiffDriveState { pose: PlanarPose::new(x, y, yaw + omega * dt), ..*state })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::TAU;

    use approx::assert_abs_diff_eq;

    use super::*;

    fn moving(vl: f64, vr: f64) -> DiffDriveState {
        DiffDriveState { pose: PlanarPose::default(), v_left: vl, v_right: vr }
    }

    #[test]
    fn straight_line() {
        let s = dd_step(&moving(0.1, 0.1), &DiffDriveParams::default(), 1.0).unwrap();
        assert_abs_diff_eq!(s.pose.x, 0.1, epsilon = 1e-15);
        assert_eq!((s.pose.y, s.pose.yaw), (0.0, 0.0));
    }

    #[test]
    fn spin_in_place() {
        let s = dd_step(&moving(-0.04, 0.04), &DiffDriveParams::default(), 0.5).unwrap();
        assert_abs_diff_eq!(s.pose.x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.pose.y, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.pose.yaw, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn full_circle_returns_home() {
        let params = DiffDriveParams::default();
        let state = moving(0.05, 0.1);
        assert_abs_diff_eq!(state.yaw_rate(&params), 0.625, epsilon = 1e-15);
        // radius v/ω = 0.075 / 0.625
        assert_abs_diff_eq!(state.forward_speed() / state.yaw_rate(&params), 0.12, epsilon = 1e-15);
        let period = TAU / 0.625;
        let half = dd_step(&state, &params, period / 2.0).unwrap();
        assert_abs_diff_eq!(half.pose.y, 0.24, epsilon = 1e-12);
        let s = dd_step(&state, &params, period).unwrap();
        assert!(s.pose.x.hypot(s.pose.y) < 1e-9);
        assert!(s.pose.yaw.abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_dt() {
        let p = DiffDriveParams::default();
        assert!(matches!(dd_step(&moving(0.1, 0.1), &p, 0.0), Err(RobotError::NonPositiveDt(_))));
        assert!(dd_step(&moving(0.1, 0.1), &p, f64::NAN).is_err());
    }

    #[test]
    fn command_saturates() {
        let p = DiffDriveParams::default();
        let mut s = DiffDriveState::default();
        s.command(1.0, -1.0, &p);
        assert_eq!((s.v_left, s.v_right), (0.15, -0.15));
    }
}
