use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::acoustics::Vec3;

use super::RobotError;

pub const STEPS_PER_REVOLUTION: u32 = 2048;
/// Full-step drive at 5 rpm.
pub const MOTOR_STEPS_PER_SECOND: f64 = STEPS_PER_REVOLUTION as f64 * 5.0 / 60.0;

const SLOPE_STEPS: i32 = 1024;
const VERTICAL_STEPS: i32 = 3072;

/// The three rest positions of the board hinge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HingeSetting {
    Horizontal,
    Slope,
    Vertical,
}

impl HingeSetting {
    pub fn from_degrees(deg: f64) -> Result<Self, RobotError> {
        match deg {
            0.0 => Ok(Self::Horizontal),
            45.0 => Ok(Self::Slope),
            90.0 => Ok(Self::Vertical),
            _ => Err(RobotError::HingeAngle(deg)),
        }
    }

    pub fn degrees(self) -> f64 {
        match self {
            Self::Horizontal => 0.0,
            Self::Slope => 45.0,
            Self::Vertical => 90.0,
        }
    }

    pub fn steps(self) -> i32 {
        match self {
            Self::Horizontal => 0,
            Self::Slope => SLOPE_STEPS,
            Self::Vertical => VERTICAL_STEPS,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

pub fn steps_for_angle(deg: f64) -> Result<i32, RobotError> {
    HingeSetting::from_degrees(deg).map(HingeSetting::steps)
}

/// Signed step count that moves the hinge between two rest positions.
pub fn hinge_plan(from_deg: f64, to_deg: f64) -> Result<i32, RobotError> {
    Ok(steps_for_angle(to_deg)? - steps_for_angle(from_deg)?)
}

/// Hinge angle in degrees for a step count, linear within each segment.
pub fn angle_for_steps(steps: i32) -> f64 {
    let s = f64::from(steps.clamp(0, VERTICAL_STEPS));
    let slope = f64::from(SLOPE_STEPS);
    if s <= slope {
        45.0 * s / slope
    } else {
        45.0 + 45.0 * (s - slope) / f64::from(VERTICAL_STEPS - SLOPE_STEPS)
    }
}

/// Per-axis position σ (m) and yaw σ (deg) of the settled board, one entry
/// per rest position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HingeNoise {
    pub sigma_pos: [f64; 3],
    pub sigma_yaw_deg: [f64; 3],
}

/// Board position errors (cm, x/y/z) and yaw errors (deg) measured at each
/// rest position.
const MEASURED_ERRORS: [([f64; 3], f64); 3] = [
    ([-0.08, -0.01, -0.03], -0.38),
    ([-0.03, 0.73, 0.24], 0.68),
    ([2.27, -1.73, -0.15], -0.55),
];

impl Default for HingeNoise {
    /// Per-axis RMS of the measured errors.
    fn default() -> Self {
        let mut sigma_pos = [0.0; 3];
        let mut sigma_yaw_deg = [0.0; 3];
        for (i, (pos_cm, yaw)) in MEASURED_ERRORS.iter().enumerate() {
            let ms = pos_cm.iter().map(|e| e * e).sum::<f64>() / 3.0;
            sigma_pos[i] = ms.sqrt() * 1e-2;
            sigma_yaw_deg[i] = yaw.abs();
        }
        Self { sigma_pos, sigma_yaw_deg }
    }
}

impl HingeNoise {
    pub fn none() -> Self {
        Self { sigma_pos: [0.0; 3], sigma_yaw_deg: [0.0; 3] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HingeModel {
    current_steps: i32,
    target_steps: i32,
    /// Fractional steps owed by the motor clock.
    step_credit: f64,
    pub rate: f64,
    pub noise: HingeNoise,
    /// Board offset (m) and yaw offset (rad) sampled when the hinge last settled.
    pub actuation_error: (Vec3, f64),
}

impl Default for HingeModel {
    fn default() -> Self {
        Self::new(HingeSetting::Horizontal, HingeNoise::default())
    }
}

impl HingeModel {
    pub fn new(at: HingeSetting, noise: HingeNoise) -> Self {
        Self {
            current_steps: at.steps(),
            target_steps: at.steps(),
            step_credit: 0.0,
            rate: MOTOR_STEPS_PER_SECOND,
            noise,
            actuation_error: (Vec3::zeros(), 0.0),
        }
    }

    pub fn current_steps(&self) -> i32 {
        self.current_steps
    }

    pub fn angle_deg(&self) -> f64 {
        angle_for_steps(self.current_steps)
    }

    pub fn pitch(&self) -> f64 {
        self.angle_deg().to_radians()
    }

    pub fn is_settled(&self) -> bool {
        self.current_steps == self.target_steps
    }

    pub fn settled_at(&self) -> Option<HingeSetting> {
        if !self.is_settled() {
            return None;
        }
        [HingeSetting::Horizontal, HingeSetting::Slope, HingeSetting::Vertical]
            .into_iter()
            .find(|s| s.steps() == self.current_steps)
    }

    /// Start moving toward `setting`; returns the signed steps still to run.
    pub fn command(&mut self, setting: HingeSetting) -> i32 {
        if self.target_steps != setting.steps() {
            self.target_steps = setting.steps();
            self.step_credit = 0.0;
        }
        self.target_steps - self.current_steps
    }

    /// Advance the motor by `dt`. Returns true on the tick the hinge settles,
    /// after sampling a fresh actuation error.
    pub fn step(&mut self, dt: f64, rng: &mut impl Rng) -> bool {
        if self.is_settled() {
            return false;
        }
        self.step_credit += self.rate * dt;
        let whole = self.step_credit.floor();
        self.step_credit -= whole;
        let remaining = self.target_steps - self.current_steps;
        let n = (whole as i32).min(remaining.abs());
        self.current_steps += n * remaining.signum();
        if !self.is_settled() {
            return false;
        }
        self.step_credit = 0.0;
        if let Some(setting) = self.settled_at() {
            self.actuation_error = self.noise.sample(setting, rng);
        }
        true
    }
}

impl HingeNoise {
    fn sample(&self, setting: HingeSetting, rng: &mut impl Rng) -> (Vec3, f64) {
        let i = setting.index();
        let gauss = |sigma: f64, rng: &mut dyn rand::RngCore| {
            if sigma > 0.0 {
                Normal::new(0.0, sigma).map_or(0.0, |n| n.sample(rng))
            } else {
                0.0
            }
        };
        let sp = self.sigma_pos[i];
        let offset = Vec3::new(gauss(sp, rng), gauss(sp, rng), gauss(sp, rng));
        (offset, gauss(self.sigma_yaw_deg[i], rng).to_radians())
    }
}
