//! Bot-side models: wheel kinematics, waypoint control, hinge and dispenser
//! actuators, IR ranging and the firmware that ties them to the protocol.

mod dispenser;
mod firmware;
mod hinge;
mod ir;
mod kinematics;
mod pi;

use thiserror::Error;

pub use dispenser::{dispenser_advance, DispenseOutcome, DispenserModel, BEADS_PER_REVOLUTION, STEPS_PER_BEAD};
pub use firmware::{BotFirmware, BotKind, FirmwareConfig, ACK_OK, ACK_REJECTED};
pub use hinge::{
    angle_for_steps, hinge_plan, steps_for_angle, HingeModel, HingeNoise, HingeSetting, MOTOR_STEPS_PER_SECOND,
    STEPS_PER_REVOLUTION,
};
pub use ir::{avoid, ir_scan, AvoidParams, Bounds, Disc, IrParams, IrReading, IR_BEARINGS_DEG};
pub use kinematics::{dd_step, DiffDriveParams, DiffDriveState, PlanarPose};
pub use pi::{pi_waypoint, PIState, WaypointParams};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RobotError {
    #[error("time step must be positive, got {0}")]
    NonPositiveDt(f64),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("hinge angle {0}° is not one of 0, 45, 90")]
    HingeAngle(f64),
}
