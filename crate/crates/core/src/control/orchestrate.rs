use crate::acoustics::{opposition_deviation_deg, wrap_angle, Vec3, MAX_OPPOSITION_DEVIATION_DEG};
use crate::protocol::Message;
use crate::robot::BotKind;

use super::content::{StationGeometry, Tolerances};
use super::registry::BotRegistry;
use super::ControlError;

#[derive(Debug, Clone, PartialEq)]
pub enum LevitationStep {
    VerifyOpposed { pair: (u8, u8), deviation_deg: f64 },
    StreamJointFrames { pair: (u8, u8) },
    Command { bot: u8, message: Message },
}

/// Plan the remaining levitation hand-off from the current registry.
///
/// The plan always starts by checking the opposed pair and streaming its
/// frames. If the dispenser's chute is not yet over the trap a MoveTo comes
/// next; the plan ends with a single one-bead Dispense.
pub fn levitation_orchestrate(
    registry: &BotRegistry,
    trap: &Vec3,
    geometry: &StationGeometry,
    tol: &Tolerances,
) -> Result<Vec<LevitationStep>, ControlError> {
    let acousto = registry.ids_of(BotKind::Acousto);
    let [a, b] = acousto[..] else {
        return Err(ControlError::Unpaired(format!("{} acousto bots", acousto.len())));
    };
    let dispenser = *registry.ids_of(BotKind::Dispenser).first().ok_or(ControlError::MissingDispenser)?;

    let board = |id: u8| -> Result<_, ControlError> {
        let entry = registry.get(id).ok_or(ControlError::UnknownPose(id))?;
        let pose = entry.smoothed.ok_or(ControlError::UnknownPose(id))?;
        Ok(geometry.mount.board_pose(&pose, entry.hinge_deg.to_radians()))
    };
    let (pa, pb) = (board(a)?, board(b)?);
    let deviation_deg = opposition_deviation_deg(&pa.normal(), &pb.normal());
    if deviation_deg > MAX_OPPOSITION_DEVIATION_DEG {
        return Err(ControlError::Unpaired(format!("normals {deviation_deg:.1}° from anti-parallel")));
    }
    let gap = (pa.position - pb.position).norm();
    if (gap - geometry.levitation_separation).abs() > 2.0 * tol.pos_tol {
        return Err(ControlError::Unpaired(format!(
            "board separation {gap:.4} m, expected {:.4} m",
            geometry.levitation_separation
        )));
    }

    let mut plan = vec![
        LevitationStep::VerifyOpposed { pair: (a, b), deviation_deg },
        LevitationStep::StreamJointFrames { pair: (a, b) },
    ];
    let pose = registry.smoothed_pose(dispenser).ok_or(ControlError::UnknownPose(dispenser))?;
    let station = geometry.dispenser_station(trap);
    let exit = geometry.chute_exit(&pose);
    let off_vertical = (exit.x - trap.x).hypot(exit.y - trap.y);
    let yaw_error = wrap_angle(pose.yaw - station.yaw).abs();
    if off_vertical > tol.dispenser_pos_tol || yaw_error > tol.dispenser_yaw_tol_deg.to_radians() {
        let message = Message::move_to(station.x, station.y, station.yaw, 0.0)
            .map_err(|e| ControlError::InvalidContent(e.to_string()))?;
        plan.push(LevitationStep::Command { bot: dispenser, message });
    }
    plan.push(LevitationStep::Command { bot: dispenser, message: Message::Dispense { count: 1 } });
    Ok(plan)
}
