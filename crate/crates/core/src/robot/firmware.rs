use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::acoustics::wrap_angle;
use crate::protocol::{angle_from_wire, Frame, Message, QuantizedDrive, SeqVerdict, SequenceTracker};

use super::dispenser::DispenserModel;
use super::hinge::{HingeModel, HingeNoise, HingeSetting, MOTOR_STEPS_PER_SECOND};
use super::ir::{avoid, AvoidParams, IrReading};
use super::kinematics::{dd_step, DiffDriveParams, DiffDriveState, PlanarPose};
use super::pi::{pi_waypoint, PIState, WaypointParams};

pub const ACK_OK: u8 = 0;
pub const ACK_REJECTED: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BotKind {
    Acousto,
    Dispenser,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FirmwareConfig {
    pub drive: DiffDriveParams,
    pub waypoint: WaypointParams,
    pub heading: PIState,
    pub speed: PIState,
    pub avoid: AvoidParams,
    /// In-place yaw correction gain once arrived, 1/s.
    pub yaw_gain: f64,
    pub yaw_deadband_deg: f64,
    /// Leave the arrived state only beyond this multiple of the arrival radius.
    pub release_factor: f64,
    /// Goals behind the bot and closer than this are reached in reverse, m.
    pub reverse_range: f64,
    /// Weight of each tracker fix against the dead-reckoned belief; 1 trusts
    /// every fix outright.
    pub fix_gain: f64,
    pub hinge_noise: HingeNoise,
    pub hopper: u32,
}

impl Default for FirmwareConfig {
    fn default() -> Self {
        Self {
            drive: DiffDriveParams::default(),
            waypoint: WaypointParams::default(),
            heading: PIState::heading_default(),
            speed: PIState::speed_default(),
            avoid: AvoidParams::default(),
            yaw_gain: 2.0,
            yaw_deadband_deg: 0.3,
            release_factor: 1.5,
            reverse_range: 0.05,
            fix_gain: 0.1,
            hinge_noise: HingeNoise::default(),
            hopper: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Goal {
    x: f64,
    y: f64,
    yaw: f64,
    speed_limit: f64,
}

/// Everything running on one bot's microcontroller: command intake,
/// sequence policy, waypoint control with the IR reflex, and actuators.
#[derive(Debug, Clone)]
pub struct BotFirmware {
    pub id: u8,
    pub kind: BotKind,
    pub config: FirmwareConfig,
    seq: SequenceTracker,
    goal: Option<Goal>,
    arrived: bool,
    heading: PIState,
    speed: PIState,
    belief: Option<PlanarPose>,
    pub hinge: Option<HingeModel>,
    pub dispenser: Option<DispenserModel>,
    pending_hinge_ack: Option<u16>,
    last_ack: Option<(u16, u8)>,
    frame: Option<(u16, QuantizedDrive)>,
    outbox: Vec<Message>,
    pub stale_frames: u64,
}

impl BotFirmware {
    pub fn new(id: u8, kind: BotKind, config: FirmwareConfig) -> Self {
        let (hinge, dispenser) = match kind {
            BotKind::Acousto => (Some(HingeModel::new(HingeSetting::Horizontal, config.hinge_noise)), None),
            BotKind::Dispenser => (None, Some(DispenserModel::new(config.hopper))),
        };
        Self {
            id,
            kind,
            heading: config.heading,
            speed: config.speed,
            config,
            seq: SequenceTracker::new(),
            goal: None,
            arrived: false,
            belief: None,
            hinge,
            dispenser,
            pending_hinge_ack: None,
            last_ack: None,
            frame: None,
            outbox: Vec::new(),
            stale_frames: 0,
        }
    }

    pub fn belief(&self) -> Option<PlanarPose> {
        self.belief
    }

    pub fn has_arrived(&self) -> bool {
        self.arrived
    }

    /// Last accepted acoustic frame.
    pub fn frame(&self) -> Option<&(u16, QuantizedDrive)> {
        self.frame.as_ref()
    }

    pub fn drain_outbox(&mut self) -> Vec<Message> {
        std::mem::take(&mut self.outbox)
    }

    fn ack(&mut self, seq: u16, status: u8) {
        self.last_ack = Some((seq, status));
        self.outbox.push(Message::Ack { acked_seq: seq, status });
    }

    pub fn receive(&mut self, frame: &Frame) {
        if frame.bot_id() != self.id {
            return;
        }
        let seq = frame.seq();
        if self.seq.observe(seq) == SeqVerdict::Stale {
            self.stale_frames += 1;
            // a retransmitted command whose ack was lost gets the same ack again
            if let Some((acked, status)) = self.last_ack {
                if acked == seq {
                    self.outbox.push(Message::Ack { acked_seq: seq, status });
                }
            }
            return;
        }
        match &frame.message {
            Message::MoveTo { x, y, yaw, speed } => {
                let goal = Goal {
                    x: f64::from(*x) * 1e-4,
                    y: f64::from(*y) * 1e-4,
                    yaw: angle_from_wire(*yaw),
                    // zero means no cap beyond the wheel limit
                    speed_limit: if *speed == 0 { f64::INFINITY } else { f64::from(*speed) * 1e-3 },
                };
                if let Some(old) = self.goal {
                    if (old.x - goal.x).hypot(old.y - goal.y) > self.config.waypoint.arrival_radius {
                        self.arrived = false;
                    }
                }
                self.goal = Some(goal);
            }
            Message::Stop => {
                self.goal = None;
                self.arrived = false;
                self.heading.reset();
                self.speed.reset();
            }
            Message::SetHinge { target } => {
                let setting = self.hinge.as_ref().and_then(|_| HingeSetting::from_degrees(f64::from(*target) / 100.0).ok());
                match (setting, self.hinge.as_mut()) {
                    (Some(setting), Some(hinge)) => {
                        if hinge.command(setting) == 0 && hinge.is_settled() {
                            self.pending_hinge_ack = None;
                            self.ack(seq, ACK_OK);
                        } else {
                            self.pending_hinge_ack = Some(seq);
                        }
                    }
                    _ => self.ack(seq, ACK_REJECTED),
                }
            }
            Message::Dispense { count } => match self.dispenser.as_mut() {
                Some(d) => {
                    let accepted = d.request(u32::from(*count));
                    let status = if accepted == u32::from(*count) { ACK_OK } else { ACK_REJECTED };
                    self.ack(seq, status);
                }
                None => self.ack(seq, ACK_REJECTED),
            },
            Message::AcousticFrame { frame_id, drive } => self.frame = Some((*frame_id, drive.clone())),
            Message::PoseReport { x, y, yaw, .. } => {
                let fix = PlanarPose::new(f64::from(*x) * 1e-4, f64::from(*y) * 1e-4, angle_from_wire(*yaw));
                let g = self.config.fix_gain;
                // odometry carries the belief between fixes, so blending
                // adds no lag while the fixes are exact
                self.belief = Some(match self.belief {
                    None => fix,
                    Some(b) => PlanarPose::new(
                        b.x + g * (fix.x - b.x),
                        b.y + g * (fix.y - b.y),
                        b.yaw + g * wrap_angle(fix.yaw - b.yaw),
                    ),
                });
            }
            Message::Ack { .. } => {}
        }
    }

    /// Wheel command from the current belief, before the IR reflex.
    fn control(&mut self, dt: f64) -> (f64, f64) {
        let (Some(goal), Some(pose)) = (self.goal, self.belief) else {
            return (0.0, 0.0);
        };
        let distance = pose.distance_to(goal.x, goal.y);
        let radius = self.config.waypoint.arrival_radius;
        if self.arrived && distance > self.config.release_factor * radius {
            self.arrived = false;
        }
        if !self.arrived {
            let limits = WaypointParams { speed_limit: goal.speed_limit, ..self.config.waypoint };
            // a short hop backwards beats turning around: steer the mirrored
            // body, whose left wheel is our right wheel running backwards
            let reverse = distance < self.config.reverse_range
                && wrap_angle(pose.bearing_to(goal.x, goal.y)).abs() > std::f64::consts::FRAC_PI_2;
            let steered = if reverse { PlanarPose::new(pose.x, pose.y, pose.yaw + std::f64::consts::PI) } else { pose };
            let cmd = pi_waypoint(
                &steered,
                (goal.x, goal.y),
                &mut self.heading,
                &mut self.speed,
                &self.config.drive,
                &limits,
                dt,
            )
            .unwrap_or((0.0, 0.0));
            if distance > radius {
                return if reverse { (-cmd.1, -cmd.0) } else { cmd };
            }
            self.arrived = true;
        }
        let error = wrap_angle(goal.yaw - pose.yaw);
        if error.abs() <= self.config.yaw_deadband_deg.to_radians() {
            return (0.0, 0.0);
        }
        let max = self.config.drive.max_wheel_speed;
        let rim = (0.5 * self.config.yaw_gain * error * self.config.drive.wheel_base).clamp(-max, max);
        (-rim, rim)
    }

    /// One firmware tick: control, reflex, actuators and dead reckoning.
    /// Returns the wheel command handed to the motors.
    pub fn tick(&mut self, dt: f64, ir: &IrReading, rng: &mut impl Rng) -> (f64, f64) {
        let wanted = self.control(dt);
        let applied = avoid(ir, wanted, &self.config.avoid);
        if let Some(hinge) = self.hinge.as_mut() {
            if hinge.step(dt, rng) {
                if let Some(seq) = self.pending_hinge_ack.take() {
                    self.ack(seq, ACK_OK);
                }
            }
        }
        if let Some(d) = self.dispenser.as_mut() {
            d.tick(dt, MOTOR_STEPS_PER_SECOND);
        }
        if let Some(pose) = self.belief {
            let mut state = DiffDriveState::at(pose);
            state.command(applied.0, applied.1, &self.config.drive);
            if let Ok(next) = dd_step(&state, &self.config.drive, dt) {
                self.belief = Some(next.pose);
            }
        }
        applied
    }
}
