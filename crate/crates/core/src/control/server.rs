use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::acoustics::{wrap_angle, ArrayConfig, Medium, Vec3};
use crate::protocol::{encode, decode, Message, MessageKind, SequenceCounter};
use crate::robot::{hinge_plan, BotKind, Bounds, ACK_OK, MOTOR_STEPS_PER_SECOND};

use super::assign::assign_targets;
use super::content::{alignment_check, ContentSpec, Modality, Station, StationGeometry, Tolerances};
use super::frames::{compute_frames, BoardState};
use super::orchestrate::{levitation_orchestrate, LevitationStep};
use super::registry::{BotRegistry, TrackedPose, TARGET_SOURCE_BASE, TRACKER_CLIENT_ID};
use super::transport::Transport;
use super::ControlError;

/// Slack for comparing accumulated schedule times against the clock.
const CLOCK_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioPhase {
    Approaching,
    Aligning,
    Following,
    Visualizing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServerConfig {
    pub tolerances: Tolerances,
    pub geometry: StationGeometry,
    pub array: ArrayConfig,
    pub medium: Medium,
    /// Every MoveTo target is clamped into this table extent.
    pub bounds: Bounds,
    /// Phase machine period, s.
    pub control_period: f64,
    /// Acoustic frame period, s. At most one frame batch goes out per tick.
    pub frame_period: f64,
    pub solver_iterations: usize,
    /// A station that moved further than this since the last MoveTo is re-sent at once.
    pub resend_distance: f64,
    /// An unchanged station is re-sent after this long, covering lost datagrams.
    pub resend_interval: f64,
    /// Extra wait beyond the expected hinge travel before a SetHinge is repeated.
    pub hinge_retry: f64,
    /// A Dispense is retransmitted, same seq, after this long without an ack.
    pub dispense_retry: f64,
    /// Stations lead a moving target by its estimated velocity times this, s.
    pub lead_time: f64,
    /// Shortest baseline for a target velocity sample, s.
    pub velocity_window: f64,
    /// Weight of each new velocity sample.
    pub velocity_smoothing: f64,
    /// Velocity estimates are capped at this speed, m/s.
    pub max_lead_speed: f64,
    /// A target displacement larger than this between reports is a jump, not motion.
    pub target_jump: f64,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            tolerances: Tolerances::default(),
            geometry: StationGeometry::default(),
            array: ArrayConfig::default(),
            medium: Medium::air_40khz(),
            bounds: Bounds { min: [-1.0, -1.0], max: [1.0, 1.0] },
            control_period: 0.02,
            frame_period: 0.005,
            solver_iterations: 20,
            resend_distance: 0.002,
            resend_interval: 0.2,
            hinge_retry: 0.5,
            dispense_retry: 0.5,
            lead_time: 0.8,
            velocity_window: 0.1,
            velocity_smoothing: 0.5,
            max_lead_speed: 0.3,
            target_jump: 0.1,
        }
    }
}

/// One encoded datagram for a bot.
#[derive(Debug, Clone, PartialEq)]
pub struct Outbound {
    pub to: u8,
    pub seq: u16,
    pub message: Message,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub t: f64,
    pub message: String,
}

#[derive(Debug, Clone, Copy)]
struct TargetTrack {
    position: Vec3,
    stamp: f64,
    /// Server time of the last tracker fix; `None` while only the declared
    /// start position is known.
    last_seen: Option<f64>,
    anchor: (Vec3, f64),
    velocity: Vec3,
    lost: bool,
}

impl TargetTrack {
    fn declared(position: Vec3) -> Self {
        Self { position, stamp: f64::NEG_INFINITY, last_seen: None, anchor: (position, 0.0), velocity: Vec3::zeros(), lost: false }
    }
}

#[derive(Debug, Clone)]
struct HingeCommand {
    degrees: f64,
    seqs: Vec<u16>,
    retry_at: f64,
    acked: bool,
}

#[derive(Debug, Clone, Copy)]
struct DispenseCommand {
    seq: u16,
    sent: f64,
    status: Option<u8>,
}

#[derive(Debug, Clone, Default)]
struct BotLink {
    seq: SequenceCounter,
    last_move: Option<(Station, f64)>,
    hinge: Option<HingeCommand>,
    stale: bool,
}

/// The central reactor. Feed it datagrams with [`handle_inbound`], then call
/// [`tick`] once per simulation step and ship what it returns.
///
/// [`handle_inbound`]: SwarmServer::handle_inbound
/// [`tick`]: SwarmServer::tick
#[derive(Debug, Clone)]
pub struct SwarmServer {
    config: ServerConfig,
    spec: ContentSpec,
    registry: BotRegistry,
    phase: ScenarioPhase,
    transitions: Vec<(f64, ScenarioPhase)>,
    diagnostics: Vec<Diagnostic>,
    last_diagnosed: BTreeMap<String, f64>,
    targets: Vec<TargetTrack>,
    /// Acousto bot → station index.
    assignment: BTreeMap<u8, usize>,
    links: BTreeMap<u8, BotLink>,
    outbox: Vec<Outbound>,
    next_control: f64,
    next_frame: f64,
    frame_id: u16,
    opposed_verified: bool,
    dispense: Option<DispenseCommand>,
    sent: BTreeMap<MessageKind, u64>,
    undecodable: u64,
}

impl SwarmServer {
    pub fn new(config: ServerConfig, spec: ContentSpec, roster: &[(u8, BotKind)]) -> Result<Self, ControlError> {
        spec.validate()?;
        let mut registry = BotRegistry::new();
        let mut links = BTreeMap::new();
        for &(id, kind) in roster {
            if id == TRACKER_CLIENT_ID || id >= TARGET_SOURCE_BASE || !registry.register(id, kind) {
                return Err(ControlError::InvalidContent(format!("bot id {id} duplicated or reserved")));
            }
            links.insert(id, BotLink::default());
        }
        let acousto = registry.ids_of(BotKind::Acousto).len();
        match spec.modality {
            Modality::Levitation if acousto < 2 => return Err(ControlError::Unpaired(format!("{acousto} acousto bots"))),
            Modality::Levitation if registry.ids_of(BotKind::Dispenser).is_empty() => {
                return Err(ControlError::MissingDispenser)
            }
            _ if acousto == 0 => return Err(ControlError::InvalidContent("no acousto bots".into())),
            _ => {}
        }
        let targets = match spec.modality {
            Modality::Levitation => Vec::new(),
            _ => spec.targets.iter().map(|t| TargetTrack::declared(*t)).collect(),
        };
        Ok(Self {
            config,
            spec,
            registry,
            phase: ScenarioPhase::Approaching,
            transitions: Vec::new(),
            diagnostics: Vec::new(),
            last_diagnosed: BTreeMap::new(),
            targets,
            assignment: BTreeMap::new(),
            links,
            outbox: Vec::new(),
            next_control: 0.0,
            next_frame: 0.0,
            frame_id: 0,
            opposed_verified: false,
            dispense: None,
            sent: BTreeMap::new(),
            undecodable: 0,
        })
    }

    pub fn phase(&self) -> ScenarioPhase {
        self.phase
    }

    pub fn transitions(&self) -> &[(f64, ScenarioPhase)] {
        &self.transitions
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    pub fn registry(&self) -> &BotRegistry {
        &self.registry
    }

    pub fn spec(&self) -> &ContentSpec {
        &self.spec
    }

    /// Acousto bot → station index, fixed once every bot has been seen.
    pub fn assignment(&self) -> &BTreeMap<u8, usize> {
        &self.assignment
    }

    /// Index of the tracked target a bot serves. Levitation bots serve the
    /// fixed trap instead.
    pub fn target_of(&self, bot: u8) -> Option<usize> {
        let station = *self.assignment.get(&bot)?;
        match self.spec.modality {
            Modality::Haptic => Some(station),
            Modality::Audio => Some(0),
            Modality::Levitation => None,
        }
    }

    /// True once the dispenser acknowledged a Dispense as accepted.
    pub fn dispense_accepted(&self) -> bool {
        self.dispense.is_some_and(|d| d.status == Some(ACK_OK))
    }

    pub fn sent_counts(&self) -> &BTreeMap<MessageKind, u64> {
        &self.sent
    }

    pub fn undecodable(&self) -> u64 {
        self.undecodable
    }

    fn diagnose(&mut self, now: f64, message: String) {
        // repeats of the same condition are reported at most once a second
        if self.last_diagnosed.get(&message).is_some_and(|t| now - t < 1.0) {
            return;
        }
        self.last_diagnosed.insert(message.clone(), now);
        self.diagnostics.push(Diagnostic { t: now, message });
    }

    fn enter(&mut self, now: f64, phase: ScenarioPhase) {
        self.phase = phase;
        self.transitions.push((now, phase));
    }

    fn send(&mut self, now: f64, to: u8, message: Message) -> Option<u16> {
        let link = self.links.get_mut(&to)?;
        let seq = link.seq.take();
        self.push(now, to, seq, message)
    }

    fn push(&mut self, now: f64, to: u8, seq: u16, message: Message) -> Option<u16> {
        match encode(&message, to, seq) {
            Ok(bytes) => {
                *self.sent.entry(message.kind()).or_default() += 1;
                if !matches!(message, Message::PoseReport { .. } | Message::AcousticFrame { .. }) {
                    if let Some(entry) = self.registry.get_mut(to) {
                        entry.last_command_seq = Some(seq);
                    }
                }
                self.outbox.push(Outbound { to, seq, message, bytes });
                Some(seq)
            }
            Err(e) => {
                self.diagnose(now, format!("bot {to}: cannot encode {:?}: {e}", message.kind()));
                None
            }
        }
    }

    fn dispenser_id(&self) -> Option<u8> {
        self.registry.ids_of(BotKind::Dispenser).first().copied()
    }

    fn dispense_outstanding(&self) -> bool {
        self.dispense.is_some_and(|d| d.status.is_none())
    }

    /// Apply one datagram from the network.
    pub fn handle_inbound(&mut self, bytes: &[u8], now: f64) {
        let frame = match decode(bytes) {
            Ok(f) => f,
            Err(e) => {
                self.undecodable += 1;
                self.diagnose(now, format!("undecodable datagram: {e} (code {})", e.code()));
                return;
            }
        };
        let from = frame.bot_id();
        match frame.message {
            Message::PoseReport { source_id, x, y, z, yaw, timestamp } if from == TRACKER_CLIENT_ID => {
                let stamp = f64::from(timestamp) * 1e-3;
                let (x, y, z) = (f64::from(x) * 1e-4, f64::from(y) * 1e-4, f64::from(z) * 1e-4);
                if source_id >= TARGET_SOURCE_BASE {
                    self.observe_target(usize::from(source_id - TARGET_SOURCE_BASE), Vec3::new(x, y, z), stamp, now);
                    return;
                }
                let pose = crate::robot::PlanarPose::new(x, y, crate::protocol::angle_from_wire(yaw));
                let fresh = self.registry.observe(source_id, TrackedPose { pose, z, stamp }, now);
                let quiet = self.dispense_outstanding() && Some(source_id) == self.dispenser_id();
                if fresh && !quiet {
                    self.send(now, source_id, Message::PoseReport { source_id, x: (x * 1e4).round() as i32, y: (y * 1e4).round() as i32, z: (z * 1e4).round() as i32, yaw, timestamp });
                }
            }
            Message::Ack { acked_seq, status } => self.handle_ack(from, acked_seq, status, now),
            other => {
                let kind = other.kind();
                self.diagnose(now, format!("unexpected {kind:?} from {from}"));
            }
        }
    }

    fn handle_ack(&mut self, bot: u8, acked_seq: u16, status: u8, now: f64) {
        if let Some(hinge) = self.links.get_mut(&bot).and_then(|l| l.hinge.as_mut()) {
            if !hinge.acked && hinge.seqs.contains(&acked_seq) {
                if status == ACK_OK {
                    hinge.acked = true;
                    let degrees = hinge.degrees;
                    if let Some(entry) = self.registry.get_mut(bot) {
                        entry.hinge_deg = degrees;
                    }
                } else {
                    self.diagnose(now, format!("bot {bot} rejected SetHinge"));
                }
                return;
            }
        }
        if Some(bot) == self.dispenser_id() {
            if let Some(d) = self.dispense.as_mut() {
                if d.seq == acked_seq && d.status.is_none() {
                    d.status = Some(status);
                    if status != ACK_OK {
                        self.diagnose(now, format!("dispenser {bot} rejected Dispense"));
                    }
                }
            }
        }
    }

    fn observe_target(&mut self, index: usize, position: Vec3, stamp: f64, now: f64) {
        let cfg = &self.config;
        let Some(track) = self.targets.get_mut(index) else {
            return;
        };
        if stamp <= track.stamp {
            return;
        }
        if (position - track.position).norm() > cfg.target_jump || track.last_seen.is_none() {
            track.anchor = (position, stamp);
            track.velocity = Vec3::zeros();
        } else if stamp - track.anchor.1 >= cfg.velocity_window - CLOCK_SLACK {
            let sample = (position - track.anchor.0) / (stamp - track.anchor.1);
            let v = track.velocity + cfg.velocity_smoothing * (sample - track.velocity);
            track.velocity = if v.norm() > cfg.max_lead_speed { v * (cfg.max_lead_speed / v.norm()) } else { v };
            track.anchor = (position, stamp);
        }
        track.position = position;
        track.stamp = stamp;
        track.last_seen = Some(now);
    }

    fn target_lost(&self, index: usize, now: f64) -> bool {
        self.targets
            .get(index)
            .is_some_and(|t| t.last_seen.is_some_and(|seen| now - seen > self.config.tolerances.staleness))
    }

    /// Current station list with the tracked target each one serves.
    fn stations(&self) -> Vec<(Station, Option<usize>)> {
        let led = |i: usize| {
            let t = &self.targets[i];
            let mut p = t.position + t.velocity * self.config.lead_time;
            p.z = t.position.z;
            p
        };
        let g = &self.config.geometry;
        match self.spec.modality {
            Modality::Haptic => (0..self.targets.len()).map(|i| (g.haptic_station(&led(i)), Some(i))).collect(),
            Modality::Audio => g.audio_stations(&led(0)).into_iter().map(|s| (s, Some(0))).collect(),
            Modality::Levitation => {
                let trap = self.spec.trap.expect("validated levitation spec has a trap");
                g.levitation_stations(&trap).into_iter().map(|s| (s, None)).collect()
            }
        }
    }

    fn clamp(&self, station: Station) -> Station {
        let b = &self.config.bounds;
        Station::new(station.x.clamp(b.min[0], b.max[0]), station.y.clamp(b.min[1], b.max[1]), station.yaw)
    }

    fn maybe_move(&mut self, bot: u8, station: Station, now: f64) {
        let station = self.clamp(station);
        let Some(link) = self.links.get(&bot) else {
            return;
        };
        let due = link.last_move.is_none_or(|(last, at)| {
            last.distance_to(station.x, station.y) > self.config.resend_distance
                || wrap_angle(last.yaw - station.yaw).abs() > 0.1f64.to_radians()
                || now - at >= self.config.resend_interval - CLOCK_SLACK
        });
        if !due {
            return;
        }
        match Message::move_to(station.x, station.y, station.yaw, 0.0) {
            Ok(msg) => {
                if self.send(now, bot, msg).is_some() {
                    if let Some(link) = self.links.get_mut(&bot) {
                        link.last_move = Some((station, now));
                    }
                }
            }
            Err(e) => self.diagnose(now, format!("bot {bot}: station not encodable: {e}")),
        }
    }

    fn try_assign(&mut self, now: f64) -> bool {
        if !self.assignment.is_empty() {
            return true;
        }
        let mut bots = Vec::new();
        for id in self.registry.ids_of(BotKind::Acousto) {
            match self.registry.pose(id) {
                Some(pose) => bots.push((id, pose)),
                None => {
                    self.diagnose(now, format!("waiting for a first fix of bot {id}"));
                    return false;
                }
            }
        }
        let points: Vec<Vec3> = self.stations().iter().map(|(s, _)| Vec3::new(s.x, s.y, 0.0)).collect();
        self.assignment = assign_targets(&bots, &points);
        !self.assignment.is_empty()
    }

    fn send_hinges(&mut self, now: f64) {
        let degrees = self.spec.modality.hinge().degrees();
        let bots: Vec<u8> = self.assignment.keys().copied().collect();
        for bot in bots {
            let from = self.registry.get(bot).map_or(0.0, |e| e.hinge_deg);
            let travel = hinge_plan(from, degrees).map_or(0.0, |s| f64::from(s.unsigned_abs()) / MOTOR_STEPS_PER_SECOND);
            let retry_at = now + travel + self.config.hinge_retry;
            if let Some(seq) = self.send(now, bot, Message::SetHinge { target: (degrees * 100.0).round() as u16 }) {
                if let Some(link) = self.links.get_mut(&bot) {
                    link.hinge = Some(HingeCommand { degrees, seqs: vec![seq], retry_at, acked: false });
                }
            }
        }
    }

    fn retry_hinges(&mut self, now: f64) {
        let due: Vec<(u8, f64)> = self
            .links
            .iter()
            .filter_map(|(id, l)| l.hinge.as_ref().filter(|h| !h.acked && now >= h.retry_at).map(|h| (*id, h.degrees)))
            .collect();
        for (bot, degrees) in due {
            if !self.registry.is_fresh(bot, now, self.config.tolerances.staleness) {
                continue;
            }
            let from = self.registry.get(bot).map_or(0.0, |e| e.hinge_deg);
            let travel = hinge_plan(from, degrees).map_or(0.0, |s| f64::from(s.unsigned_abs()) / MOTOR_STEPS_PER_SECOND);
            if let Some(seq) = self.send(now, bot, Message::SetHinge { target: (degrees * 100.0).round() as u16 }) {
                if let Some(h) = self.links.get_mut(&bot).and_then(|l| l.hinge.as_mut()) {
                    h.seqs.push(seq);
                    h.retry_at = now + travel + self.config.hinge_retry;
                }
            }
        }
    }

    fn control_step(&mut self, now: f64) {
        if !self.try_assign(now) {
            return;
        }
        let staleness = self.config.tolerances.staleness;
        let stations = self.stations();

        // target loss sends the serving bots back to Approaching, stopped
        let mut newly_lost = Vec::new();
        for i in 0..self.targets.len() {
            let lost = self.target_lost(i, now);
            if lost && !self.targets[i].lost {
                newly_lost.push(i);
            }
            self.targets[i].lost = lost;
        }
        if !newly_lost.is_empty() {
            for i in &newly_lost {
                self.diagnose(now, format!("target {i} lost"));
            }
            if self.phase != ScenarioPhase::Approaching {
                self.enter(now, ScenarioPhase::Approaching);
                self.opposed_verified = false;
            }
            let stopped: Vec<u8> = self
                .assignment
                .keys()
                .copied()
                .filter(|b| self.target_of(*b).is_some_and(|t| newly_lost.contains(&t)))
                .collect();
            for bot in stopped {
                self.send(now, bot, Message::Stop);
                if let Some(link) = self.links.get_mut(&bot) {
                    link.last_move = None;
                }
            }
        }

        let mut all_fresh = true;
        let assigned: Vec<(u8, usize)> = self.assignment.iter().map(|(b, s)| (*b, *s)).collect();
        for &(bot, index) in &assigned {
            let fresh = self.registry.is_fresh(bot, now, staleness);
            let link = self.links.get_mut(&bot).expect("every registered bot has a link");
            if !fresh {
                all_fresh = false;
                if !link.stale {
                    link.stale = true;
                    self.diagnose(now, format!("bot {bot} pose stale, commands withheld"));
                }
                continue;
            }
            link.stale = false;
            let (station, target) = stations[index];
            if target.is_some_and(|t| self.targets[t].lost) {
                continue;
            }
            self.maybe_move(bot, station, now);
        }
        if !all_fresh || self.targets.iter().any(|t| t.lost) {
            return;
        }

        let tol = self.config.tolerances;
        let pose_of = |s: &Self, bot: u8| s.registry.pose(bot).expect("fresh bots have poses");
        match self.phase {
            ScenarioPhase::Approaching => {
                let arrived = assigned.iter().all(|&(bot, i)| {
                    let st = stations[i].0;
                    pose_of(self, bot).distance_to(st.x, st.y) <= tol.pos_tol
                });
                if arrived {
                    self.enter(now, ScenarioPhase::Aligning);
                    self.send_hinges(now);
                }
            }
            ScenarioPhase::Aligning => {
                self.retry_hinges(now);
                let aligned = assigned.iter().all(|&(bot, i)| {
                    alignment_check(&pose_of(self, bot), &self.clamp(stations[i].0), &tol)
                        && self.links[&bot].hinge.as_ref().is_some_and(|h| h.acked)
                });
                if aligned {
                    let next = match self.spec.modality {
                        Modality::Levitation => ScenarioPhase::Visualizing,
                        _ => ScenarioPhase::Following,
                    };
                    self.enter(now, next);
                }
            }
            ScenarioPhase::Following => {}
            ScenarioPhase::Visualizing => self.levitation_step(now),
        }
    }

    fn levitation_step(&mut self, now: f64) {
        let Some(dispenser) = self.dispenser_id() else {
            return;
        };
        if let Some(d) = self.dispense {
            if d.status.is_none() && now - d.sent >= self.config.dispense_retry - CLOCK_SLACK {
                // same seq, so a bot that already acted only repeats its ack
                self.push(now, dispenser, d.seq, Message::Dispense { count: 1 });
                self.dispense = Some(DispenseCommand { sent: now, ..d });
            }
            return;
        }
        if !self.registry.is_fresh(dispenser, now, self.config.tolerances.staleness) {
            self.diagnose(now, format!("dispenser {dispenser} pose stale, commands withheld"));
            return;
        }
        let trap = self.spec.trap.expect("validated levitation spec has a trap");
        let plan = match levitation_orchestrate(&self.registry, &trap, &self.config.geometry, &self.config.tolerances) {
            Ok(plan) => plan,
            Err(e) => {
                self.diagnose(now, format!("levitation plan: {e}"));
                return;
            }
        };
        for step in plan {
            match step {
                LevitationStep::VerifyOpposed { .. } => self.opposed_verified = true,
                LevitationStep::StreamJointFrames { .. } => {}
                LevitationStep::Command { bot, message: Message::MoveTo { .. } } => {
                    let station = self.config.geometry.dispenser_station(&trap);
                    self.maybe_move(bot, station, now);
                    return;
                }
                LevitationStep::Command { bot, message } => {
                    if let Some(seq) = self.send(now, bot, message) {
                        self.dispense = Some(DispenseCommand { seq, sent: now, status: None });
                    }
                    return;
                }
            }
        }
    }

    fn emit_frames(&mut self, now: f64) {
        let staleness = self.config.tolerances.staleness;
        let mut boards = Vec::new();
        for (&bot, &index) in &self.assignment {
            let Some(entry) = self.registry.get(bot) else { continue };
            let (Some(tracked), true) = (entry.pose, self.registry.is_fresh(bot, now, staleness)) else {
                if self.spec.modality == Modality::Haptic {
                    continue;
                }
                return;
            };
            let pose = self.config.geometry.mount.board_pose(&tracked.pose, entry.hinge_deg.to_radians());
            let focus = match self.spec.modality {
                Modality::Haptic => self.targets[index].position,
                Modality::Audio => self.targets[0].position,
                Modality::Levitation => self.spec.trap.expect("validated levitation spec has a trap"),
            };
            match self.config.array.build(pose) {
                Ok(array) => boards.push(BoardState { bot, array, focus }),
                Err(e) => {
                    self.diagnose(now, format!("bot {bot}: board pose: {e}"));
                    return;
                }
            }
        }
        if boards.is_empty() {
            return;
        }
        match compute_frames(&boards, &self.spec, now, &self.config.medium, self.config.solver_iterations) {
            Ok(frames) => {
                let frame_id = self.frame_id;
                self.frame_id = self.frame_id.wrapping_add(1);
                for (bot, drive) in frames {
                    self.send(now, bot, Message::AcousticFrame { frame_id, drive });
                }
            }
            Err(e) => self.diagnose(now, format!("frames: {e}")),
        }
    }

    /// Run whatever is due at `now` and return the datagrams to send.
    pub fn tick(&mut self, now: f64) -> Vec<Outbound> {
        if now + CLOCK_SLACK >= self.next_control {
            while self.next_control <= now + CLOCK_SLACK {
                self.next_control += self.config.control_period;
            }
            self.control_step(now);
        }
        if now + CLOCK_SLACK >= self.next_frame {
            while self.next_frame <= now + CLOCK_SLACK {
                self.next_frame += self.config.frame_period;
            }
            let streaming = match self.phase {
                ScenarioPhase::Following => true,
                ScenarioPhase::Visualizing => self.opposed_verified,
                _ => false,
            };
            if streaming {
                self.emit_frames(now);
            }
        }
        std::mem::take(&mut self.outbox)
    }

    /// Drain `transport`, tick, and send the results through it.
    pub fn service(&mut self, transport: &mut impl Transport, now: f64) -> std::io::Result<usize> {
        while let Some(datagram) = transport.recv()? {
            self.handle_inbound(&datagram, now);
        }
        let out = self.tick(now);
        for o in &out {
            transport.send(o.to, &o.bytes)?;
        }
        Ok(out.len())
    }
}
