use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::acoustics::{wrap_angle, Pose, Vec3};
use crate::control::{StationGeometry, SwarmServer, TARGET_SOURCE_BASE, TRACKER_CLIENT_ID};
use crate::protocol::{decode, encode, Message, SequenceCounter};
use crate::robot::{dd_step, ir_scan, BotFirmware, BotKind, Disc, DiffDriveState, IrParams, PlanarPose};

use super::classifier::levitation_classifier;
use super::config::{ForcedDropError, ScenarioSpec, SimConfig, Trajectory};
use super::network::{Endpoint, SimNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeadStatus {
    Falling,
    Levitated,
    AtRest,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bead {
    pub dispenser: u8,
    pub released_at: f64,
    pub position: Vec3,
    pub status: BeadStatus,
    /// Chute exit to trap, along the dispenser heading, cm.
    pub drop_error_cm: f64,
    /// Station heading minus true heading at release, degrees.
    pub yaw_error_deg: f64,
    /// Classifier verdict, set when the bead crosses the trap plane.
    pub levitated: Option<bool>,
}

/// One robot as the world sees it: true wheel state plus its firmware.
#[derive(Debug, Clone)]
pub struct SimBot {
    pub firmware: BotFirmware,
    pub state: DiffDriveState,
    emitted: u32,
}

impl SimBot {
    pub fn id(&self) -> u8 {
        self.firmware.id
    }

    pub fn kind(&self) -> BotKind {
        self.firmware.kind
    }

    pub fn pose(&self) -> PlanarPose {
        self.state.pose
    }

    fn disc(&self) -> Disc {
        let p = self.state.pose;
        Disc { x: p.x, y: p.y, radius: self.firmware.config.drive.body_radius }
    }
}

/// Noisy tracker fix of a planar pose.
pub fn tracker_observe(pose: &PlanarPose, sigma_pos: f64, sigma_yaw_deg: f64, rng: &mut impl Rng) -> PlanarPose {
    let pos = Normal::new(0.0, sigma_pos).expect("σ ≥ 0");
    let yaw = Normal::new(0.0, sigma_yaw_deg.to_radians()).expect("σ ≥ 0");
    PlanarPose::new(pose.x + pos.sample(rng), pose.y + pos.sample(rng), pose.yaw + yaw.sample(rng))
}

/// The simulated table: robots, beads, moving targets, tracker and network,
/// all advanced in lockstep from a single seeded generator.
#[derive(Debug, Clone)]
pub struct World {
    pub bots: Vec<SimBot>,
    pub beads: Vec<Bead>,
    pub targets: Vec<Trajectory>,
    pub network: SimNetwork,
    pub clock_us: u64,
    pub ticks: u64,
    /// Ticks on which at least one mover was halted to avoid overlap.
    pub collision_halts: u64,
    /// Datagrams the bots could not decode.
    pub undecodable_at_bots: u64,
    config: SimConfig,
    geometry: StationGeometry,
    trap: Option<Vec3>,
    forced: Option<ForcedDropError>,
    rng: ChaCha8Rng,
    dt_us: u64,
    tracker_period_us: u64,
    next_tracker_us: u64,
    tracker_seq: SequenceCounter,
}

impl World {
    pub fn new(spec: &ScenarioSpec) -> Self {
        let config = spec.sim.clone();
        let mut roster = spec.roster.clone();
        roster.sort_by_key(|r| r.id);
        let bots = roster
            .iter()
            .map(|r| SimBot {
                firmware: BotFirmware::new(r.id, r.kind, spec.firmware_config(r.kind)),
                state: DiffDriveState::at(r.planar()),
                emitted: 0,
            })
            .collect();
        Self {
            bots,
            beads: Vec::new(),
            targets: spec.targets.clone(),
            network: SimNetwork::new(config.latency_ms, config.jitter_ms, config.loss),
            clock_us: 0,
            ticks: 0,
            collision_halts: 0,
            undecodable_at_bots: 0,
            dt_us: (config.dt * 1e6).round() as u64,
            tracker_period_us: (1e6 / config.tracker_rate_hz).round().max(1.0) as u64,
            next_tracker_us: 0,
            tracker_seq: SequenceCounter::default(),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            geometry: spec.geometry,
            trap: spec.content.trap,
            forced: spec.forced_drop_error,
            config,
        }
    }

    pub fn time(&self) -> f64 {
        self.clock_us as f64 * 1e-6
    }

    pub fn dt(&self) -> f64 {
        self.dt_us as f64 * 1e-6
    }

    pub fn bot(&self, id: u8) -> Option<&SimBot> {
        self.bots.iter().find(|b| b.id() == id)
    }

    pub fn bot_mut(&mut self, id: u8) -> Option<&mut SimBot> {
        self.bots.iter_mut().find(|b| b.id() == id)
    }

    /// True board pose: robot pose, hinge tilt and the hinge's actuation error.
    pub fn board_pose(&self, id: u8) -> Option<Pose> {
        let bot = self.bot(id)?;
        let hinge = bot.firmware.hinge.as_ref()?;
        let nominal = self.geometry.mount.board_pose(&bot.pose(), hinge.pitch());
        let (offset, yaw_error) = hinge.actuation_error;
        Pose::new(nominal.position + offset, bot.pose().yaw + yaw_error, nominal.pitch()).ok()
    }

    /// Inject a datagram as if `from` had sent it now.
    pub fn post(&mut self, to: Endpoint, bytes: Vec<u8>) {
        self.network.send(to, bytes, self.clock_us, &mut self.rng);
    }

    /// Advance one tick: deliver, run bots, resolve collisions, move beads,
    /// publish tracker fixes, run the server, advance the clock.
    pub fn step(&mut self, mut server: Option<&mut SwarmServer>) {
        let now_us = self.clock_us;
        let now = self.time();
        let dt = self.dt();

        for (to, bytes) in self.network.deliver(now_us) {
            match to {
                Endpoint::Server => {
                    if let Some(s) = server.as_deref_mut() {
                        s.handle_inbound(&bytes, now);
                    }
                }
                Endpoint::Bot(id) => match decode(&bytes) {
                    Ok(frame) => {
                        if let Some(bot) = self.bots.iter_mut().find(|b| b.id() == id) {
                            bot.firmware.receive(&frame);
                        }
                    }
                    Err(_) => self.undecodable_at_bots += 1,
                },
            }
        }

        self.step_bots(dt);
        self.release_beads(now);
        self.step_beads(dt);
        if now_us >= self.next_tracker_us {
            self.publish_fixes(now);
            self.next_tracker_us += self.tracker_period_us;
        }
        if let Some(s) = server {
            for out in s.tick(now) {
                self.network.send(Endpoint::Bot(out.to), out.bytes, now_us, &mut self.rng);
            }
        }
        self.clock_us += self.dt_us;
        self.ticks += 1;
    }

    // pairwise scan indexes both `proposed` and `self.bots`
    #[allow(clippy::needless_range_loop)]
    fn step_bots(&mut self, dt: f64) {
        let discs: Vec<Disc> = self.bots.iter().map(SimBot::disc).collect();
        let ir = IrParams::default();
        let mut proposed = Vec::with_capacity(self.bots.len());
        for (i, bot) in self.bots.iter_mut().enumerate() {
            let others: Vec<Disc> = discs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, d)| *d).collect();
            let reading = ir_scan(&bot.state.pose, &others, Some(&self.config.bounds), &ir);
            let (vl, vr) = bot.firmware.tick(dt, &reading, &mut self.rng);
            bot.state.command(vl, vr, &bot.firmware.config.drive);
            let next = dd_step(&bot.state, &bot.firmware.config.drive, dt).unwrap_or(bot.state);
            proposed.push(next);
        }

        // halt movers until no two discs overlap and everyone stays on the table
        let mut halted = false;
        loop {
            let mut conflict = None;
            'scan: for i in 0..proposed.len() {
                let (pi, ri) = (proposed[i].pose, self.bots[i].firmware.config.drive.body_radius);
                if !self.config.bounds.contains(pi.x, pi.y) && proposed[i] != self.bots[i].state {
                    conflict = Some((i, i));
                    break;
                }
                for j in i + 1..proposed.len() {
                    let (pj, rj) = (proposed[j].pose, self.bots[j].firmware.config.drive.body_radius);
                    if pi.distance_to(pj.x, pj.y) < ri + rj {
                        conflict = Some((i, j));
                        break 'scan;
                    }
                }
            }
            let Some((i, j)) = conflict else { break };
            let mut changed = false;
            for k in [i, j] {
                if proposed[k].pose != self.bots[k].state.pose {
                    proposed[k] = self.bots[k].state;
                    proposed[k].halt();
                    changed = true;
                }
            }
            halted = true;
            if !changed {
                // two stationary discs already overlapping: nothing a halt can fix
                break;
            }
        }
        if halted {
            self.collision_halts += 1;
        }
        for (bot, next) in self.bots.iter_mut().zip(proposed) {
            bot.state = next;
            for msg in bot.firmware.drain_outbox() {
                if let Ok(bytes) = encode(&msg, bot.firmware.id, 0) {
                    self.network.send(Endpoint::Server, bytes, self.clock_us, &mut self.rng);
                }
            }
        }
    }

    fn release_beads(&mut self, now: f64) {
        let mut released = Vec::new();
        for bot in &mut self.bots {
            let Some(d) = bot.firmware.dispenser.as_ref() else { continue };
            for _ in bot.emitted..d.emitted {
                released.push((bot.id(), bot.state.pose));
            }
            bot.emitted = d.emitted;
        }
        for (id, pose) in released {
            let exit = self.geometry.chute_exit(&pose);
            let (drop_error_cm, yaw_error_deg) = match (self.forced, self.trap) {
                (Some(f), _) => (f.dz_cm, f.dpsi_deg),
                (None, Some(trap)) => {
                    let station = self.geometry.dispenser_station(&trap);
                    let along = (trap - exit).x * pose.yaw.cos() + (trap - exit).y * pose.yaw.sin();
                    (along * 100.0, wrap_angle(station.yaw - pose.yaw).to_degrees())
                }
                (None, None) => (f64::NAN, f64::NAN),
            };
            self.beads.push(Bead {
                dispenser: id,
                released_at: now,
                position: exit,
                status: BeadStatus::Falling,
                drop_error_cm,
                yaw_error_deg,
                levitated: None,
            });
        }
    }

    fn step_beads(&mut self, dt: f64) {
        let fall = self.config.bead_fall_speed * dt;
        for bead in self.beads.iter_mut().filter(|b| b.status == BeadStatus::Falling) {
            let z = bead.position.z - fall;
            if let Some(trap) = self.trap {
                if bead.levitated.is_none() && z <= trap.z {
                    let held = levitation_classifier(bead.drop_error_cm, bead.yaw_error_deg, &self.config.classifier);
                    bead.levitated = Some(held);
                    if held {
                        bead.position = trap;
                        bead.status = BeadStatus::Levitated;
                        continue;
                    }
                }
            }
            if z <= 0.0 {
                bead.position.z = 0.0;
                bead.status = BeadStatus::AtRest;
            } else {
                bead.position.z = z;
            }
        }
    }

    fn publish_fixes(&mut self, now: f64) {
        let (sp, sy) = (self.config.tracker_sigma_pos, self.config.tracker_sigma_yaw_deg);
        let mut reports = Vec::new();
        for bot in &self.bots {
            let fix = tracker_observe(&bot.state.pose, sp, sy, &mut self.rng);
            reports.push(Message::pose_report(bot.id(), [fix.x, fix.y, 0.0], fix.yaw, now));
        }
        let noise = Normal::new(0.0, sp).expect("σ ≥ 0");
        for (i, t) in self.targets.iter().enumerate() {
            let p = t.at(now);
            let fix = [p.x + noise.sample(&mut self.rng), p.y + noise.sample(&mut self.rng), p.z + noise.sample(&mut self.rng)];
            let Ok(source) = u8::try_from(usize::from(TARGET_SOURCE_BASE) + i) else { continue };
            reports.push(Message::pose_report(source, fix, 0.0, now));
        }
        for report in reports.into_iter().flatten() {
            let seq = self.tracker_seq.take();
            if let Ok(bytes) = encode(&report, TRACKER_CLIENT_ID, seq) {
                self.network.send(Endpoint::Server, bytes, self.clock_us, &mut self.rng);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{ContentSpec, Modality};
    use crate::sim::config::{RosterEntry, ScenarioKind};

    fn spec(roster: Vec<RosterEntry>, sim: SimConfig) -> ScenarioSpec {
        ScenarioSpec {
            kind: ScenarioKind::S1Haptics,
            roster,
            targets: vec![],
            content: ContentSpec { modality: Modality::Haptic, targets: vec![], modulation: Default::default(), trap: None },
            tolerances: Default::default(),
            geometry: Default::default(),
            verdict: Default::default(),
            forced_drop_error: None,
            sim,
        }
    }

    fn acousto(id: u8, x: f64, y: f64, yaw: f64) -> RosterEntry {
        RosterEntry { id, kind: BotKind::Acousto, pose: [x, y, yaw] }
    }

    #[test]
    fn idle_world_only_advances_clock() {
        let mut w = World::new(&spec(vec![acousto(1, 0.1, 0.2, 0.3)], SimConfig::default()));
        let before = w.bots[0].state;
        for _ in 0..100 {
            w.step(None);
        }
        assert_eq!(w.bots[0].state, before);
        assert_eq!(w.clock_us, 1_000_000);
        assert!(w.beads.is_empty());
    }

    #[test]
    fn latency_delays_first_motion_to_third_tick() {
        let cfg = SimConfig { latency_ms: 20.0, ..SimConfig::default() };
        let mut w = World::new(&spec(vec![acousto(1, 0.0, 0.0, 0.0)], cfg));
        let fix = Message::pose_report(1, [0.0, 0.0, 0.0], 0.0, 0.0).unwrap();
        w.bot_mut(1).unwrap().firmware.receive(&decode(&encode(&fix, 1, 1).unwrap()).unwrap());
        w.post(Endpoint::Bot(1), encode(&Message::move_to(0.5, 0.0, 0.0, 0.0).unwrap(), 1, 2).unwrap());
        let start = w.bots[0].state.pose;
        let mut first_motion = None;
        for tick in 1..=5 {
            w.step(None);
            if first_motion.is_none() && w.bots[0].state.pose != start {
                first_motion = Some(tick);
            }
        }
        assert_eq!(first_motion, Some(3));
    }

    #[test]
    fn head_on_robots_halt_before_touching() {
        let mut w = World::new(&spec(vec![acousto(1, -0.1, 0.0, 0.0), acousto(2, 0.1, 0.0, std::f64::consts::PI)], SimConfig::default()));
        for (id, goal) in [(1u8, 0.2), (2, -0.2)] {
            let pose = w.bot(id).unwrap().pose();
            let fix = Message::pose_report(id, [pose.x, pose.y, 0.0], pose.yaw, 0.0).unwrap();
            let fw = &mut w.bot_mut(id).unwrap().firmware;
            fw.receive(&decode(&encode(&fix, id, 1).unwrap()).unwrap());
            fw.receive(&decode(&encode(&Message::move_to(goal, 0.0, pose.yaw, 0.0).unwrap(), id, 2).unwrap()).unwrap());
        }
        for _ in 0..500 {
            w.step(None);
            let (a, b) = (w.bots[0].pose(), w.bots[1].pose());
            assert!(a.distance_to(b.x, b.y) >= 0.08 - 1e-12);
        }
        let (a, b) = (w.bots[0].pose(), w.bots[1].pose());
        assert!(a.x < b.x, "robots passed through each other");
    }

    #[test]
    fn tracker_noise_matches_sigma() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pose = PlanarPose::new(0.2, -0.1, 0.4);
        let n = 20_000;
        let (mut sx, mut sy) = (0.0, 0.0);
        for _ in 0..n {
            let f = tracker_observe(&pose, 0.0045, 1.0, &mut rng);
            sx += (f.x - pose.x).powi(2);
            sy += wrap_angle(f.yaw - pose.yaw).to_degrees().powi(2);
        }
        let (sx, sy) = ((sx / n as f64).sqrt(), (sy / n as f64).sqrt());
        assert!((sx / 0.0045 - 1.0).abs() < 0.1, "{sx}");
        assert!((sy - 1.0).abs() < 0.1, "{sy}");
    }
}
