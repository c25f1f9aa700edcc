use std::collections::BTreeMap;
use std::io::{self, Write};

use serde::Serialize;

use crate::acoustics::{field_at, ArrayConfig, wrap_angle, DriveState, Medium, Vec3};
use crate::control::{Diagnostic, Modality, ScenarioPhase, Station, SwarmServer};
use crate::protocol::dequantize_drive;
use crate::robot::BotKind;

use super::config::{ScenarioKind, ScenarioSpec};
use super::network::NetStats;
use super::world::{BeadStatus, World};
use super::SimError;

/// One CSV row: an acousto bot's state at the start of a tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TickSample {
    pub t: f64,
    pub bot_id: u8,
    /// Planar distance to the station for the true target, m.
    pub err_pos: f64,
    /// Station heading minus true heading, degrees.
    pub err_yaw: f64,
    /// Carrier pressure magnitude at the bot's focal point, Pa.
    pub p_at_target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseChange {
    pub t: f64,
    pub phase: ScenarioPhase,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BotSummary {
    pub id: u8,
    pub kind: BotKind,
    /// `[x, y, yaw]` at the end of the run.
    pub final_pose: [f64; 3],
    pub hinge_deg: Option<f64>,
    /// Beads released by the carousel, dispensers only.
    pub beads_emitted: Option<u32>,
    pub stale_frames: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FollowSummary {
    pub reached_at: f64,
    pub max_err_pos: f64,
    pub max_err_yaw_deg: f64,
    pub min_p_at_target: f64,
    pub mean_p_at_target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeadOutcome {
    pub dispenser: u8,
    pub released_at: f64,
    pub drop_error_cm: f64,
    pub yaw_error_deg: f64,
    pub status: BeadStatus,
    pub levitated: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MessageCounts {
    pub network: NetStats,
    /// Frames the bots discarded as out of sequence.
    pub stale: u64,
    pub undecodable: u64,
    pub server_sent_by_kind: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub success: bool,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub scenario: ScenarioKind,
    pub seed: u64,
    pub dt: f64,
    pub ticks: u64,
    pub end_time: f64,
    pub phase_transitions: Vec<PhaseChange>,
    pub following: Option<FollowSummary>,
    pub bots: Vec<BotSummary>,
    pub beads: Vec<BeadOutcome>,
    pub messages: MessageCounts,
    pub diagnostics: Vec<Diagnostic>,
    pub verdict: Verdict,
    #[serde(skip)]
    pub samples: Vec<TickSample>,
}

impl ScenarioReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,bot_id,err_pos,err_yaw,p_at_target")?;
        for s in &self.samples {
            writeln!(out, "{:.6},{},{:.6e},{:.6e},{:.6e}", s.t, s.bot_id, s.err_pos, s.err_yaw, s.p_at_target)?;
        }
        Ok(())
    }

    pub fn reached(&self, phase: ScenarioPhase) -> Option<f64> {
        self.phase_transitions.iter().find(|c| c.phase == phase).map(|c| c.t)
    }
}

/// Reference station and focal point for `bot` from the true target
/// positions at `t`.
fn reference(spec: &ScenarioSpec, server: &SwarmServer, bot: u8, t: f64) -> Option<(Station, Vec3)> {
    let index = *server.assignment().get(&bot)?;
    let g = &spec.geometry;
    match spec.kind.modality() {
        Modality::Haptic => {
            let hand = spec.targets.get(index)?.at(t);
            Some((g.haptic_station(&hand), hand))
        }
        Modality::Audio => {
            let ear = spec.targets.first()?.at(t);
            Some((g.audio_stations(&ear)[index], ear))
        }
        Modality::Levitation => {
            let trap = spec.content.trap?;
            Some((g.levitation_stations(&trap)[index], trap))
        }
    }
}

/// Drives as played without the modulation envelope: each frame's
/// amplitudes renormalized by its largest level. An all-zero frame (an
/// envelope trough) keeps the previous carrier.
fn update_carriers(world: &World, carriers: &mut BTreeMap<u8, DriveState>) {
    for bot in &world.bots {
        let Some((_, frame)) = bot.firmware.frame() else { continue };
        let peak = frame.max_amplitude_level();
        if peak == 0 {
            continue;
        }
        if let Ok(drive) = dequantize_drive(frame) {
            carriers.insert(bot.id(), drive.with_amplitude_scale(255.0 / f64::from(peak)));
        }
    }
}

fn pressure_at(world: &World, array: &ArrayConfig, carriers: &BTreeMap<u8, DriveState>, point: &Vec3, medium: &Medium) -> f64 {
    let arrays: Vec<_> = carriers
        .iter()
        .filter_map(|(id, drive)| {
            let pose = world.board_pose(*id)?;
            array.build(pose).ok().map(|a| (a, drive))
        })
        .collect();
    let emitters: Vec<_> = arrays.iter().map(|(a, d)| (a, *d)).collect();
    field_at(&emitters, point, medium).map_or(0.0, |p| p.norm())
}

/// Run one scenario end to end.
pub fn run_scenario(spec: &ScenarioSpec) -> Result<ScenarioReport, SimError> {
    spec.validate()?;
    spec.check_roster()?;
    let roster: Vec<_> = spec.roster.iter().map(|r| (r.id, r.kind)).collect();
    let server_config = spec.server_config();
    let (medium, array) = (server_config.medium, server_config.array);
    let mut server = SwarmServer::new(server_config, spec.content_at_start(), &roster).map_err(SimError::Control)?;
    let mut world = World::new(spec);
    let total_ticks = (spec.sim.duration / world.dt()).round() as u64;

    let mut samples = Vec::new();
    let mut carriers = BTreeMap::new();
    while world.ticks < total_ticks {
        let t = world.time();
        world.step(Some(&mut server));
        update_carriers(&world, &mut carriers);
        let assigned: Vec<u8> = server.assignment().keys().copied().collect();
        for bot in assigned {
            let (Some((station, focus)), Some(sim)) = (reference(spec, &server, bot, t), world.bot(bot)) else {
                continue;
            };
            let pose = sim.pose();
            samples.push(TickSample {
                t,
                bot_id: bot,
                err_pos: pose.distance_to(station.x, station.y),
                err_yaw: wrap_angle(station.yaw - pose.yaw).to_degrees(),
                p_at_target: pressure_at(&world, &array, &carriers, &focus, &medium),
            });
        }
        if spec.kind == ScenarioKind::S3Levitation && world.beads.iter().any(|b| b.levitated.is_some()) {
            break;
        }
    }

    let phase_transitions: Vec<PhaseChange> =
        server.transitions().iter().map(|&(t, phase)| PhaseChange { t, phase }).collect();
    let following = follow_summary(&phase_transitions, &samples);
    let beads: Vec<BeadOutcome> = world
        .beads
        .iter()
        .map(|b| BeadOutcome {
            dispenser: b.dispenser,
            released_at: b.released_at,
            drop_error_cm: b.drop_error_cm,
            yaw_error_deg: b.yaw_error_deg,
            status: b.status,
            levitated: b.levitated,
        })
        .collect();
    let verdict = judge(spec, following.as_ref(), &beads);
    let bots = world
        .bots
        .iter()
        .map(|b| {
            let p = b.pose();
            BotSummary {
                id: b.id(),
                kind: b.kind(),
                final_pose: [p.x, p.y, p.yaw],
                hinge_deg: b.firmware.hinge.as_ref().map(|h| h.angle_deg()),
                beads_emitted: b.firmware.dispenser.as_ref().map(|d| d.emitted),
                stale_frames: b.firmware.stale_frames,
            }
        })
        .collect();
    let messages = MessageCounts {
        network: world.network.stats(),
        stale: world.bots.iter().map(|b| b.firmware.stale_frames).sum(),
        undecodable: world.undecodable_at_bots + server.undecodable(),
        server_sent_by_kind: server.sent_counts().iter().map(|(k, n)| (format!("{k:?}"), *n)).collect(),
    };
    Ok(ScenarioReport {
        scenario: spec.kind,
        seed: spec.sim.seed,
        dt: world.dt(),
        ticks: world.ticks,
        end_time: world.time(),
        phase_transitions,
        following,
        bots,
        beads,
        messages,
        diagnostics: server.diagnostics().to_vec(),
        verdict,
        samples,
    })
}

fn follow_summary(transitions: &[PhaseChange], samples: &[TickSample]) -> Option<FollowSummary> {
    let reached_at = transitions.iter().find(|c| c.phase == ScenarioPhase::Following)?.t;
    let after: Vec<&TickSample> = samples.iter().filter(|s| s.t >= reached_at).collect();
    if after.is_empty() {
        return None;
    }
    // pressure counts from each bot's first frame; the first few ticks of
    // Following are spent in flight
    let mut streaming = BTreeMap::new();
    for s in &after {
        if s.p_at_target > 0.0 {
            streaming.entry(s.bot_id).or_insert(s.t);
        }
    }
    let pressures: Vec<f64> = after
        .iter()
        .filter(|s| streaming.get(&s.bot_id).is_some_and(|t| s.t >= *t))
        .map(|s| s.p_at_target)
        .collect();
    Some(FollowSummary {
        reached_at,
        max_err_pos: after.iter().map(|s| s.err_pos).fold(0.0, f64::max),
        max_err_yaw_deg: after.iter().map(|s| s.err_yaw.abs()).fold(0.0, f64::max),
        min_p_at_target: pressures.iter().copied().reduce(f64::min).unwrap_or(0.0),
        mean_p_at_target: if pressures.is_empty() { 0.0 } else { pressures.iter().sum::<f64>() / pressures.len() as f64 },
    })
}

fn judge(spec: &ScenarioSpec, following: Option<&FollowSummary>, beads: &[BeadOutcome]) -> Verdict {
    let fail = |reason: String| Verdict { success: false, reason };
    match spec.kind {
        ScenarioKind::S1Haptics | ScenarioKind::S2Audio => {
            let limits = spec.verdict;
            let Some(f) = following else {
                return fail("never reached following".into());
            };
            if f.reached_at > limits.follow_deadline {
                fail(format!("following reached at {:.2} s, after the {:.2} s deadline", f.reached_at, limits.follow_deadline))
            } else if f.max_err_pos > limits.follow_error {
                fail(format!("follow error {:.4} m exceeds {:.4} m", f.max_err_pos, limits.follow_error))
            } else {
                Verdict {
                    success: true,
                    reason: format!("following at {:.2} s, max error {:.4} m", f.reached_at, f.max_err_pos),
                }
            }
        }
        ScenarioKind::S3Levitation => match beads.iter().find_map(|b| b.levitated.map(|l| (l, b))) {
            Some((true, b)) => Verdict {
                success: true,
                reason: format!("bead levitated (ΔZ {:.3} cm, Δψ {:.3}°)", b.drop_error_cm, b.yaw_error_deg),
            },
            Some((false, b)) => {
                fail(format!("bead not levitated (ΔZ {:.3} cm, Δψ {:.3}°)", b.drop_error_cm, b.yaw_error_deg))
            }
            None => fail("no bead reached the trap plane".into()),
        },
    }
}
