use std::f64::consts::FRAC_PI_2;

use proptest::prelude::*;
use swarmpat::acoustics::{find_nodes, levitation_signature, ArrayConfig, LineProfile, Medium, Vec3};
use swarmpat::control::{
    assign_targets, ContentSpec, Modality, Modulation, Outbound, ScenarioPhase, ServerConfig, StationGeometry,
    SwarmServer, TRACKER_CLIENT_ID,
};
use swarmpat::protocol::{encode, Message, MessageKind};
use swarmpat::robot::{BotKind, Bounds, PlanarPose};

fn fix(source: u8, x: f64, y: f64, yaw: f64, t: f64) -> Vec<u8> {
    encode(&Message::pose_report(source, [x, y, 0.15], yaw, t).unwrap(), TRACKER_CLIENT_ID, 0).unwrap()
}

fn ack(bot: u8, seq: u16) -> Vec<u8> {
    encode(&Message::Ack { acked_seq: seq, status: 0 }, bot, 0).unwrap()
}

fn haptic(hands: Vec<Vec3>) -> ContentSpec {
    ContentSpec { modality: Modality::Haptic, targets: hands, modulation: Modulation::default(), trap: None }
}

fn of_kind(out: &[Outbound], kind: MessageKind) -> Vec<&Outbound> {
    out.iter().filter(|o| o.message.kind() == kind).collect()
}

/// Every one-to-one assignment of `n` bots to `n` targets, as target index per bot.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut all = Vec::new();
    for rest in permutations(n - 1) {
        for slot in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(slot, n - 1);
            all.push(p);
        }
    }
    all
}

#[test]
fn two_bots_two_targets_matches_exhaustive_best() {
    let bots = [(0u8, PlanarPose::new(0.0, 0.0, 0.0)), (1, PlanarPose::new(1.0, 0.0, 0.0))];
    let targets = [Vec3::new(0.1, 0.0, 0.0), Vec3::new(0.9, 0.0, 0.0)];
    let cost = |p: &[usize]| -> f64 {
        p.iter().enumerate().map(|(b, t)| bots[b].1.distance_to(targets[*t].x, targets[*t].y)).sum()
    };
    let best = permutations(2).into_iter().min_by(|a, b| cost(a).total_cmp(&cost(b))).unwrap();
    let greedy = assign_targets(&bots, &targets);
    assert_eq!(greedy[&0], best[0]);
    assert_eq!(greedy[&1], best[1]);
    assert_eq!((greedy[&0], greedy[&1]), (0, 1));
}

proptest! {
    #[test]
    fn assignment_is_a_matching_independent_of_input_order(
        xs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..6),
        ts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..6),
        rotate in 0usize..6,
    ) {
        let bots: Vec<(u8, PlanarPose)> =
            xs.iter().enumerate().map(|(i, (x, y))| (i as u8 * 3 + 1, PlanarPose::new(*x, *y, 0.0))).collect();
        let targets: Vec<Vec3> = ts.iter().map(|(x, y)| Vec3::new(*x, *y, 0.1)).collect();
        let a = assign_targets(&bots, &targets);
        prop_assert_eq!(a.len(), bots.len().min(targets.len()));
        let mut used: Vec<usize> = a.values().copied().collect();
        used.sort_unstable();
        used.dedup();
        prop_assert_eq!(used.len(), a.len());
        let mut shuffled = bots.clone();
        shuffled.rotate_left(rotate % bots.len());
        prop_assert_eq!(assign_targets(&shuffled, &targets), a);
    }

    #[test]
    fn moveto_targets_stay_in_bounds_and_no_frames_while_approaching(
        hands in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..4),
        start in (-0.5f64..0.5, -0.5f64..0.5),
    ) {
        let bounds = Bounds { min: [-0.5, -0.4], max: [0.6, 0.5] };
        let cfg = ServerConfig { bounds, ..ServerConfig::default() };
        let spec = haptic(hands.iter().map(|(x, y)| Vec3::new(*x, *y, 0.15)).collect());
        let roster: Vec<(u8, BotKind)> = (1..=hands.len() as u8).map(|id| (id, BotKind::Acousto)).collect();
        let mut s = SwarmServer::new(cfg, spec, &roster).unwrap();
        for k in 0..20 {
            let t = k as f64 * 0.01;
            for (id, _) in &roster {
                s.handle_inbound(&fix(*id, start.0 + 0.2 * f64::from(*id), start.1, 0.0, t), t);
            }
            let out = s.tick(t);
            if s.phase() == ScenarioPhase::Approaching {
                prop_assert!(of_kind(&out, MessageKind::AcousticFrame).is_empty());
            }
            for o in of_kind(&out, MessageKind::MoveTo) {
                let Message::MoveTo { x, y, .. } = o.message else { unreachable!() };
                let (x, y) = (f64::from(x) * 1e-4, f64::from(y) * 1e-4);
                prop_assert!(bounds.contains(x, y), "MoveTo ({x}, {y}) outside bounds");
            }
        }
    }
}

/// Bring a one-bot haptic server to Following with the bot parked on its
/// station. Returns the server and the time reached.
fn following_server(hand: Vec3) -> (SwarmServer, f64) {
    let g = StationGeometry::default();
    let station = g.haptic_station(&hand);
    let mut s = SwarmServer::new(ServerConfig::default(), haptic(vec![hand]), &[(1, BotKind::Acousto)]).unwrap();
    let mut t = 0.0;
    for _ in 0..200 {
        s.handle_inbound(&fix(1, station.x, station.y, station.yaw, t), t);
        s.handle_inbound(&fix(100, hand.x, hand.y, 0.0, t), t);
        let out = s.tick(t);
        for o in of_kind(&out, MessageKind::SetHinge) {
            s.handle_inbound(&ack(1, o.seq), t);
        }
        if s.phase() == ScenarioPhase::Following {
            return (s, t);
        }
        t += 0.01;
    }
    panic!("never reached Following");
}

#[test]
fn teleported_target_gets_a_move_the_same_tick() {
    let hand = Vec3::new(0.1, 0.1, 0.15);
    let (mut s, mut t) = following_server(hand);
    let station = StationGeometry::default().haptic_station(&hand);
    // settle past the next control boundary
    for _ in 0..5 {
        t += 0.01;
        s.handle_inbound(&fix(1, station.x, station.y, station.yaw, t), t);
        s.handle_inbound(&fix(100, hand.x, hand.y, 0.0, t), t);
        s.tick(t);
    }
    let t_jump = (t / 0.02).ceil() * 0.02 + 0.02;
    s.handle_inbound(&fix(1, station.x, station.y, station.yaw, t_jump), t_jump);
    s.handle_inbound(&fix(100, hand.x + 0.5, hand.y, 0.0, t_jump), t_jump);
    let out = s.tick(t_jump);
    let moves = of_kind(&out, MessageKind::MoveTo);
    assert_eq!(moves.len(), 1);
    let Message::MoveTo { x, .. } = moves[0].message else { unreachable!() };
    assert!((f64::from(x) * 1e-4 - (hand.x + 0.5)).abs() < 1e-3, "{x}");
    assert_eq!(s.phase(), ScenarioPhase::Following);
}

#[test]
fn frames_stream_once_following_and_are_deterministic() {
    let hand = Vec3::new(0.1, 0.1, 0.15);
    let run = || {
        let (mut s, t) = following_server(hand);
        let station = StationGeometry::default().haptic_station(&hand);
        let mut bytes = Vec::new();
        for k in 1..=10 {
            let now = t + k as f64 * 0.01;
            s.handle_inbound(&fix(1, station.x, station.y, station.yaw, now), now);
            for o in s.tick(now) {
                if o.message.kind() == MessageKind::AcousticFrame {
                    bytes.push(o.bytes);
                }
            }
        }
        bytes
    };
    let a = run();
    assert_eq!(a.len(), 10, "one frame per tick at 100 Hz");
    assert_eq!(a, run());
}

#[test]
fn lost_target_regresses_to_approaching_with_stop() {
    let hand = Vec3::new(0.1, 0.1, 0.15);
    let (mut s, t) = following_server(hand);
    let station = StationGeometry::default().haptic_station(&hand);
    let mut stopped = false;
    for k in 1..=40 {
        let now = t + k as f64 * 0.01;
        s.handle_inbound(&fix(1, station.x, station.y, station.yaw, now), now);
        stopped |= !of_kind(&s.tick(now), MessageKind::Stop).is_empty();
    }
    assert_eq!(s.phase(), ScenarioPhase::Approaching);
    assert!(stopped);
}

#[test]
fn levitation_hand_off_orders_move_before_dispense() {
    let trap = Vec3::new(0.0, 0.0, 0.10);
    let g = StationGeometry::default();
    let spec = ContentSpec { modality: Modality::Levitation, targets: vec![], modulation: Modulation::default(), trap: Some(trap) };
    let roster = [(1, BotKind::Acousto), (2, BotKind::Acousto), (3, BotKind::Dispenser)];
    let mut s = SwarmServer::new(ServerConfig::default(), spec, &roster).unwrap();
    let [a, b] = g.levitation_stations(&trap);
    let d = g.dispenser_station(&trap);
    let mut dispenser = PlanarPose::new(d.x + 0.05, d.y, d.yaw);
    let mut log = Vec::new();
    let mut frames_before_visualizing = 0;
    for k in 0..400 {
        let t = k as f64 * 0.01;
        s.handle_inbound(&fix(1, a.x, a.y, a.yaw, t), t);
        s.handle_inbound(&fix(2, b.x, b.y, b.yaw, t), t);
        s.handle_inbound(&fix(3, dispenser.x, dispenser.y, dispenser.yaw, t), t);
        let out = s.tick(t);
        for o in &out {
            match o.message {
                Message::SetHinge { target } => {
                    assert_eq!(target, 9000);
                    s.handle_inbound(&ack(o.to, o.seq), t);
                }
                Message::AcousticFrame { .. } if s.phase() != ScenarioPhase::Visualizing => frames_before_visualizing += 1,
                Message::MoveTo { .. } if o.to == 3 => {
                    log.push("move");
                    dispenser = d;
                }
                Message::Dispense { count } => {
                    assert_eq!(count, 1);
                    log.push("dispense");
                    s.handle_inbound(&ack(3, o.seq), t);
                }
                _ => {}
            }
        }
    }
    assert_eq!(frames_before_visualizing, 0);
    assert_eq!(s.phase(), ScenarioPhase::Visualizing);
    assert!(s.dispense_accepted());
    log.dedup();
    assert_eq!(log, vec!["move", "dispense"]);
}

#[test]
fn trap_node_sits_midway_between_stationed_boards() {
    let medium = Medium::air_40khz();
    let g = StationGeometry::default();
    let trap = Vec3::new(0.2, -0.1, 0.10);
    let [a, b] = g.levitation_stations(&trap);
    let config = ArrayConfig::default();
    let board_a = config.build(g.mount.board_pose(&a, FRAC_PI_2)).unwrap();
    let board_b = config.build(g.mount.board_pose(&b, FRAC_PI_2)).unwrap();
    let (da, db) = levitation_signature(&board_a, &board_b, &trap, &medium).unwrap();
    let (fa, fb) = (board_a.center(), board_b.center());
    assert!(((fa - trap).norm() - 0.05).abs() < 1e-12);
    assert!(((fb - trap).norm() - 0.05).abs() < 1e-12);
    // scan the axis between the faces, clear of the near field
    let profile = LineProfile::scan(&[(&board_a, &da), (&board_b, &db)], fa + (trap - fa) * 0.2, fb + (trap - fb) * 0.2, 801, &medium)
        .unwrap();
    let nodes = find_nodes(&profile, &medium);
    let nearest = nodes.iter().map(|s| (profile.point_at(*s) - trap).norm()).fold(f64::INFINITY, f64::min);
    assert!(nearest < 2.0 * profile.spacing(), "closest node {nearest} m from the trap");
}
