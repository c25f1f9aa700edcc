use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swarmpat::acoustics::DriveState;
use swarmpat::protocol::*;

const GOLDEN: &str = include_str!("../testdata/golden_frames.hex");

fn golden_frames() -> Vec<Vec<u8>> {
    GOLDEN.lines().filter(|l| !l.trim().is_empty()).map(|l| hex::decode(l.trim()).unwrap()).collect()
}

fn random_message(rng: &mut ChaCha8Rng) -> Message {
    match rng.random_range(0..7) {
        0 => Message::MoveTo {
            x: rng.random(),
            y: rng.random(),
            yaw: rng.random_range(-18_000..=18_000),
            speed: rng.random(),
        },
        1 => Message::SetHinge { target: rng.random_range(0..=9_000) },
        2 => Message::Dispense { count: rng.random() },
        3 => {
            let mut drive = QuantizedDrive::zeroed();
            rng.fill(&mut drive.phase[..]);
            rng.fill(&mut drive.amplitude[..]);
            Message::AcousticFrame { frame_id: rng.random(), drive }
        }
        4 => Message::Stop,
        5 => Message::PoseReport {
            source_id: rng.random(),
            x: rng.random(),
            y: rng.random(),
            z: rng.random(),
            yaw: rng.random_range(-18_000..=18_000),
            timestamp: rng.random(),
        },
        _ => Message::Ack { acked_seq: rng.random(), status: rng.random() },
    }
}

#[test]
fn golden_vectors_decode_and_reencode_exactly() {
    let frames = golden_frames();
    assert_eq!(frames.len(), 8);
    let mut kinds = std::collections::BTreeSet::new();
    for bytes in &frames {
        let frame = decode(bytes).unwrap();
        kinds.insert(frame.message.kind());
        assert_eq!(&encode(&frame.message, frame.bot_id(), frame.seq()).unwrap(), bytes);
    }
    assert_eq!(kinds.len(), MessageKind::ALL.len());
}

#[test]
fn golden_vectors_match_hand_built_messages() {
    let frames = golden_frames();
    let expect = [
        (Message::Stop, 3, 7),
        (Message::SetHinge { target: 4500 }, 1, 1),
        (Message::MoveTo { x: 1500, y: -2750, yaw: -9000, speed: 150 }, 2, 65535),
        (Message::Dispense { count: 4 }, 4, 42),
    ];
    for ((msg, bot, seq), bytes) in expect.iter().zip(&frames) {
        assert_eq!(&encode(msg, *bot, *seq).unwrap(), bytes);
    }
    let f = decode(&frames[5]).unwrap();
    assert_eq!(
        f.message,
        Message::PoseReport { source_id: 100, x: -1234, y: 5678, z: 1000, yaw: 17999, timestamp: 123_456 }
    );
    assert_eq!(f.bot_id(), 0xfe);
}

#[test]
fn round_trip_randomized_messages() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut per_kind = [0usize; 7];
    for _ in 0..100_000 {
        let msg = random_message(&mut rng);
        let (bot, seq) = (rng.random(), rng.random());
        let bytes = encode(&msg, bot, seq).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + msg.kind().payload_len());
        let frame = decode(&bytes).unwrap();
        assert_eq!(frame.message, msg);
        assert_eq!((frame.bot_id(), frame.seq()), (bot, seq));
        per_kind[msg.kind() as usize - 1] += 1;
    }
    assert!(per_kind.iter().all(|&n| n > 10_000));
}

#[test]
fn decoder_survives_fuzzing() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xf022);
    let seeds = golden_frames();
    let mut accepted = 0usize;
    for i in 0..1_000_000 {
        let bytes: Vec<u8> = if i % 2 == 0 {
            // mutate a valid frame so the header survives often enough to reach payload parsing
            let mut b = seeds[rng.random_range(0..seeds.len())].clone();
            for _ in 0..rng.random_range(1..4) {
                match rng.random_range(0..3) {
                    0 if !b.is_empty() => {
                        let k = rng.random_range(0..b.len());
                        b[k] = rng.random();
                    }
                    1 => b.truncate(rng.random_range(0..=b.len())),
                    _ => b.push(rng.random()),
                }
            }
            b
        } else {
            let n = rng.random_range(0..160);
            (0..n).map(|_| rng.random()).collect()
        };
        if let Ok(frame) = decode(&bytes) {
            accepted += 1;
            assert_eq!(encode(&frame.message, frame.bot_id(), frame.seq()).unwrap(), bytes);
        }
    }
    assert!(accepted > 0);
}

#[test]
fn every_decode_error_has_its_own_code() {
    let good = encode(&Message::Ack { acked_seq: 1, status: 0 }, 0, 0).unwrap();
    let mut errors = Vec::new();
    let mut mutate = |f: &dyn Fn(&mut Vec<u8>)| {
        let mut b = good.clone();
        f(&mut b);
        errors.push(decode(&b).unwrap_err());
    };
    mutate(&|b| b[1] = 0);
    mutate(&|b| b[2] = 9);
    mutate(&|b| b[3] = 200);
    mutate(&|b| b[5] = 0x80);
    mutate(&|b| b[8] = 4);
    mutate(&|b| b.truncate(12));
    mutate(&|b| b.push(1));
    let mut hinge = encode(&Message::SetHinge { target: 0 }, 0, 0).unwrap();
    hinge[11] = 0xff;
    errors.push(decode(&hinge).unwrap_err());
    let codes: std::collections::BTreeSet<u8> = errors.iter().map(ProtocolError::code).collect();
    assert_eq!(codes.len(), errors.len(), "{errors:?}");
}

#[test]
fn phase_quantization_error_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100_000 / 64 + 1 {
        let phases: Vec<f64> = (0..64).map(|_| rng.random_range(0.0..TAU)).collect();
        let amps: Vec<f64> = (0..64).map(|_| rng.random_range(0.0..=1.0)).collect();
        let drive = DriveState::new(phases, amps).unwrap();
        let back = dequantize_drive(&quantize_drive(&drive).unwrap()).unwrap();
        for j in 0..64 {
            let d = (back.phases()[j] - drive.phases()[j]).rem_euclid(TAU);
            let err = d.min(TAU - d);
            assert!(err <= PI / 256.0 + 1e-12, "{err}");
            assert!((back.amplitudes()[j] - drive.amplitudes()[j]).abs() <= 1.0 / 510.0 + 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn serial_window_is_antisymmetric(a in any::<u16>(), b in any::<u16>()) {
        let fwd = accept_sequence(a, b) == SeqVerdict::Accept;
        let back = accept_sequence(b, a) == SeqVerdict::Accept;
        if a == b || a.wrapping_sub(b) == 0x8000 {
            prop_assert!(!fwd && !back);
        } else {
            prop_assert!(fwd != back);
        }
    }

    #[test]
    fn quantized_levels_are_dequantize_fixed_points(phase in any::<[u8; 64]>(), amp in any::<[u8; 64]>()) {
        let q = QuantizedDrive { phase, amplitude: amp };
        prop_assert_eq!(quantize_drive(&dequantize_drive(&q).unwrap()).unwrap(), q);
    }
}
