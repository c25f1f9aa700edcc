use std::f64::consts::{FRAC_PI_2, PI, TAU};

use approx::{assert_abs_diff_eq, assert_relative_eq};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swarmpat::acoustics::*;

fn medium() -> Medium {
    Medium::air_40khz()
}

fn board(pose: Pose) -> PhasedArrayModel {
    ArrayConfig::default().build(pose).unwrap()
}

fn opposed_pair(separation: f64) -> (PhasedArrayModel, PhasedArrayModel) {
    let half = separation / 2.0;
    (
        board(Pose::new(Vec3::new(-half, 0.0, 0.0), 0.0, FRAC_PI_2).unwrap()),
        board(Pose::new(Vec3::new(half, 0.0, 0.0), PI, FRAC_PI_2).unwrap()),
    )
}

/// Element-by-element oracle, written independently of `field_at`.
fn brute_force_field(array: &PhasedArrayModel, drive: &DriveState, point: &Vec3, m: &Medium) -> Complex64 {
    let k = TAU * m.frequency / m.speed_of_sound;
    let mut re = 0.0;
    let mut im = 0.0;
    for (j, e) in array.elements().iter().enumerate() {
        let diff = point - e.position;
        let d = diff.norm();
        let cos_t = e.normal.dot(&diff) / d;
        let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
        let u = k * e.piston_radius * sin_t;
        let dir = if u == 0.0 { 1.0 } else { 2.0 * j1(u) / u };
        let mag = e.reference_pressure * drive.amplitudes()[j] / d * dir;
        let ph = k * d + drive.phases()[j];
        re += mag * ph.cos();
        im += mag * ph.sin();
    }
    Complex64::new(re, im)
}

#[test]
fn field_matches_elementwise_oracle_at_focus() {
    let m = medium();
    let array = board(Pose::identity());
    let focus = Vec3::new(0.004, -0.003, 0.05);
    let drive = focus_phases(&array, &focus, &m).unwrap();
    let fast = field_at(&[(&array, &drive)], &focus, &m).unwrap();
    let slow = brute_force_field(&array, &drive, &focus, &m);
    assert_relative_eq!(fast.norm(), slow.norm(), max_relative = 1e-12);
    assert_abs_diff_eq!((fast - slow).norm() / slow.norm(), 0.0, epsilon = 1e-9);
}

#[test]
fn focus_phase_of_single_element() {
    let m = medium();
    let tpl = ArrayConfig::default().template();
    let one = build_array(1, 1, 0.01, Pose::identity(), tpl).unwrap();
    let drive = focus_phases(&one, &Vec3::new(0.0, 0.0, 0.05), &m).unwrap();
    // (−k·d) mod 2π with k = 2π·40000/343, d = 0.05, evaluated by hand:
    // k·d = 36.636649..., 6·2π − k·d = 1.0624628...
    assert_abs_diff_eq!(drive.phases()[0], 1.062_462_821_622_198, epsilon = 1e-9);
}

#[test]
fn equidistant_elements_share_phase() {
    let m = medium();
    let tpl = ArrayConfig::default().template();
    let ring = build_array(1, 2, 0.02, Pose::identity(), tpl).unwrap();
    let drive = focus_phases(&ring, &Vec3::new(0.0, 0.03, 0.05), &m).unwrap();
    assert_abs_diff_eq!(drive.phases()[0], drive.phases()[1], epsilon = 1e-12);
}

#[test]
fn focus_beats_random_phase_search() {
    let m = medium();
    let array = board(Pose::identity());
    let target = Vec3::new(0.01, 0.005, 0.06);
    let focused = focus_phases(&array, &target, &m).unwrap();
    let best_focus = field_at(&[(&array, &focused)], &target, &m).unwrap().norm();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut best_random: f64 = 0.0;
    for _ in 0..10_000 {
        let phases: Vec<f64> = (0..64).map(|_| rng.random_range(0.0..TAU)).collect();
        let drive = DriveState::new(phases, vec![1.0; 64]).unwrap();
        best_random = best_random.max(field_at(&[(&array, &drive)], &target, &m).unwrap().norm());
    }
    assert!(best_focus >= best_random, "{best_focus} < {best_random}");
}

#[test]
fn focus_reaches_coherent_sum() {
    let m = medium();
    for pose in [
        Pose::identity(),
        Pose::new(Vec3::new(0.1, -0.05, 0.02), 0.8, 0.6).unwrap(),
    ] {
        let array = board(pose);
        let target = pose.to_world(&Vec3::new(0.01, -0.02, 0.07));
        let drive = focus_phases(&array, &target, &m).unwrap();
        let achieved = field_at(&[(&array, &drive)], &target, &m).unwrap().norm();
        let coherent: f64 = array
            .elements()
            .iter()
            .map(|e| e.reference_pressure / (target - e.position).norm() * e.directivity_toward(&target, &m))
            .sum();
        assert_relative_eq!(achieved, coherent, max_relative = 1e-9);
    }
}

#[test]
fn focus_on_element_rejected() {
    let m = medium();
    let array = board(Pose::identity());
    let on = array.elements()[5].position;
    assert!(matches!(focus_phases(&array, &on, &m), Err(AcousticsError::TargetOnElement)));
}

#[test]
fn calibration_reproduces_reference_pressure() {
    let peak = reference::single_board_peak(&ArrayConfig::default(), &medium()).unwrap();
    assert_relative_eq!(peak, CALIBRATION_PRESSURE, max_relative = 1e-12);
}

#[test]
fn grid_scan_peaks_at_focus() {
    let m = medium();
    let array = board(Pose::identity());
    let focus = Vec3::new(0.0, 0.0, 0.05);
    let drive = focus_phases(&array, &focus, &m).unwrap();
    let spec = GridSpec::centered(focus, Vec3::x(), Vec3::y(), 0.5e-3, 101, 101);
    let grid = sample_grid(&[(&array, &drive)], &spec, &m).unwrap();
    assert_eq!(grid.argmax(), (50, 50));
    assert_abs_diff_eq!((spec.point(50, 50) - focus).norm(), 0.0, epsilon = 1e-12);
}

#[test]
fn grid_mirror_symmetry() {
    let m = medium();
    let array = board(Pose::identity());
    let drive = focus_phases(&array, &Vec3::new(0.0, 0.0, 0.06), &m).unwrap();
    let spec = GridSpec::centered(Vec3::new(0.0, 0.0, 0.06), Vec3::x(), Vec3::z(), 1e-3, 21, 11);
    let grid = sample_grid(&[(&array, &drive)], &spec, &m).unwrap();
    for j in 0..11 {
        for i in 0..21 {
            let a = grid.at(i, j).norm();
            let b = grid.at(20 - i, j).norm();
            assert!((a - b).abs() <= 1e-9 * a.max(1.0), "({i},{j}) {a} vs {b}");
        }
    }
}

#[test]
fn grid_sampling_is_schedule_independent() {
    let m = medium();
    let array = board(Pose::identity());
    let drive = focus_phases(&array, &Vec3::new(0.0, 0.0, 0.05), &m).unwrap();
    let spec = GridSpec::centered(Vec3::new(0.0, 0.0, 0.05), Vec3::x(), Vec3::y(), 1e-3, 17, 13);
    let grid = sample_grid(&[(&array, &drive)], &spec, &m).unwrap();
    for j in 0..13 {
        for i in 0..17 {
            let serial = field_at(&[(&array, &drive)], &spec.point(i, j), &m).unwrap();
            assert_eq!(grid.at(i, j), serial);
        }
    }
}

#[test]
fn multipoint_single_target_matches_focus() {
    let m = medium();
    let array = board(Pose::identity());
    let target = Vec3::new(0.01, -0.01, 0.07);
    let focused = focus_phases(&array, &target, &m).unwrap();
    let reference = field_at(&[(&array, &focused)], &target, &m).unwrap().norm();
    let solution = multipoint_solve(&[&array], &[target], 20, &m).unwrap();
    assert_relative_eq!(solution.achieved[0].norm(), reference, max_relative = 0.01);
    let replay = field_at(&[(&array, &solution.drives[0])], &target, &m).unwrap().norm();
    assert_relative_eq!(replay, solution.achieved[0].norm(), max_relative = 1e-9);
}

#[test]
fn multipoint_mirror_targets_balanced() {
    let m = medium();
    let array = board(Pose::identity());
    let targets = [Vec3::new(-0.015, 0.0, 0.06), Vec3::new(0.015, 0.0, 0.06)];
    let solution = multipoint_solve(&[&array], &targets, 50, &m).unwrap();
    let (a, b) = (solution.achieved[0].norm(), solution.achieved[1].norm());
    assert!((a - b).abs() / a.max(b) <= 0.05, "{a} vs {b}");
}

#[test]
fn multipoint_more_iterations_never_worse() {
    let m = medium();
    let array = board(Pose::identity());
    let targets = [Vec3::new(-0.02, 0.01, 0.05), Vec3::new(0.012, -0.004, 0.09)];
    let one = multipoint_solve(&[&array], &targets, 1, &m).unwrap();
    let many = multipoint_solve(&[&array], &targets, 100, &m).unwrap();
    assert!(many.residual() <= one.residual());
    assert!(many.residual_non_increasing(0.0));
    assert_eq!(many.raw_residual_history.len(), 100);
}

#[test]
fn multipoint_rejects_bad_targets() {
    let m = medium();
    let array = board(Pose::identity());
    let t = Vec3::new(0.0, 0.0, 0.05);
    assert!(matches!(
        multipoint_solve(&[&array], &[t, t], 10, &m),
        Err(AcousticsError::DuplicateTargets)
    ));
    assert!(matches!(
        multipoint_solve(&[&array], &[array.elements()[0].position], 10, &m),
        Err(AcousticsError::TargetOnElement)
    ));
    assert!(multipoint_solve(&[&array], &[], 10, &m).is_err());
    assert!(multipoint_solve(&[&array], &[t], 0, &m).is_err());
    let many: Vec<Vec3> = (0..33).map(|i| Vec3::new(i as f64 * 1e-3, 0.0, 0.05)).collect();
    assert!(matches!(
        multipoint_solve(&[&array], &many, 10, &m),
        Err(AcousticsError::TargetCount(33))
    ));
}

#[test]
fn levitation_trap_is_a_node() {
    let m = medium();
    let (a, b) = opposed_pair(0.10);
    let trap = Vec3::zeros();
    let (da, db) = levitation_signature(&a, &b, &trap, &m).unwrap();
    let emitters = [(&a, &da), (&b, &db)];
    let at_trap = field_at(&emitters, &trap, &m).unwrap().norm();
    let quarter = m.wavelength() / 4.0;
    for side in [-1.0, 1.0] {
        let antinode = field_at(&emitters, &Vec3::new(side * quarter, 0.0, 0.0), &m).unwrap().norm();
        assert!(at_trap < 0.05 * antinode, "{at_trap} vs {antinode}");
    }
}

#[test]
fn levitation_roles_swap_symmetrically() {
    let m = medium();
    let (a, b) = opposed_pair(0.10);
    let trap = Vec3::new(0.003, 0.0, 0.0);
    let scan = |x: &PhasedArrayModel, y: &PhasedArrayModel| {
        let (dx, dy) = levitation_signature(x, y, &trap, &m).unwrap();
        let profile = LineProfile::scan(
            &[(x, &dx), (y, &dy)],
            Vec3::new(-0.006, 0.0, 0.0),
            Vec3::new(0.012, 0.0, 0.0),
            1801,
            &m,
        )
        .unwrap();
        find_nodes(&profile, &m)
    };
    let ab = scan(&a, &b);
    let ba = scan(&b, &a);
    assert_eq!(ab.len(), ba.len());
    for (p, q) in ab.iter().zip(&ba) {
        assert_abs_diff_eq!(p, q, epsilon = 1e-9);
    }
}

#[test]
fn without_pi_offset_trap_is_on_axis_maximum() {
    let m = medium();
    let (a, b) = opposed_pair(0.10);
    let trap = Vec3::zeros();
    let da = focus_phases(&a, &trap, &m).unwrap();
    let db = focus_phases(&b, &trap, &m).unwrap();
    let profile = LineProfile::scan(
        &[(&a, &da), (&b, &db)],
        Vec3::new(-0.02, 0.0, 0.0),
        Vec3::new(0.02, 0.0, 0.0),
        801,
        &m,
    )
    .unwrap();
    let argmax = profile
        .samples
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > profile.samples[best] { i } else { best });
    assert_eq!(argmax, 400);
}

#[test]
fn levitation_rejects_unopposed_boards() {
    let m = medium();
    let a = board(Pose::new(Vec3::new(-0.05, 0.0, 0.0), 0.0, FRAC_PI_2).unwrap());
    let b = board(Pose::new(Vec3::new(0.05, 0.0, 0.0), PI / 2.0, FRAC_PI_2).unwrap());
    match levitation_signature(&a, &b, &Vec3::zeros(), &m) {
        Err(AcousticsError::NotOpposed { deviation_deg }) => assert_abs_diff_eq!(deviation_deg, 90.0, epsilon = 1e-9),
        other => panic!("{other:?}"),
    }
    let (a, b) = opposed_pair(0.10);
    assert!(matches!(
        levitation_signature(&a, &b, &Vec3::new(0.2, 0.0, 0.0), &m),
        Err(AcousticsError::TrapNotBetweenBoards)
    ));
}

#[test]
fn analytic_standing_wave_node_spacing() {
    let m = medium();
    let k = m.wavenumber();
    let n = 4001;
    let len = 0.03;
    let samples: Vec<f64> = (0..n)
        .map(|i| (k * (i as f64 * len / (n - 1) as f64) + 0.3).cos().abs())
        .collect();
    let profile = LineProfile::new(Vec3::zeros(), Vec3::new(len, 0.0, 0.0), samples).unwrap();
    let nodes = find_nodes(&profile, &m);
    assert!(nodes.len() >= 6);
    for pair in nodes.windows(2) {
        assert_relative_eq!(pair[1] - pair[0], 4.2875e-3, max_relative = 0.01);
    }
}

#[test]
fn monotone_and_flat_profiles_have_no_nodes() {
    let m = medium();
    let up: Vec<f64> = (0..50).map(|i| i as f64).collect();
    let p = LineProfile::new(Vec3::zeros(), Vec3::x(), up).unwrap();
    assert!(find_nodes(&p, &m).is_empty());
    let flat = LineProfile::new(Vec3::zeros(), Vec3::x(), vec![2.0; 50]).unwrap();
    assert!(find_nodes(&flat, &m).is_empty());
    assert!(LineProfile::new(Vec3::zeros(), Vec3::x(), vec![1.0, 2.0]).is_err());
}

/// Local minima of a brute-force sampled axis, independent of `find_nodes`.
fn oracle_minima(samples: &[f64], spacing: f64, start: f64) -> Vec<f64> {
    let peak = samples.iter().copied().fold(0.0, f64::max);
    (1..samples.len() - 1)
        .filter(|&i| samples[i] < samples[i - 1] && samples[i] <= samples[i + 1] && samples[i] < 0.1 * peak)
        .map(|i| start + i as f64 * spacing)
        .collect()
}

#[test]
fn signature_line_scan_nodes() {
    let m = medium();
    let (a, b) = opposed_pair(0.10);
    let (da, db) = levitation_signature(&a, &b, &Vec3::zeros(), &m).unwrap();
    let (start, n, spacing) = (-0.012, 2401, 1e-5);
    let profile = LineProfile::scan(
        &[(&a, &da), (&b, &db)],
        Vec3::new(start, 0.0, 0.0),
        Vec3::new(start + (n - 1) as f64 * spacing, 0.0, 0.0),
        n,
        &m,
    )
    .unwrap();
    let slow: Vec<f64> = (0..n)
        .map(|i| {
            let q = Vec3::new(start + i as f64 * spacing, 0.0, 0.0);
            (brute_force_field(&a, &da, &q, &m) + brute_force_field(&b, &db, &q, &m)).norm()
        })
        .collect();
    let expected = oracle_minima(&slow, spacing, start);
    let found: Vec<f64> = find_nodes(&profile, &m).iter().map(|o| start + o).collect();
    assert!(found.len() >= 3, "{found:?}");
    assert_eq!(found.len(), expected.len());
    for (f, e) in found.iter().zip(&expected) {
        assert_abs_diff_eq!(f, e, epsilon = spacing);
    }
    // converging beams stretch the axial period: frozen from the oracle above
    for pair in found.windows(2) {
        assert_relative_eq!(pair[1] - pair[0], 4.959e-3, max_relative = 0.01);
    }
}

#[test]
fn fwhm_of_gaussian() {
    let sigma = 2e-3;
    let n = 2001;
    let len = 0.04;
    let samples: Vec<f64> = (0..n)
        .map(|i| {
            let x = i as f64 * len / (n - 1) as f64 - len / 2.0;
            (-x * x / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let p = LineProfile::new(Vec3::zeros(), Vec3::new(len, 0.0, 0.0), samples).unwrap();
    // 2·sqrt(2·ln 2)·σ
    let expected = 2.0 * (2.0 * 2f64.ln()).sqrt() * sigma;
    assert_relative_eq!(expected, 4.7096e-3, max_relative = 1e-4);
    assert_relative_eq!(fwhm(&p).unwrap(), expected, max_relative = 0.005);
}

#[test]
fn fwhm_of_top_hat() {
    // rect of width 10 samples, with the discontinuity sampled at its midpoint
    let mut samples = vec![0.0; 41];
    for s in &mut samples[16..=24] {
        *s = 1.0;
    }
    samples[15] = 0.5;
    samples[25] = 0.5;
    let p = LineProfile::new(Vec3::zeros(), Vec3::new(40.0, 0.0, 0.0), samples).unwrap();
    assert_relative_eq!(fwhm(&p).unwrap(), 10.0, max_relative = 1e-12);
}

#[test]
fn fwhm_errors() {
    let p = LineProfile::new(Vec3::zeros(), Vec3::x(), vec![3.0, 2.0, 1.0]).unwrap();
    assert!(matches!(fwhm(&p), Err(AcousticsError::PeakAtEndpoint)));
    let p = LineProfile::new(Vec3::zeros(), Vec3::x(), vec![0.9, 1.0, 0.2]).unwrap();
    assert!(matches!(fwhm(&p), Err(AcousticsError::TruncatedProfile { side: "left" })));
}

fn focal_width(z: f64, m: &Medium) -> f64 {
    let array = board(Pose::identity());
    let focus = Vec3::new(0.0, 0.0, z);
    let drive = focus_phases(&array, &focus, m).unwrap();
    let reach = 4.0 * m.wavelength();
    let profile = LineProfile::scan(
        &[(&array, &drive)],
        focus - Vec3::x() * reach,
        focus + Vec3::x() * reach,
        801,
        m,
    )
    .unwrap();
    fwhm(&profile).unwrap()
}

#[test]
fn focal_fwhm_close_to_one_wavelength() {
    let m = medium();
    let lambda = m.wavelength();
    assert_relative_eq!(focal_width(0.05, &m) / lambda, 0.994, max_relative = 0.01);
    for z in [0.06, 0.075, 0.09] {
        let width = focal_width(z, &m);
        assert!((0.5 * lambda..=1.5 * lambda).contains(&width), "z={z}: {width}");
    }
}

#[test]
fn focal_fwhm_grows_with_range() {
    let m = medium();
    let lambda = m.wavelength();
    let widths: Vec<f64> = [0.05, 0.07, 0.09, 0.10].iter().map(|&z| focal_width(z, &m)).collect();
    assert!(widths.windows(2).all(|w| w[1] > w[0]));
    // pressure-amplitude width at 100 mm, frozen
    assert_relative_eq!(widths[3] / lambda, 1.605, max_relative = 0.01);
}

#[test]
fn envelope_examples() {
    for t in [0.0, 0.001, 0.37] {
        assert_eq!(am_envelope(200.0, 0.0, t), 1.0);
    }
    // trough of the sine at 3/4 period
    assert_abs_diff_eq!(am_envelope(200.0, 1.0, 3.75e-3), 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(am_envelope(200.0, 1.0, 1.25e-3), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(am_envelope(200.0, 0.4, 3.75e-3), 0.6, epsilon = 1e-12);
}

#[test]
fn reference_pressure_ordering() {
    let peaks = reference::reference_peaks(&ArrayConfig::default(), &medium()).unwrap();
    assert!(peaks.joint > peaks.single && peaks.single > peaks.shared, "{peaks:?}");
}

fn random_board(rng: &mut ChaCha8Rng) -> (PhasedArrayModel, DriveState) {
    let pose = Pose::new(
        Vec3::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1), rng.random_range(0.0..0.05)),
        rng.random_range(-PI..PI),
        rng.random_range(0.0..FRAC_PI_2),
    )
    .unwrap();
    let drive = DriveState::new(
        (0..64).map(|_| rng.random_range(0.0..TAU)).collect(),
        (0..64).map(|_| rng.random_range(0.0..=1.0)).collect(),
    )
    .unwrap();
    (board(pose), drive)
}

#[test]
fn linearity_over_boards() {
    let m = medium();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in 1..=3 {
        for _ in 0..10 {
            let boards: Vec<_> = (0..n).map(|_| random_board(&mut rng)).collect();
            let emitters: Vec<_> = boards.iter().map(|(a, d)| (a, d)).collect();
            let q = Vec3::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1), 0.2);
            let joint = field_at(&emitters, &q, &m).unwrap();
            let parts: Complex64 = emitters.iter().map(|e| field_at(&[*e], &q, &m).unwrap()).sum();
            assert!((joint - parts).norm() <= 1e-12 * joint.norm().max(1e-12));
        }
    }
}

#[test]
fn layout_reciprocity_under_half_turn() {
    let array = board(Pose::identity());
    let turned = board(Pose::new(Vec3::zeros(), PI, 0.0).unwrap());
    for r in 0..8 {
        for c in 0..8 {
            let a = array.elements()[r * 8 + c].position;
            let b = turned.elements()[(7 - r) * 8 + (7 - c)].position;
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-15);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phase_shift_covariance(seed in any::<u64>(), delta in 0.0..TAU) {
        let m = medium();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (array, drive) = random_board(&mut rng);
        let q = array.center() + array.normal() * 0.08;
        let base = field_at(&[(&array, &drive)], &q, &m).unwrap();
        let shifted = field_at(&[(&array, &drive.with_phase_offset(delta))], &q, &m).unwrap();
        let expected = base * Complex64::from_polar(1.0, delta);
        prop_assert!((shifted - expected).norm() <= 1e-12 * base.norm().max(1e-9) * 64.0);
        prop_assert!((shifted.norm() - base.norm()).abs() <= 1e-12 * base.norm().max(1e-9) * 64.0);
    }

    #[test]
    fn rigid_motion_covariance(
        seed in any::<u64>(),
        angle in -PI..PI,
        tx in -0.5..0.5f64,
        ty in -0.5..0.5f64,
        tz in -0.1..0.1f64,
    ) {
        let m = medium();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, da) = random_board(&mut rng);
        let (b, db) = random_board(&mut rng);
        let q = Vec3::new(0.02, -0.03, 0.15);
        let before = field_at(&[(&a, &da), (&b, &db)], &q, &m).unwrap().norm();
        let t = Vec3::new(tx, ty, tz);
        let (a2, b2) = (a.moved(angle, &t), b.moved(angle, &t));
        let rot = nalgebra::Rotation3::from_axis_angle(&Vec3::z_axis(), angle);
        let q2 = rot * q + t;
        let after = field_at(&[(&a2, &da), (&b2, &db)], &q2, &m).unwrap().norm();
        prop_assert!((before - after).abs() <= 1e-9 * before.max(1.0));
    }
}

#[test]
fn residual_non_increasing_on_random_instances() {
    let m = medium();
    let array = board(Pose::identity());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let n = rng.random_range(2..=6);
        let targets: Vec<Vec3> = (0..n)
            .map(|_| Vec3::new(rng.random_range(-0.03..0.03), rng.random_range(-0.03..0.03), rng.random_range(0.04..0.12)))
            .collect();
        let solution = multipoint_solve(&[&array], &targets, 100, &m).unwrap();
        assert!(solution.residual_non_increasing(0.0));
    }
}
