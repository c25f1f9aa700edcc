use std::path::Path;

use serde::Serialize;
use swarmpat::acoustics::{
    field_at, focus_phases, multipoint_solve, sample_grid, uniformity_residual, AcousticsError, DriveState, Vec3,
    NEAR_FIELD_GUARD,
};
use swarmpat::protocol::{decode, encode, quantize_drive, Message, HEADER_LEN};
use swarmpat::sim::{run_scenario, ScenarioSpec, SimConfig, SimError};

use crate::error::{parse_error, CliError};
use crate::manifest::{OutDir, RunManifest};
use crate::scene::{parse_targets, PlaneSpec, SceneConfig};

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::io(path, e))
}

/// Sample |p| over a plane and write `field.csv` and `field.pgm`.
pub fn field(config: &Path, plane: &str, resolution: f64, out: &Path) -> Result<String, CliError> {
    let bytes = read(config)?;
    let plane_spec: PlaneSpec = plane.parse().map_err(CliError::Config)?;
    let scene = SceneConfig::load(config)?;
    let arrays = scene.build()?;
    let drives = scene.drives(&arrays)?;
    let grid_spec = scene.grid(&plane_spec, resolution)?;
    let emitters: Vec<_> = arrays.iter().zip(&drives).collect();
    let grid = sample_grid(&emitters, &grid_spec, &scene.medium)?;

    let mut manifest = RunManifest::new("field", &[(config, &bytes)], out);
    manifest.arg("plane", plane).arg("res", resolution);
    let mut dir = OutDir::create(out, manifest)?;
    let mut csv = Vec::new();
    grid.write_csv(&mut csv).expect("in-memory write");
    dir.write("field.csv", &csv)?;
    let mut pgm = Vec::new();
    grid.write_pgm(&mut pgm).expect("in-memory write");
    dir.write("field.pgm", &pgm)?;
    dir.finish()?;
    let (i, j) = grid.argmax();
    let peak = grid_spec.point(i, j);
    Ok(format!(
        "{}×{} samples, peak {:.2} Pa at ({:.4}, {:.4}, {:.4})",
        grid_spec.nu,
        grid_spec.nv,
        grid.max_abs(),
        peak.x,
        peak.y,
        peak.z
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    /// Board `i` focuses target `i`.
    Focus,
    /// Weighted Gerchberg–Saxton over all boards and targets.
    Gspat,
}

#[derive(Serialize)]
struct BoardDrive {
    phases: Vec<f64>,
    amplitudes: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    frame_payload_hex: Option<String>,
}

#[derive(Serialize)]
struct Achieved {
    target: [f64; 3],
    abs: f64,
    phase: f64,
}

#[derive(Serialize)]
struct SolveReport {
    method: String,
    iterations: usize,
    boards: Vec<BoardDrive>,
    achieved: Vec<Achieved>,
    uniformity_residual: f64,
}

fn reject_duplicates(targets: &[Vec3]) -> Result<(), AcousticsError> {
    for (i, a) in targets.iter().enumerate() {
        if targets[i + 1..].iter().any(|b| (a - b).norm() < NEAR_FIELD_GUARD) {
            return Err(AcousticsError::DuplicateTargets);
        }
    }
    Ok(())
}

/// Solve drives for `targets` and write `solve.json`.
pub fn solve(
    config: &Path,
    targets: &str,
    method: Method,
    iterations: usize,
    quantize: bool,
    out: &Path,
) -> Result<String, CliError> {
    let bytes = read(config)?;
    let scene = SceneConfig::load(config)?;
    let targets = parse_targets(targets)?;
    if targets.is_empty() {
        return Err(CliError::Config("no targets given".into()));
    }
    let arrays = scene.build()?;
    reject_duplicates(&targets)?;
    let drives: Vec<DriveState> = match method {
        Method::Focus => {
            if arrays.len() != targets.len() {
                return Err(CliError::Domain(format!(
                    "focus pairs boards with targets one to one: {} boards, {} targets",
                    arrays.len(),
                    targets.len()
                )));
            }
            arrays.iter().zip(&targets).map(|(a, t)| focus_phases(a, t, &scene.medium)).collect::<Result<_, _>>()?
        }
        Method::Gspat => {
            let refs: Vec<_> = arrays.iter().collect();
            multipoint_solve(&refs, &targets, iterations, &scene.medium)?.drives
        }
    };
    let emitters: Vec<_> = arrays.iter().zip(&drives).collect();
    let pressures = targets.iter().map(|t| field_at(&emitters, t, &scene.medium)).collect::<Result<Vec<_>, _>>()?;

    let boards = drives
        .iter()
        .map(|d| {
            let frame_payload_hex = if quantize {
                let drive = quantize_drive(d).map_err(|e| CliError::Domain(e.to_string()))?;
                let frame = encode(&Message::AcousticFrame { frame_id: 0, drive }, 0, 0).expect("frames always encode");
                Some(hex::encode(&frame[HEADER_LEN..]))
            } else {
                None
            };
            Ok(BoardDrive { phases: d.phases().to_vec(), amplitudes: d.amplitudes().to_vec(), frame_payload_hex })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let report = SolveReport {
        method: format!("{method:?}").to_lowercase(),
        iterations,
        boards,
        achieved: targets
            .iter()
            .zip(&pressures)
            .map(|(t, p)| Achieved { target: [t.x, t.y, t.z], abs: p.norm(), phase: p.arg() })
            .collect(),
        uniformity_residual: uniformity_residual(&pressures),
    };

    let mut manifest = RunManifest::new("solve", &[(config, &bytes)], out);
    manifest
        .arg("targets", targets.iter().map(|t| format!("{},{},{}", t.x, t.y, t.z)).collect::<Vec<_>>().join(";"))
        .arg("method", &report.method)
        .arg("iters", iterations)
        .arg("quantize", quantize);
    let mut dir = OutDir::create(out, manifest)?;
    dir.write("solve.json", (serde_json::to_string_pretty(&report).expect("report serializes") + "\n").as_bytes())?;
    dir.finish()?;
    let summary: Vec<String> = report.achieved.iter().map(|a| format!("{:.2}", a.abs)).collect();
    Ok(format!("|p| at targets: {} Pa", summary.join(", ")))
}

/// Run a scenario and write `report.json` and `ticks.csv`. A negative
/// verdict still writes every file before failing.
pub fn simulate(scenario: &Path, sim: Option<&Path>, seed: Option<u64>, out: &Path) -> Result<String, CliError> {
    let bytes = read(scenario)?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| CliError::Config(format!("{}: {e}", scenario.display())))?;
    let mut spec = ScenarioSpec::from_json(&text).map_err(|e| match e {
        SimError::Parse { .. } => CliError::Config(format!("{}:{e}", scenario.display())),
        e => e.into(),
    })?;
    let sim_bytes = match sim {
        Some(path) => {
            let b = read(path)?;
            spec.sim = serde_json::from_slice::<SimConfig>(&b).map_err(|e| parse_error(path, &e))?;
            Some((path, b))
        }
        None => None,
    };
    if let Some(seed) = seed {
        spec.sim.seed = seed;
    }
    let report = run_scenario(&spec)?;

    let mut configs: Vec<(&Path, &[u8])> = vec![(scenario, &bytes)];
    if let Some((path, b)) = &sim_bytes {
        configs.push((path, b));
    }
    let mut manifest = RunManifest::new("simulate", &configs, out);
    manifest.seed = Some(spec.sim.seed);
    let mut dir = OutDir::create(out, manifest)?;
    dir.write("report.json", (report.to_json() + "\n").as_bytes())?;
    let mut csv = Vec::new();
    report.write_csv(&mut csv).expect("in-memory write");
    dir.write("ticks.csv", &csv)?;
    dir.finish()?;
    if report.verdict.success {
        Ok(format!("success: {}", report.verdict.reason))
    } else {
        Err(CliError::Verdict(format!("failure: {}", report.verdict.reason)))
    }
}

/// Decode and re-encode every hex frame in `path`, one per line. Blank
/// lines and lines starting with `#` are skipped.
pub fn codec(path: &Path) -> Result<String, CliError> {
    let text = String::from_utf8(read(path)?).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut checked = 0;
    let mut problems = Vec::new();
    for (n, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        checked += 1;
        let bytes = match hex::decode(line) {
            Ok(b) => b,
            Err(e) => {
                problems.push(format!("line {n}: not hex ({e})"));
                continue;
            }
        };
        match decode(&bytes) {
            Err(e) => problems.push(format!("line {n}: error code {}: {e}", e.code())),
            Ok(frame) => match encode(&frame.message, frame.bot_id(), frame.seq()) {
                Ok(again) if again == bytes => {}
                Ok(again) => problems.push(format!("line {n}: re-encodes as {}", hex::encode(again))),
                Err(e) => problems.push(format!("line {n}: error code {}: {e}", e.code())),
            },
        }
    }
    if problems.is_empty() {
        Ok(format!("{checked} frames byte-identical"))
    } else {
        Err(CliError::Verdict(format!("{} of {checked} frames failed\n{}", problems.len(), problems.join("\n"))))
    }
}
