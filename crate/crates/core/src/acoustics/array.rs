use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::geometry::{Pose, Vec3};
use super::transducer::{Medium, TransducerElement};
use super::AcousticsError;

/// Focal distance used to calibrate per-element source strength.
pub const CALIBRATION_FOCAL_DISTANCE: f64 = 0.05;
/// Pressure (Pa) a single 8×8 board must produce at its calibration focus.
pub const CALIBRATION_PRESSURE: f64 = 4469.90;

/// Reduces a phase into `[0, 2π)`.
pub fn wrap_phase(phase: f64) -> f64 {
    let p = phase.rem_euclid(TAU);
    if p >= TAU {
        0.0
    } else {
        p
    }
}

/// Planar rectangular transducer board.
///
/// Elements are stored row-major: index `r * cols + c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasedArrayModel {
    elements: Vec<TransducerElement>,
    rows: usize,
    cols: usize,
    pitch: f64,
    board_pose: Pose,
}

impl PhasedArrayModel {
    pub fn elements(&self) -> &[TransducerElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn board_pose(&self) -> &Pose {
        &self.board_pose
    }

    pub fn center(&self) -> Vec3 {
        self.board_pose.position
    }

    pub fn normal(&self) -> Vec3 {
        self.board_pose.normal()
    }

    /// Same board re-posed by a table-plane rigid motion.
    pub fn moved(&self, angle: f64, translation: &Vec3) -> Self {
        let pose = self.board_pose.moved(angle, translation);
        let template = self.elements[0];
        build_array(self.rows, self.cols, self.pitch, pose, template)
            .expect("re-posing a valid board cannot fail")
    }
}

/// Board-local position of element (row, col), centred on the board origin.
pub fn local_element_position(rows: usize, cols: usize, pitch: f64, row: usize, col: usize) -> Vec3 {
    let cx = (cols as f64 - 1.0) / 2.0;
    let cy = (rows as f64 - 1.0) / 2.0;
    Vec3::new((col as f64 - cx) * pitch, (row as f64 - cy) * pitch, 0.0)
}

pub fn build_array(
    rows: usize,
    cols: usize,
    pitch: f64,
    pose: Pose,
    element_template: TransducerElement,
) -> Result<PhasedArrayModel, AcousticsError> {
    if rows == 0 || cols == 0 {
        return Err(AcousticsError::InvalidArray(format!("{rows}×{cols} grid")));
    }
    if !(pitch > 0.0) {
        return Err(AcousticsError::InvalidArray(format!("pitch {pitch}")));
    }
    element_template.validate()?;
    let normal = pose.normal();
    let elements = (0..rows)
        .flat_map(|r| (0..cols).map(move |c| (r, c)))
        .map(|(r, c)| TransducerElement {
            position: pose.to_world(&local_element_position(rows, cols, pitch, r, c)),
            normal,
            ..element_template
        })
        .collect();
    Ok(PhasedArrayModel {
        elements,
        rows,
        cols,
        pitch,
        board_pose: pose,
    })
}

/// Board build parameters. `Default` is the 8×8, 10.5 mm pitch, 40 kHz board
/// with its source strength calibrated in air.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    pub rows: usize,
    pub cols: usize,
    pub pitch: f64,
    pub piston_radius: f64,
    pub reference_pressure: f64,
}

impl ArrayConfig {
    /// Uncalibrated geometry with unit source strength.
    pub fn geometry_only() -> Self {
        Self {
            rows: 8,
            cols: 8,
            pitch: 10.5e-3,
            piston_radius: 4.5e-3,
            reference_pressure: 1.0,
        }
    }

    /// Default geometry with `reference_pressure` calibrated for `medium`.
    pub fn calibrated(medium: &Medium) -> Self {
        let base = Self::geometry_only();
        Self {
            reference_pressure: calibrate_reference_pressure(
                &base,
                medium,
                CALIBRATION_FOCAL_DISTANCE,
                CALIBRATION_PRESSURE,
            )
            .expect("default geometry calibrates"),
            ..base
        }
    }

    pub fn template(&self) -> TransducerElement {
        TransducerElement {
            position: Vec3::zeros(),
            normal: Vec3::z(),
            piston_radius: self.piston_radius,
            reference_pressure: self.reference_pressure,
        }
    }

    pub fn build(&self, pose: Pose) -> Result<PhasedArrayModel, AcousticsError> {
        build_array(self.rows, self.cols, self.pitch, pose, self.template())
    }
}

impl Default for ArrayConfig {
    fn default() -> Self {
        Self::calibrated(&Medium::air_40khz())
    }
}

/// Source strength that makes a board built from `config` (at the origin,
/// facing +z) reach `target_pressure` when focused `focal_distance` on axis.
pub fn calibrate_reference_pressure(
    config: &ArrayConfig,
    medium: &Medium,
    focal_distance: f64,
    target_pressure: f64,
) -> Result<f64, AcousticsError> {
    let unit = ArrayConfig {
        reference_pressure: 1.0,
        ..*config
    };
    let array = unit.build(Pose::identity())?;
    let focus = Vec3::new(0.0, 0.0, focal_distance);
    let drive = super::solver::focus_phases(&array, &focus, medium)?;
    let p = super::field::field_at(&[(&array, &drive)], &focus, medium)?;
    Ok(target_pressure / p.norm())
}

/// Per-element drive: phase in `[0, 2π)` and normalised amplitude in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveState {
    phases: Vec<f64>,
    amplitudes: Vec<f64>,
}

impl DriveState {
    pub fn new(phases: Vec<f64>, amplitudes: Vec<f64>) -> Result<Self, AcousticsError> {
        if phases.len() != amplitudes.len() {
            return Err(AcousticsError::DriveLength {
                expected: phases.len(),
                actual: amplitudes.len(),
            });
        }
        if let Some(p) = phases.iter().find(|p| !(0.0..TAU).contains(*p)) {
            return Err(AcousticsError::InvalidDrive(format!("phase {p} outside [0, 2π)")));
        }
        if let Some(a) = amplitudes.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(AcousticsError::InvalidDrive(format!("amplitude {a} outside [0, 1]")));
        }
        Ok(Self { phases, amplitudes })
    }

    /// Wraps phases and clamps amplitudes into range.
    pub fn from_raw(phases: impl IntoIterator<Item = f64>, amplitudes: impl IntoIterator<Item = f64>) -> Result<Self, AcousticsError> {
        Self::new(
            phases.into_iter().map(wrap_phase).collect(),
            amplitudes.into_iter().map(|a| a.clamp(0.0, 1.0)).collect(),
        )
    }

    pub fn uniform(len: usize) -> Self {
        Self {
            phases: vec![0.0; len],
            amplitudes: vec![1.0; len],
        }
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn with_phase_offset(&self, delta: f64) -> Self {
        Self {
            phases: self.phases.iter().map(|p| wrap_phase(p + delta)).collect(),
            amplitudes: self.amplitudes.clone(),
        }
    }

    pub fn with_amplitude_scale(&self, scale: f64) -> Self {
        Self {
            phases: self.phases.clone(),
            amplitudes: self.amplitudes.iter().map(|a| (a * scale).clamp(0.0, 1.0)).collect(),
        }
    }
}
