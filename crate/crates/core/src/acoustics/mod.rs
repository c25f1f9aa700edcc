//! Acoustic field engine: board layout, piston-model propagation, focusing
//! and multi-point solvers, levitation signatures and field metrics.
//!
//! Everything here is a pure function of its inputs.

mod array;
mod bessel;
mod field;
mod geometry;
mod levitation;
mod profile;
pub mod reference;
mod solver;
mod transducer;

use thiserror::Error;

pub use array::{
    build_array, calibrate_reference_pressure, local_element_position, wrap_phase, ArrayConfig, DriveState,
    PhasedArrayModel, CALIBRATION_FOCAL_DISTANCE, CALIBRATION_PRESSURE,
};
pub use bessel::{j1, piston_directivity};
pub use field::{field_at, sample_grid, Emitter, FieldGrid, GridSpec};
pub use geometry::{wrap_angle, Pose, Vec3};
pub use levitation::{levitation_signature, opposition_deviation_deg, MAX_OPPOSITION_DEVIATION_DEG};
pub use num_complex::Complex64;
pub use profile::{am_envelope, find_nodes, fwhm, LineProfile, NODE_THRESHOLD};
pub use solver::{
    focus_phases, multipoint_solve, uniformity_residual, GerchbergSaxton, MultipointSolution, MultipointSolver,
    MAX_TARGETS,
};
pub use transducer::{piston_pressure, Medium, TransducerElement, NEAR_FIELD_GUARD, REFERENCE_DISTANCE};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AcousticsError {
    #[error("invalid medium: {0}")]
    InvalidMedium(String),
    #[error("invalid pose: {0}")]
    InvalidPose(String),
    #[error("element normal is not unit length (|n| = {0})")]
    NonUnitNormal(f64),
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error("invalid array: {0}")]
    InvalidArray(String),
    #[error("invalid drive: {0}")]
    InvalidDrive(String),
    #[error("drive length {actual} does not match {expected} elements")]
    DriveLength { expected: usize, actual: usize },
    #[error("query point {distance:e} m from an element is inside the near-field guard")]
    NearField { distance: f64 },
    #[error("target coincides with a transducer element")]
    TargetOnElement,
    #[error("duplicate targets")]
    DuplicateTargets,
    #[error("target count {0} outside 1..=32")]
    TargetCount(usize),
    #[error("invalid solver configuration: {0}")]
    InvalidSolver(String),
    #[error("boards are not opposed: normals deviate {deviation_deg:.1}° from anti-parallel (limit 30°)")]
    NotOpposed { deviation_deg: f64 },
    #[error("trap point is not between the boards")]
    TrapNotBetweenBoards,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("profile maximum lies on an endpoint")]
    PeakAtEndpoint,
    #[error("profile truncated: half maximum never crossed on the {side} side")]
    TruncatedProfile { side: &'static str },
}
