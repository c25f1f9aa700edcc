//! Deterministic discrete-time world: robots, hinges, beads, moving targets,
//! a noisy tracker and a lossy network, run end to end against the swarm
//! server.
//!
//! Every random draw comes from one generator seeded by the run's seed, so
//! a scenario and a seed fix the report byte for byte.

mod classifier;
mod config;
mod network;
mod scenario;
mod world;

use thiserror::Error;

use crate::control::ControlError;

pub use classifier::{levitation_classifier, ClassifierThresholds};
pub use config::{
    ForcedDropError, RosterEntry, ScenarioKind, ScenarioSpec, SimConfig, Trajectory, VerdictLimits, Waypoint,
};
pub use network::{Endpoint, NetStats, SimNetwork};
pub use scenario::{
    run_scenario, BeadOutcome, BotSummary, FollowSummary, MessageCounts, PhaseChange, ScenarioReport, TickSample,
    Verdict,
};
pub use world::{tracker_observe, Bead, BeadStatus, SimBot, World};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("roster shortfall: {0}")]
    RosterShortfall(String),
    #[error(transparent)]
    Control(ControlError),
}
