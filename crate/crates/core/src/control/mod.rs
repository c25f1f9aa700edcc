//! The central swarm server: who goes where, when the boards tilt, and what
//! each board plays.
//!
//! The server is a single reactor. Inbound frames are applied in arrival
//! order, then [`SwarmServer::tick`] runs the scenario phase machine and the
//! frame scheduler once per simulation step.

mod assign;
mod content;
mod frames;
mod orchestrate;
mod registry;
mod server;
mod transport;

use thiserror::Error;

use crate::acoustics::AcousticsError;

pub use assign::assign_targets;
pub use content::{
    alignment_check, ContentSpec, Modality, Modulation, MountGeometry, Station, StationGeometry, Tolerances,
};
pub use frames::{compute_frames, BoardState};
pub use orchestrate::{levitation_orchestrate, LevitationStep};
pub use registry::{BotEntry, BotRegistry, TrackedPose, POSE_SMOOTHING, TARGET_SOURCE_BASE, TRACKER_CLIENT_ID};
pub use server::{Diagnostic, Outbound, ScenarioPhase, ServerConfig, SwarmServer};
pub use transport::{Transport, UdpTransport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("bot {bot}: {source}")]
    Acoustics {
        bot: u8,
        #[source]
        source: AcousticsError,
    },
    #[error("no dispenser bot in the roster")]
    MissingDispenser,
    #[error("levitation needs exactly two opposed acousto bots: {0}")]
    Unpaired(String),
    #[error("bot {0} has no tracked pose")]
    UnknownPose(u8),
    #[error("invalid content: {0}")]
    InvalidContent(String),
}
