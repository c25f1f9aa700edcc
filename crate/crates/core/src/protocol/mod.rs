//! Binary wire protocol between the swarm server, the tracker and the bots.
//!
//! Every frame is a 10-byte header followed by a fixed-size payload chosen
//! by the message type. Multi-byte integers are little-endian. Positions are
//! carried in 0.1 mm units and angles in 0.01° units.

mod codec;
mod message;
mod quantize;
mod sequence;

use thiserror::Error;

pub use codec::{decode, encode, Frame, WireHeader, HEADER_LEN, MAGIC, VERSION};
pub use message::{angle_from_wire, angle_to_wire, Message, MessageKind};
pub use quantize::{dequantize_drive, quantize_drive, quantize_phase, QuantizedDrive, ELEMENTS_PER_FRAME};
pub use sequence::{accept_sequence, SeqVerdict, SequenceCounter, SequenceTracker};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported protocol version {0}")]
    BadVersion(u8),
    #[error("unknown message type {0}")]
    UnknownType(u8),
    #[error("nonzero flags byte {0:#04x}")]
    BadFlags(u8),
    #[error("payload length {actual} does not match {expected} for this message type")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("frame truncated: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("{extra} trailing bytes after payload")]
    TrailingBytes { extra: usize },
    #[error("field {field} out of range: {value}")]
    FieldOutOfRange { field: &'static str, value: i64 },
    #[error("drive has {0} elements, frames carry exactly 64")]
    DriveLength(usize),
}

impl ProtocolError {
    /// Stable numeric code, distinct per error kind.
    pub fn code(&self) -> u8 {
        match self {
            Self::BadMagic => 1,
            Self::BadVersion(_) => 2,
            Self::UnknownType(_) => 3,
            Self::BadFlags(_) => 4,
            Self::LengthMismatch { .. } => 5,
            Self::Truncated { .. } => 6,
            Self::TrailingBytes { .. } => 7,
            Self::FieldOutOfRange { .. } => 8,
            Self::DriveLength(_) => 9,
        }
    }
}
