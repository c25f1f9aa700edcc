use std::f64::consts::TAU;

use crate::acoustics::{AcousticsError, DriveState};

use super::ProtocolError;

pub const ELEMENTS_PER_FRAME: usize = 64;

const PHASE_LEVELS: f64 = 256.0;
const AMP_LEVELS: f64 = 255.0;

/// Drive at wire resolution: 256 phase levels over one period and 256
/// amplitude levels over [0, 1].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuantizedDrive {
    pub phase: [u8; ELEMENTS_PER_FRAME],
    pub amplitude: [u8; ELEMENTS_PER_FRAME],
}

impl QuantizedDrive {
    pub fn zeroed() -> Self {
        Self { phase: [0; ELEMENTS_PER_FRAME], amplitude: [0; ELEMENTS_PER_FRAME] }
    }

    pub fn max_amplitude_level(&self) -> u8 {
        self.amplitude.iter().copied().max().unwrap_or(0)
    }
}

pub fn quantize_phase(phase: f64) -> u8 {
    // rem_euclid first so negative inputs land on the same grid
    ((phase.rem_euclid(TAU) / TAU * PHASE_LEVELS).round() as u32 % 256) as u8
}

pub fn quantize_drive(drive: &DriveState) -> Result<QuantizedDrive, ProtocolError> {
    if drive.len() != ELEMENTS_PER_FRAME {
        return Err(ProtocolError::DriveLength(drive.len()));
    }
    let mut q = QuantizedDrive::zeroed();
    for (j, (&p, &a)) in drive.phases().iter().zip(drive.amplitudes()).enumerate() {
        q.phase[j] = quantize_phase(p);
        q.amplitude[j] = (a.clamp(0.0, 1.0) * AMP_LEVELS).round() as u8;
    }
    Ok(q)
}

pub fn dequantize_drive(q: &QuantizedDrive) -> Result<DriveState, AcousticsError> {
    DriveState::new(
        q.phase.iter().map(|&l| f64::from(l) / PHASE_LEVELS * TAU).collect(),
        q.amplitude.iter().map(|&l| f64::from(l) / AMP_LEVELS).collect(),
    )
}
