use crate::acoustics::{
    am_envelope, focus_phases, levitation_signature, multipoint_solve, DriveState, Medium, PhasedArrayModel, Vec3,
};
use crate::protocol::{quantize_drive, QuantizedDrive};

use super::content::{ContentSpec, Modality};
use super::ControlError;

/// One bot's board as the server believes it to be, with the point it
/// should render.
#[derive(Debug, Clone)]
pub struct BoardState {
    pub bot: u8,
    pub array: PhasedArrayModel,
    pub focus: Vec3,
}

fn quantized(bot: u8, drive: &DriveState) -> Result<(u8, QuantizedDrive), ControlError> {
    quantize_drive(drive)
        .map(|q| (bot, q))
        .map_err(|e| ControlError::InvalidContent(format!("bot {bot}: {e}")))
}

fn acoustic(bot: u8) -> impl Fn(crate::acoustics::AcousticsError) -> ControlError {
    move |source| ControlError::Acoustics { bot, source }
}

/// Quantized drives for every board at time `t`, in input order.
///
/// Haptic boards each focus their own point. Audio boards are solved
/// jointly for the shared point. Levitation takes exactly two boards and
/// plays the trap signature with the lower bot id as the reference board.
pub fn compute_frames(
    boards: &[BoardState],
    spec: &ContentSpec,
    t: f64,
    medium: &Medium,
    iterations: usize,
) -> Result<Vec<(u8, QuantizedDrive)>, ControlError> {
    let envelope = am_envelope(spec.modulation.frequency, spec.modulation.depth, t);
    match spec.modality {
        Modality::Haptic => boards
            .iter()
            .map(|b| {
                let drive = focus_phases(&b.array, &b.focus, medium).map_err(acoustic(b.bot))?;
                quantized(b.bot, &drive.with_amplitude_scale(envelope))
            })
            .collect(),
        Modality::Audio => {
            let Some(first) = boards.first() else {
                return Ok(Vec::new());
            };
            let arrays: Vec<&PhasedArrayModel> = boards.iter().map(|b| &b.array).collect();
            let solution = multipoint_solve(&arrays, &[first.focus], iterations, medium).map_err(acoustic(first.bot))?;
            boards
                .iter()
                .zip(&solution.drives)
                .map(|(b, d)| quantized(b.bot, &d.with_amplitude_scale(envelope)))
                .collect()
        }
        Modality::Levitation => {
            let [x, y] = boards else {
                return Err(ControlError::Unpaired(format!("{} boards", boards.len())));
            };
            let (a, b) = if x.bot < y.bot { (x, y) } else { (y, x) };
            let (da, db) = levitation_signature(&a.array, &b.array, &a.focus, medium).map_err(acoustic(a.bot))?;
            let frames = [quantized(a.bot, &da)?, quantized(b.bot, &db)?];
            // keep input order
            Ok(if x.bot < y.bot { frames.to_vec() } else { vec![frames[1].clone(), frames[0].clone()] })
        }
    }
}
