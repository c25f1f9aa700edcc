use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bessel::piston_directivity;
use super::geometry::Vec3;
use super::AcousticsError;

/// Distance under which the 1/d spreading term is treated as singular.
pub const NEAR_FIELD_GUARD: f64 = 1e-6;

/// Distance at which `reference_pressure` is quoted.
pub const REFERENCE_DISTANCE: f64 = 1.0;

/// Homogeneous propagation medium at a single drive frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Medium {
    pub speed_of_sound: f64,
    pub frequency: f64,
}

impl Medium {
    pub fn new(speed_of_sound: f64, frequency: f64) -> Result<Self, AcousticsError> {
        if !(speed_of_sound > 0.0 && speed_of_sound.is_finite()) {
            return Err(AcousticsError::InvalidMedium(format!(
                "speed of sound {speed_of_sound} m/s"
            )));
        }
        if !(frequency > 0.0 && frequency.is_finite()) {
            return Err(AcousticsError::InvalidMedium(format!("frequency {frequency} Hz")));
        }
        Ok(Self {
            speed_of_sound,
            frequency,
        })
    }

    /// Air at 20 °C driven at 40 kHz.
    pub fn air_40khz() -> Self {
        Self {
            speed_of_sound: 343.0,
            frequency: 40_000.0,
        }
    }

    pub fn wavenumber(&self) -> f64 {
        TAU * self.frequency / self.speed_of_sound
    }

    pub fn wavelength(&self) -> f64 {
        self.speed_of_sound / self.frequency
    }
}

impl Default for Medium {
    fn default() -> Self {
        Self::air_40khz()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransducerElement {
    pub position: Vec3,
    pub normal: Vec3,
    /// Active piston radius (m).
    pub piston_radius: f64,
    /// Pressure amplitude (Pa) on axis at [`REFERENCE_DISTANCE`] for full drive.
    pub reference_pressure: f64,
}

impl TransducerElement {
    pub fn new(
        position: Vec3,
        normal: Vec3,
        piston_radius: f64,
        reference_pressure: f64,
    ) -> Result<Self, AcousticsError> {
        let element = Self {
            position,
            normal,
            piston_radius,
            reference_pressure,
        };
        element.validate()?;
        Ok(element)
    }

    pub fn validate(&self) -> Result<(), AcousticsError> {
        if (self.normal.norm() - 1.0).abs() > 1e-9 {
            return Err(AcousticsError::NonUnitNormal(self.normal.norm()));
        }
        if !(self.piston_radius > 0.0) {
            return Err(AcousticsError::InvalidElement(format!(
                "piston radius {}",
                self.piston_radius
            )));
        }
        if !(self.reference_pressure >= 0.0) {
            return Err(AcousticsError::InvalidElement(format!(
                "reference pressure {}",
                self.reference_pressure
            )));
        }
        Ok(())
    }

    /// Directivity factor toward `point`.
    pub fn directivity_toward(&self, point: &Vec3, medium: &Medium) -> f64 {
        let diff = point - self.position;
        let sin_theta = self.normal.cross(&diff).norm() / diff.norm();
        piston_directivity(medium.wavenumber() * self.piston_radius * sin_theta)
    }
}

/// Complex pressure radiated by one baffled piston:
/// `P0·A·(d_ref/d)·D(θ)·exp(i(k·d + φ))`.
pub fn piston_pressure(
    element: &TransducerElement,
    phase: f64,
    amplitude: f64,
    point: &Vec3,
    medium: &Medium,
) -> Result<Complex64, AcousticsError> {
    let diff = point - element.position;
    let dist = diff.norm();
    if dist < NEAR_FIELD_GUARD {
        return Err(AcousticsError::NearField { distance: dist });
    }
    let sin_theta = element.normal.cross(&diff).norm() / dist;
    let k = medium.wavenumber();
    let directivity = piston_directivity(k * element.piston_radius * sin_theta);
    let magnitude = element.reference_pressure * amplitude * (REFERENCE_DISTANCE / dist) * directivity;
    Ok(Complex64::from_polar(magnitude, k * dist + phase))
}
