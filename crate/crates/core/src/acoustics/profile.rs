use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::field::{field_at, Emitter};
use super::geometry::Vec3;
use super::transducer::Medium;
use super::AcousticsError;

/// |p| sampled uniformly along a straight segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineProfile {
    pub start: Vec3,
    pub end: Vec3,
    pub samples: Vec<f64>,
}

impl LineProfile {
    pub fn new(start: Vec3, end: Vec3, samples: Vec<f64>) -> Result<Self, AcousticsError> {
        if samples.len() < 3 {
            return Err(AcousticsError::InvalidProfile(format!("{} samples", samples.len())));
        }
        if !((end - start).norm() > 0.0) {
            return Err(AcousticsError::InvalidProfile("zero-length segment".into()));
        }
        Ok(Self { start, end, samples })
    }

    /// Scans `count` points of |field| from `start` to `end` inclusive.
    pub fn scan(arrays: &[Emitter<'_>], start: Vec3, end: Vec3, count: usize, medium: &Medium) -> Result<Self, AcousticsError> {
        if count < 3 {
            return Err(AcousticsError::InvalidProfile(format!("{count} samples")));
        }
        let samples = (0..count)
            .map(|i| {
                let t = i as f64 / (count - 1) as f64;
                field_at(arrays, &(start + (end - start) * t), medium).map(|p| p.norm())
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(start, end, samples)
    }

    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }

    pub fn spacing(&self) -> f64 {
        self.length() / (self.samples.len() - 1) as f64
    }

    /// Point at arc-length `offset` from `start`.
    pub fn point_at(&self, offset: f64) -> Vec3 {
        self.start + (self.end - self.start) * (offset / self.length())
    }

    fn max(&self) -> f64 {
        self.samples.iter().copied().fold(0.0, f64::max)
    }
}

/// Fraction of the profile maximum a minimum must fall below to count as a node.
pub const NODE_THRESHOLD: f64 = 0.10;

/// Pressure nodes along the profile, as arc-length offsets (m) from `start`.
///
/// A node is a sample below `NODE_THRESHOLD·max` with both neighbours higher.
/// Its position is refined by a parabola through the squared magnitudes,
/// which are locally quadratic around a zero. Candidates closer than λ/4 are
/// merged, keeping the deeper one.
pub fn find_nodes(profile: &LineProfile, medium: &Medium) -> Vec<f64> {
    let s = &profile.samples;
    let max = profile.max();
    if max <= 0.0 {
        return Vec::new();
    }
    let h = profile.spacing();
    let mut nodes: Vec<(f64, f64)> = Vec::new();
    for i in 1..s.len() - 1 {
        if !(s[i] < NODE_THRESHOLD * max && s[i] < s[i - 1] && s[i] <= s[i + 1]) {
            continue;
        }
        let (a, b, c) = (s[i - 1].powi(2), s[i].powi(2), s[i + 1].powi(2));
        let curvature = a - 2.0 * b + c;
        let delta = if curvature > 0.0 {
            (0.5 * (a - c) / curvature).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        let pos = (i as f64 + delta) * h;
        match nodes.last_mut() {
            Some(last) if pos - last.0 < medium.wavelength() / 4.0 => {
                if s[i] < last.1 {
                    *last = (pos, s[i]);
                }
            }
            _ => nodes.push((pos, s[i])),
        }
    }
    nodes.into_iter().map(|(p, _)| p).collect()
}

/// Full width at half maximum around the global peak, with linear
/// interpolation of the two half-maximum crossings.
pub fn fwhm(profile: &LineProfile) -> Result<f64, AcousticsError> {
    let s = &profile.samples;
    let peak = s
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > s[best] { i } else { best });
    if peak == 0 || peak == s.len() - 1 {
        return Err(AcousticsError::PeakAtEndpoint);
    }
    let half = s[peak] / 2.0;
    let h = profile.spacing();

    let left = (0..peak)
        .rev()
        .find(|&i| s[i] <= half)
        .ok_or(AcousticsError::TruncatedProfile { side: "left" })?;
    let right = (peak + 1..s.len())
        .find(|&i| s[i] <= half)
        .ok_or(AcousticsError::TruncatedProfile { side: "right" })?;

    let cross = |lo: usize, hi: usize| -> f64 {
        // lo/hi are adjacent samples straddling `half`
        let (va, vb) = (s[lo], s[hi]);
        let t = if (vb - va).abs() > 0.0 { (half - va) / (vb - va) } else { 0.5 };
        (lo as f64 + t * (hi as f64 - lo as f64)) * h
    };
    let x_left = cross(left, left + 1);
    let x_right = cross(right, right - 1);
    Ok(x_right - x_left)
}

/// Amplitude-modulation envelope: peak 1, trough `1 − depth`.
pub fn am_envelope(mod_frequency: f64, depth: f64, t: f64) -> f64 {
    let depth = depth.clamp(0.0, 1.0);
    (1.0 - depth * (1.0 - (TAU * mod_frequency * t).sin()) / 2.0).clamp(0.0, 1.0)
}
