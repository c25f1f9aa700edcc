use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::array::{DriveState, PhasedArrayModel};
use super::geometry::Vec3;
use super::transducer::{piston_pressure, Medium};
use super::AcousticsError;

/// A board together with the drive it is currently playing.
pub type Emitter<'a> = (&'a PhasedArrayModel, &'a DriveState);

/// Superposed complex pressure from every element of every board.
pub fn field_at(arrays: &[Emitter<'_>], point: &Vec3, medium: &Medium) -> Result<Complex64, AcousticsError> {
    let mut total = Complex64::new(0.0, 0.0);
    for (array, drive) in arrays {
        if array.len() != drive.len() {
            return Err(AcousticsError::DriveLength {
                expected: array.len(),
                actual: drive.len(),
            });
        }
        for ((element, &phase), &amp) in array
            .elements()
            .iter()
            .zip(drive.phases())
            .zip(drive.amplitudes())
        {
            total += piston_pressure(element, phase, amp, point, medium)?;
        }
    }
    Ok(total)
}

/// Planar sampling lattice. Point `(i, j)` is `origin + i·res·axis_u + j·res·axis_v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin: Vec3,
    pub axis_u: Vec3,
    pub axis_v: Vec3,
    pub resolution: f64,
    pub nu: usize,
    pub nv: usize,
}

impl GridSpec {
    /// Grid of `nu × nv` points centred on `center`.
    pub fn centered(center: Vec3, axis_u: Vec3, axis_v: Vec3, resolution: f64, nu: usize, nv: usize) -> Self {
        let half_u = (nu.max(1) as f64 - 1.0) / 2.0 * resolution;
        let half_v = (nv.max(1) as f64 - 1.0) / 2.0 * resolution;
        Self {
            origin: center - axis_u * half_u - axis_v * half_v,
            axis_u,
            axis_v,
            resolution,
            nu,
            nv,
        }
    }

    pub fn validate(&self) -> Result<(), AcousticsError> {
        if self.nu == 0 || self.nv == 0 {
            return Err(AcousticsError::InvalidGrid(format!("{}×{} points", self.nu, self.nv)));
        }
        if !(self.resolution > 0.0) {
            return Err(AcousticsError::InvalidGrid(format!("resolution {}", self.resolution)));
        }
        let u = self.axis_u;
        let v = self.axis_v;
        if (u.norm() - 1.0).abs() > 1e-9 || (v.norm() - 1.0).abs() > 1e-9 || u.dot(&v).abs() > 1e-9 {
            return Err(AcousticsError::InvalidGrid("axes are not orthonormal".into()));
        }
        Ok(())
    }

    pub fn point(&self, i: usize, j: usize) -> Vec3 {
        self.origin + self.axis_u * (i as f64 * self.resolution) + self.axis_v * (j as f64 * self.resolution)
    }
}

/// Sampled complex pressure, row-major: `samples[j * nu + i]` (rows run along `axis_v`).
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub spec: GridSpec,
    pub samples: Vec<Complex64>,
}

impl FieldGrid {
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.samples[j * self.spec.nu + i]
    }

    /// `(i, j)` of the largest |p|; first occurrence in row-major order wins.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (idx, s) in self.samples.iter().enumerate() {
            if s.norm() > self.samples[best].norm() {
                best = idx;
            }
        }
        (best % self.spec.nu, best / self.spec.nu)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    /// CSV with header `x,y,z,re,im,abs`, one lattice point per line in row-major order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x,y,z,re,im,abs")?;
        for j in 0..self.spec.nv {
            for i in 0..self.spec.nu {
                let p = self.spec.point(i, j);
                let s = self.at(i, j);
                writeln!(out, "{:.9},{:.9},{:.9},{:.9},{:.9},{:.9}", p.x, p.y, p.z, s.re, s.im, s.norm())?;
            }
        }
        Ok(())
    }

    /// Plain PGM (P2), 16-bit, |p| scaled linearly so the grid maximum maps to 65535.
    pub fn write_pgm<W: Write>(&self, mut out: W) -> io::Result<()> {
        let max = self.max_abs();
        writeln!(out, "P2")?;
        writeln!(out, "{} {}", self.spec.nu, self.spec.nv)?;
        writeln!(out, "65535")?;
        for j in 0..self.spec.nv {
            let row: Vec<String> = (0..self.spec.nu)
                .map(|i| {
                    let level = if max > 0.0 {
                        (self.at(i, j).norm() / max * 65535.0).round() as u32
                    } else {
                        0
                    };
                    level.to_string()
                })
                .collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Evaluates `field_at` on every lattice point. Rows are computed in
/// parallel; each sample depends only on its own point so the result does
/// not depend on scheduling.
pub fn sample_grid(arrays: &[Emitter<'_>], spec: &GridSpec, medium: &Medium) -> Result<FieldGrid, AcousticsError> {
    spec.validate()?;
    let rows: Result<Vec<Vec<Complex64>>, AcousticsError> = (0..spec.nv)
        .into_par_iter()
        .map(|j| {
            (0..spec.nu)
                .map(|i| field_at(arrays, &spec.point(i, j), medium))
                .collect()
        })
        .collect();
    Ok(FieldGrid {
        spec: *spec,
        samples: rows?.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acoustics::{focus_phases, ArrayConfig, Pose, TransducerElement};
    use approx::assert_relative_eq;

    #[test]
    fn empty_scene_is_silent() {
        let p = field_at(&[], &Vec3::new(0.0, 0.0, 0.1), &Medium::default()).unwrap();
        assert_eq!(p, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn colocated_elements_double() {
        let m = Medium::default();
        let tpl = TransducerElement::new(Vec3::zeros(), Vec3::z(), 4.5e-3, 2.0).unwrap();
        let one = crate::acoustics::build_array(1, 1, 0.01, Pose::identity(), tpl).unwrap();
        let drive = DriveState::uniform(1);
        let q = Vec3::new(0.01, 0.02, 0.07);
        let single = field_at(&[(&one, &drive)], &q, &m).unwrap();
        let double = field_at(&[(&one, &drive), (&one, &drive)], &q, &m).unwrap();
        assert_relative_eq!(double.re, 2.0 * single.re, max_relative = 1e-14);
        assert_relative_eq!(double.im, 2.0 * single.im, max_relative = 1e-14);
    }

    #[test]
    fn mismatched_drive_rejected() {
        let array = ArrayConfig::default().build(Pose::identity()).unwrap();
        let drive = DriveState::uniform(3);
        assert!(matches!(
            field_at(&[(&array, &drive)], &Vec3::new(0.0, 0.0, 0.05), &Medium::default()),
            Err(AcousticsError::DriveLength { .. })
        ));
    }

    #[test]
    fn one_by_one_grid_matches_field_at() {
        let m = Medium::default();
        let array = ArrayConfig::default().build(Pose::identity()).unwrap();
        let focus = Vec3::new(0.0, 0.0, 0.05);
        let drive = focus_phases(&array, &focus, &m).unwrap();
        let spec = GridSpec::centered(focus, Vec3::x(), Vec3::y(), 1e-3, 1, 1);
        let grid = sample_grid(&[(&array, &drive)], &spec, &m).unwrap();
        assert_eq!(grid.samples.len(), 1);
        assert_eq!(grid.samples[0], field_at(&[(&array, &drive)], &focus, &m).unwrap());
    }

    #[test]
    fn zero_area_and_skewed_axes_rejected() {
        let m = Medium::default();
        let mut spec = GridSpec::centered(Vec3::zeros(), Vec3::x(), Vec3::y(), 1e-3, 0, 4);
        assert!(sample_grid(&[], &spec, &m).is_err());
        spec.nu = 4;
        spec.axis_v = Vec3::new(0.6, 0.8, 0.0);
        assert!(sample_grid(&[], &spec, &m).is_err());
    }

    #[test]
    fn csv_and_pgm_shapes() {
        let m = Medium::default();
        let array = ArrayConfig::default().build(Pose::identity()).unwrap();
        let drive = DriveState::uniform(64);
        let spec = GridSpec::centered(Vec3::new(0.0, 0.0, 0.05), Vec3::x(), Vec3::y(), 1e-3, 3, 2);
        let grid = sample_grid(&[(&array, &drive)], &spec, &m).unwrap();
        let mut csv = Vec::new();
        grid.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,y,z,re,im,abs");
        assert_eq!(lines.len(), 7);
        let mut pgm = Vec::new();
        grid.write_pgm(&mut pgm).unwrap();
        let text = String::from_utf8(pgm).unwrap();
        assert!(text.starts_with("P2\n3 2\n65535\n"));
        assert!(text.contains("65535 ") || text.trim_end().ends_with("65535"));
    }
}
