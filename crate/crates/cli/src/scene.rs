use std::path::Path;

use serde::Deserialize;
use swarmpat::acoustics::{focus_phases, ArrayConfig, DriveState, GridSpec, Medium, PhasedArrayModel, Pose, Vec3};

use crate::error::{parse_error, CliError};

/// Static arrangement of boards for field maps and solver runs.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    #[serde(default = "Medium::air_40khz")]
    pub medium: Medium,
    /// Board build parameters; the calibrated 8×8 board when absent.
    #[serde(default)]
    pub array: Option<ArrayConfig>,
    #[serde(default)]
    pub boards: Vec<BoardSpec>,
    #[serde(default)]
    pub grid: GridWindow,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoardSpec {
    pub position: [f64; 3],
    #[serde(default)]
    pub yaw_deg: f64,
    /// Tilt of the board normal from vertical, 0..=90.
    #[serde(default)]
    pub pitch_deg: f64,
    /// Focal point for field maps; the board plays in phase when absent.
    #[serde(default)]
    pub focus: Option<[f64; 3]>,
}

/// Square sampling window for field maps.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridWindow {
    /// Window centre; the mean focal point, or the origin, when absent.
    pub center: Option<[f64; 3]>,
    /// Half side length in metres; 20 mm when absent.
    pub half_width: Option<f64>,
}

const DEFAULT_HALF_WIDTH: f64 = 0.02;

impl SceneConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| parse_error(path, &e))
    }

    pub fn array_config(&self) -> ArrayConfig {
        self.array.unwrap_or_else(|| ArrayConfig::calibrated(&self.medium))
    }

    pub fn build(&self) -> Result<Vec<PhasedArrayModel>, CliError> {
        let config = self.array_config();
        self.boards
            .iter()
            .map(|b| {
                let pose = Pose::new(Vec3::from(b.position), b.yaw_deg.to_radians(), b.pitch_deg.to_radians())?;
                Ok(config.build(pose)?)
            })
            .collect()
    }

    /// Drive per board: focused on its focal point, else in phase.
    pub fn drives(&self, arrays: &[PhasedArrayModel]) -> Result<Vec<DriveState>, CliError> {
        arrays
            .iter()
            .zip(&self.boards)
            .map(|(array, b)| match b.focus {
                Some(f) => Ok(focus_phases(array, &Vec3::from(f), &self.medium)?),
                None => Ok(DriveState::uniform(array.len())),
            })
            .collect()
    }

    fn window_center(&self) -> Vec3 {
        if let Some(c) = self.grid.center {
            return Vec3::from(c);
        }
        let foci: Vec<Vec3> = self.boards.iter().filter_map(|b| b.focus.map(Vec3::from)).collect();
        if foci.is_empty() {
            Vec3::zeros()
        } else {
            foci.iter().sum::<Vec3>() / foci.len() as f64
        }
    }

    pub fn grid(&self, plane: &PlaneSpec, resolution: f64) -> Result<GridSpec, CliError> {
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(CliError::Config(format!("resolution {resolution} must be positive")));
        }
        let half = self.grid.half_width.unwrap_or(DEFAULT_HALF_WIDTH);
        if !(half > 0.0 && half.is_finite()) {
            return Err(CliError::Config(format!("grid half width {half} must be positive")));
        }
        let mut center = self.window_center();
        center[plane.normal_axis] = plane.offset;
        let (u, v) = plane.axes();
        let n = (2.0 * half / resolution).round() as usize + 1;
        Ok(GridSpec::centered(center, u, v, resolution, n, n))
    }
}

/// A lattice plane such as `xz@0.0`: two in-plane axes and the offset
/// along the third.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneSpec {
    pub in_plane: (usize, usize),
    pub normal_axis: usize,
    pub offset: f64,
}

impl PlaneSpec {
    fn axes(&self) -> (Vec3, Vec3) {
        let unit = |i: usize| {
            let mut v = Vec3::zeros();
            v[i] = 1.0;
            v
        };
        (unit(self.in_plane.0), unit(self.in_plane.1))
    }
}

impl std::str::FromStr for PlaneSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (axes, offset) = s.split_once('@').unwrap_or((s, "0"));
        let (in_plane, normal_axis) = match axes {
            "xy" => ((0, 1), 2),
            "xz" => ((0, 2), 1),
            "yz" => ((1, 2), 0),
            _ => return Err(format!("plane `{axes}` is not one of xy, xz, yz")),
        };
        let offset: f64 = offset.parse().map_err(|_| format!("plane offset `{offset}` is not a number"))?;
        Ok(Self { in_plane, normal_axis, offset })
    }
}

/// Parse `x,y,z;x,y,z;...` in metres.
pub fn parse_targets(s: &str) -> Result<Vec<Vec3>, CliError> {
    s.split(';')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            let c: Vec<f64> = t
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::Config(format!("target `{t}` is not x,y,z")))?;
            match c[..] {
                [x, y, z] if c.iter().all(|v| v.is_finite()) => Ok(Vec3::new(x, y, z)),
                _ => Err(CliError::Config(format!("target `{t}` is not x,y,z"))),
            }
        })
        .collect()
}
