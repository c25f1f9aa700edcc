use serde::{Deserialize, Serialize};

use super::kinematics::PlanarPose;

/// Sensor bearings relative to the heading, left positive.
pub const IR_BEARINGS_DEG: [f64; 5] = [-70.0, -35.0, 0.0, 35.0, 70.0];

/// Circular obstacle on the table, usually another robot's body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disc {
    pub x: f64,
    pub y: f64,
    pub radius: f64,
}

/// Axis-aligned table extent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Bounds {
    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.min[0]..=self.max[0]).contains(&x) && (self.min[1]..=self.max[1]).contains(&y)
    }

    /// Distance from an inside point along a unit direction to the boundary.
    fn exit_distance(&self, x: f64, y: f64, dx: f64, dy: f64) -> f64 {
        let along = |p: f64, d: f64, lo: f64, hi: f64| {
            if d > 0.0 {
                (hi - p) / d
            } else if d < 0.0 {
                (lo - p) / d
            } else {
                f64::INFINITY
            }
        };
        along(x, dx, self.min[0], self.max[0]).min(along(y, dy, self.min[1], self.max[1]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IrParams {
    pub max_range: f64,
}

impl Default for IrParams {
    fn default() -> Self {
        Self { max_range: 0.15 }
    }
}

/// Ranges in metres along each of [`IR_BEARINGS_DEG`]; `None` is no detection.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IrReading {
    pub ranges: [Option<f64>; 5],
}

impl IrReading {
    pub fn clear() -> Self {
        Self::default()
    }

    /// Nearest detection as (range, bearing in rad).
    pub fn nearest(&self) -> Option<(f64, f64)> {
        self.ranges
            .iter()
            .zip(IR_BEARINGS_DEG)
            .filter_map(|(r, b)| r.map(|r| (r, b.to_radians())))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    }
}

fn ray_disc(ox: f64, oy: f64, dx: f64, dy: f64, disc: &Disc) -> Option<f64> {
    let (mx, my) = (ox - disc.x, oy - disc.y);
    let b = mx * dx + my * dy;
    let c = mx * mx + my * my - disc.radius * disc.radius;
    if c > 0.0 && b > 0.0 {
        return None;
    }
    let disc_sq = b * b - c;
    if disc_sq < 0.0 {
        return None;
    }
    // origin inside the disc reads as touching
    Some((-b - disc_sq.sqrt()).max(1e-6))
}

/// Cast the five rays from the robot centre against discs and the table edge.
pub fn ir_scan(pose: &PlanarPose, obstacles: &[Disc], bounds: Option<&Bounds>, params: &IrParams) -> IrReading {
    let mut reading = IrReading::clear();
    for (slot, bearing) in reading.ranges.iter_mut().zip(IR_BEARINGS_DEG) {
        let (dy, dx) = (pose.yaw + bearing.to_radians()).sin_cos();
        let mut best = bounds.map_or(f64::INFINITY, |b| b.exit_distance(pose.x, pose.y, dx, dy));
        for disc in obstacles {
            if let Some(t) = ray_disc(pose.x, pose.y, dx, dy, disc) {
                best = best.min(t);
            }
        }
        if best <= params.max_range {
            *slot = Some(best.max(1e-6));
        }
    }
    reading
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AvoidParams {
    pub stop_distance: f64,
    pub slow_distance: f64,
    pub max_wheel_speed: f64,
}

impl Default for AvoidParams {
    fn default() -> Self {
        Self { stop_distance: 0.05, slow_distance: 0.10, max_wheel_speed: 0.15 }
    }
}

/// Reflex filter on a wheel command.
///
/// Stops inside `stop_distance`, and inside `slow_distance` scales forward
/// speed down in proportion and biases the turn away from the nearest ray.
/// The output never moves forward faster than the input.
pub fn avoid(reading: &IrReading, commanded: (f64, f64), params: &AvoidParams) -> (f64, f64) {
    let Some((range, bearing)) = reading.nearest() else {
        return commanded;
    };
    if range < params.stop_distance {
        return (0.0, 0.0);
    }
    if range >= params.slow_distance {
        return commanded;
    }
    let (vl, vr) = commanded;
    let forward = 0.5 * (vl + vr);
    let turn = 0.5 * (vr - vl);
    let max = params.max_wheel_speed;
    let scaled = if forward > 0.0 { forward * range / params.slow_distance } else { forward };
    let scaled = scaled.clamp(-max, max);
    // obstacle on the left (bearing ≥ 0) → turn right, which is negative
    let away = if bearing >= 0.0 { -1.0 } else { 1.0 };
    let urgency = 1.0 - range / params.slow_distance;
    let headroom = max - scaled.abs();
    let turn = (turn + away * urgency * 0.5 * max).clamp(-headroom, headroom);
    (scaled - turn, scaled + turn)
}
