use serde::{Deserialize, Serialize};

use crate::acoustics::Vec3;
use crate::control::{ContentSpec, Modality, ServerConfig, StationGeometry, Tolerances};
use crate::robot::{BotKind, Bounds, FirmwareConfig, HingeNoise, PlanarPose, WaypointParams};

use super::classifier::ClassifierThresholds;
use super::SimError;

/// Run parameters shared by every scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Step, s.
    pub dt: f64,
    /// Simulated time limit, s.
    pub duration: f64,
    pub seed: u64,
    pub latency_ms: f64,
    pub jitter_ms: f64,
    pub loss: f64,
    /// Tracker noise per planar axis, m.
    pub tracker_sigma_pos: f64,
    pub tracker_sigma_yaw_deg: f64,
    pub tracker_rate_hz: f64,
    pub bounds: Bounds,
    /// Bead descent speed, m/s.
    pub bead_fall_speed: f64,
    pub classifier: ClassifierThresholds,
    /// Draw hinge actuation errors at their measured magnitudes.
    pub hinge_noise: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            duration: 60.0,
            seed: 0,
            latency_ms: 0.0,
            jitter_ms: 0.0,
            loss: 0.0,
            tracker_sigma_pos: 0.0,
            tracker_sigma_yaw_deg: 0.0,
            tracker_rate_hz: 100.0,
            bounds: Bounds { min: [-1.0, -1.0], max: [1.0, 1.0] },
            bead_fall_speed: 0.5,
            classifier: ClassifierThresholds::default(),
            hinge_noise: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |what: &str| Err(SimError::Config(what.to_string()));
        if !(self.dt > 0.0 && self.dt.is_finite()) || (self.dt * 1e6).round() < 1.0 {
            return bad("dt must be a positive number of whole microseconds");
        }
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return bad("duration must be ≥ 0");
        }
        if !(0.0..=1.0).contains(&self.loss) {
            return bad("loss must lie in [0, 1]");
        }
        if !(self.latency_ms >= 0.0 && self.jitter_ms >= 0.0) {
            return bad("latency and jitter must be ≥ 0");
        }
        if !(self.tracker_sigma_pos >= 0.0 && self.tracker_sigma_yaw_deg >= 0.0) {
            return bad("tracker noise must be ≥ 0");
        }
        if !(self.tracker_rate_hz > 0.0) {
            return bad("tracker rate must be positive");
        }
        if !(self.bead_fall_speed > 0.0) {
            return bad("bead fall speed must be positive");
        }
        let b = &self.bounds;
        if !(b.min[0] < b.max[0] && b.min[1] < b.max[1]) {
            return bad("workspace bounds are empty");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    S1Haptics,
    S2Audio,
    S3Levitation,
}

impl ScenarioKind {
    pub fn modality(self) -> Modality {
        match self {
            Self::S1Haptics => Modality::Haptic,
            Self::S2Audio => Modality::Audio,
            Self::S3Levitation => Modality::Levitation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RosterEntry {
    pub id: u8,
    pub kind: BotKind,
    /// Start pose `[x, y, yaw]` in metres and radians.
    pub pose: [f64; 3],
}

impl RosterEntry {
    pub fn planar(&self) -> PlanarPose {
        PlanarPose::new(self.pose[0], self.pose[1], self.pose[2])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Waypoint {
    pub t: f64,
    pub position: [f64; 3],
}

/// Piecewise-linear path through timestamped waypoints, held at the ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trajectory {
    pub waypoints: Vec<Waypoint>,
}

impl Trajectory {
    pub fn fixed(p: Vec3) -> Self {
        Self { waypoints: vec![Waypoint { t: 0.0, position: [p.x, p.y, p.z] }] }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.waypoints.is_empty() {
            return Err(SimError::Config("trajectory without waypoints".into()));
        }
        if self.waypoints.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(SimError::Config("trajectory timestamps must increase".into()));
        }
        Ok(())
    }

    pub fn at(&self, t: f64) -> Vec3 {
        let v = |w: &Waypoint| Vec3::from(w.position);
        let w = &self.waypoints;
        let i = w.partition_point(|p| p.t <= t);
        if i == 0 {
            return v(&w[0]);
        }
        if i == w.len() {
            return v(&w[i - 1]);
        }
        let (a, b) = (&w[i - 1], &w[i]);
        let s = (t - a.t) / (b.t - a.t);
        v(a) + (v(b) - v(a)) * s
    }
}

/// Bead errors to use instead of the measured ones, for replaying recorded
/// outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcedDropError {
    pub dz_cm: f64,
    pub dpsi_deg: f64,
}

/// Pass/fail limits for the tracking scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerdictLimits {
    /// Following must be reached by this time, s.
    pub follow_deadline: f64,
    /// Largest planar error tolerated once Following, m.
    pub follow_error: f64,
}

impl Default for VerdictLimits {
    fn default() -> Self {
        Self { follow_deadline: 30.0, follow_error: 0.02 }
    }
}

/// Everything that defines one run besides the seed. `sim` may be omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    pub roster: Vec<RosterEntry>,
    /// One trajectory per hand (s1) or the listener's ear (s2).
    #[serde(default)]
    pub targets: Vec<Trajectory>,
    /// Modulation and trap; the modality must match `kind`.
    pub content: ContentSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub geometry: StationGeometry,
    #[serde(default)]
    pub verdict: VerdictLimits,
    #[serde(default)]
    pub forced_drop_error: Option<ForcedDropError>,
    #[serde(default)]
    pub sim: SimConfig,
}

impl ScenarioSpec {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let spec: Self = serde_json::from_str(text).map_err(|e| SimError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        self.sim.validate()?;
        if self.content.modality != self.kind.modality() {
            return Err(SimError::Config(format!(
                "content modality {:?} does not match scenario {:?}",
                self.content.modality, self.kind
            )));
        }
        for t in &self.targets {
            t.validate()?;
        }
        let mut ids: Vec<u8> = self.roster.iter().map(|r| r.id).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(SimError::Config("duplicate bot ids in roster".into()));
        }
        let b = &self.sim.bounds;
        for t in &self.targets {
            for w in &t.waypoints {
                if !b.contains(w.position[0], w.position[1]) {
                    return Err(SimError::Config(format!("target waypoint {:?} outside the workspace", w.position)));
                }
            }
        }
        if let Some(trap) = self.content.trap {
            if !b.contains(trap.x, trap.y) {
                return Err(SimError::Config("trap outside the workspace".into()));
            }
        }
        Ok(())
    }

    /// Roster minimum for the scenario kind; checked before stepping.
    pub fn check_roster(&self) -> Result<(), SimError> {
        let count = |k: BotKind| self.roster.iter().filter(|r| r.kind == k).count();
        let (acousto, dispensers) = (count(BotKind::Acousto), count(BotKind::Dispenser));
        let (need_acousto, need_dispenser, need_targets) = match self.kind {
            ScenarioKind::S1Haptics => (1, 0, 1),
            ScenarioKind::S2Audio => (2, 0, 1),
            ScenarioKind::S3Levitation => (2, 1, 0),
        };
        if acousto < need_acousto || dispensers < need_dispenser || self.targets.len() < need_targets {
            return Err(SimError::RosterShortfall(format!(
                "{:?} needs {need_acousto} acousto, {need_dispenser} dispenser, {need_targets} targets; \
                 got {acousto}, {dispensers}, {}",
                self.kind,
                self.targets.len()
            )));
        }
        if self.kind == ScenarioKind::S2Audio && self.targets.len() != 1 {
            return Err(SimError::RosterShortfall("s2 takes exactly one ear trajectory".into()));
        }
        Ok(())
    }

    /// Content with the targets' start positions filled in.
    pub fn content_at_start(&self) -> ContentSpec {
        ContentSpec { targets: self.targets.iter().map(|t| t.at(0.0)).collect(), ..self.content.clone() }
    }

    pub fn server_config(&self) -> ServerConfig {
        ServerConfig {
            tolerances: self.tolerances,
            geometry: self.geometry,
            bounds: self.sim.bounds,
            ..ServerConfig::default()
        }
    }

    pub fn firmware_config(&self, kind: BotKind) -> FirmwareConfig {
        let hinge_noise = if self.sim.hinge_noise { HingeNoise::default() } else { HingeNoise::none() };
        let waypoint = match kind {
            // the chute has to settle well inside the dispenser tolerance
            BotKind::Dispenser => WaypointParams { arrival_radius: 0.5 * self.tolerances.dispenser_pos_tol, ..Default::default() },
            BotKind::Acousto => WaypointParams::default(),
        };
        FirmwareConfig { hinge_noise, waypoint, ..FirmwareConfig::default() }
    }
}
