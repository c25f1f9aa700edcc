use serde::{Deserialize, Serialize};

/// Capture window for a dispensed bead. The defaults separate the recorded
/// hand-off outcomes exactly; they are a fit to data, not a physical bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifierThresholds {
    pub max_drop_error_cm: f64,
    pub max_yaw_error_deg: f64,
}

impl Default for ClassifierThresholds {
    fn default() -> Self {
        Self { max_drop_error_cm: 0.43, max_yaw_error_deg: 1.05 }
    }
}

/// True iff a bead released with these errors ends up held in the trap.
pub fn levitation_classifier(drop_error_cm: f64, yaw_error_deg: f64, limits: &ClassifierThresholds) -> bool {
    drop_error_cm.abs() <= limits.max_drop_error_cm && yaw_error_deg.abs() <= limits.max_yaw_error_deg
}
