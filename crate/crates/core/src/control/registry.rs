use std::collections::BTreeMap;

use crate::acoustics::wrap_angle;
use crate::robot::{BotKind, PlanarPose};

/// Tracker observations of target `i` carry source id `TARGET_SOURCE_BASE + i`.
pub const TARGET_SOURCE_BASE: u8 = 100;
/// Header id used by the tracker client.
pub const TRACKER_CLIENT_ID: u8 = 0xFE;
/// Weight of each new observation in the smoothed pose.
pub const POSE_SMOOTHING: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackedPose {
    pub pose: PlanarPose,
    pub z: f64,
    /// Tracker timestamp, s.
    pub stamp: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BotEntry {
    pub kind: BotKind,
    pub pose: Option<TrackedPose>,
    /// Exponential average of observed poses, for decisions that need more
    /// precision than one noisy fix gives.
    pub smoothed: Option<PlanarPose>,
    /// Hinge angle confirmed by the bot's last ack, degrees.
    pub hinge_deg: f64,
    pub last_command_seq: Option<u16>,
    /// Server clock when the last observation arrived, s.
    pub last_seen: Option<f64>,
}

/// Everything the server knows about each bot, keyed by bot id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BotRegistry {
    bots: BTreeMap<u8, BotEntry>,
}

impl BotRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false if `id` is already registered.
    pub fn register(&mut self, id: u8, kind: BotKind) -> bool {
        if self.bots.contains_key(&id) {
            return false;
        }
        self.bots.insert(id, BotEntry { kind, pose: None, smoothed: None, hinge_deg: 0.0, last_command_seq: None, last_seen: None });
        true
    }

    pub fn get(&self, id: u8) -> Option<&BotEntry> {
        self.bots.get(&id)
    }

    pub fn get_mut(&mut self, id: u8) -> Option<&mut BotEntry> {
        self.bots.get_mut(&id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u8, &BotEntry)> {
        self.bots.iter().map(|(id, e)| (*id, e))
    }

    pub fn ids_of(&self, kind: BotKind) -> Vec<u8> {
        self.iter().filter(|(_, e)| e.kind == kind).map(|(id, _)| id).collect()
    }

    /// Record an observation. Out-of-order stamps are ignored so poses stay
    /// monotone per bot.
    pub fn observe(&mut self, id: u8, pose: TrackedPose, now: f64) -> bool {
        let Some(entry) = self.bots.get_mut(&id) else {
            return false;
        };
        if entry.pose.is_some_and(|p| p.stamp > pose.stamp) {
            return false;
        }
        entry.smoothed = Some(match entry.smoothed {
            None => pose.pose,
            Some(s) => PlanarPose::new(
                s.x + POSE_SMOOTHING * (pose.pose.x - s.x),
                s.y + POSE_SMOOTHING * (pose.pose.y - s.y),
                s.yaw + POSE_SMOOTHING * wrap_angle(pose.pose.yaw - s.yaw),
            ),
        });
        entry.pose = Some(pose);
        entry.last_seen = Some(now);
        true
    }

    pub fn pose(&self, id: u8) -> Option<PlanarPose> {
        self.bots.get(&id).and_then(|e| e.pose).map(|p| p.pose)
    }

    pub fn smoothed_pose(&self, id: u8) -> Option<PlanarPose> {
        self.bots.get(&id).and_then(|e| e.smoothed)
    }

    pub fn is_fresh(&self, id: u8, now: f64, staleness: f64) -> bool {
        self.bots.get(&id).and_then(|e| e.last_seen).is_some_and(|t| now - t <= staleness)
    }
}
