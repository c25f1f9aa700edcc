use serde::{Deserialize, Serialize};

use crate::acoustics::Vec3;

use super::hinge::STEPS_PER_REVOLUTION;

pub const BEADS_PER_REVOLUTION: u32 = 4;
pub const STEPS_PER_BEAD: u32 = STEPS_PER_REVOLUTION / BEADS_PER_REVOLUTION;

/// Carousel feeder: each quarter turn drops one bead from the hopper out of
/// the chute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DispenserModel {
    pub carousel_steps: u64,
    pub hopper_count: u32,
    pub emitted: u32,
    /// Steps queued but not yet run by the motor.
    pending_steps: u32,
    step_credit_millis: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispenseOutcome {
    pub steps: u32,
    pub emitted: Vec<Vec3>,
}

impl DispenserModel {
    pub fn new(hopper_count: u32) -> Self {
        Self { carousel_steps: 0, hopper_count, emitted: 0, pending_steps: 0, step_credit_millis: 0 }
    }

    pub fn is_idle(&self) -> bool {
        self.pending_steps == 0
    }

    /// Beads not yet reserved by queued motion. Requests queue whole
    /// quarter turns, so carousel phase plus pending steps is always a
    /// whole number of beads, including the one partway out.
    fn available(&self) -> u32 {
        let phase = (self.carousel_steps % u64::from(STEPS_PER_BEAD)) as u32;
        self.hopper_count - (phase + self.pending_steps) / STEPS_PER_BEAD
    }

    /// Queue quarter turns for up to `beads` beads; returns how many were
    /// accepted given the hopper.
    pub fn request(&mut self, beads: u32) -> u32 {
        let n = beads.min(self.available());
        self.pending_steps += n * STEPS_PER_BEAD;
        n
    }

    /// Run the motor for `dt` seconds at `rate` steps/s. Returns the number
    /// of beads that left the chute.
    pub fn tick(&mut self, dt: f64, rate: f64) -> u32 {
        if self.pending_steps == 0 {
            return 0;
        }
        // integer milli-step credit keeps the schedule exact across ticks
        self.step_credit_millis += (rate * dt * 1000.0).round() as u64;
        let whole = (self.step_credit_millis / 1000).min(u64::from(self.pending_steps)) as u32;
        self.step_credit_millis -= u64::from(whole) * 1000;
        self.run(whole)
    }

    fn run(&mut self, steps: u32) -> u32 {
        let before = self.carousel_steps / u64::from(STEPS_PER_BEAD);
        self.carousel_steps += u64::from(steps);
        self.pending_steps -= steps;
        if self.pending_steps == 0 {
            self.step_credit_millis = 0;
        }
        let drops = (self.carousel_steps / u64::from(STEPS_PER_BEAD) - before) as u32;
        self.hopper_count -= drops;
        self.emitted += drops;
        drops
    }
}

/// Run the carousel through enough quarter turns for `beads` beads at once.
pub fn dispenser_advance(model: &mut DispenserModel, beads: u32, chute_exit: Vec3) -> DispenseOutcome {
    let accepted = model.request(beads);
    let steps = accepted * STEPS_PER_BEAD;
    let drops = model.run(steps);
    DispenseOutcome { steps, emitted: vec![chute_exit; drops as usize] }
}
