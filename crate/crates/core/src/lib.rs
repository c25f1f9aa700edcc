//! Simulator and control stack for a swarm of mobile phased-array robots.
//!
//! * [`acoustics`] computes pressure fields, focusing drives and levitation traps.
//! * [`protocol`] is the binary wire format spoken between server and bots.
//! * [`robot`] models the bots: wheels, controllers, hinge, dispenser, IR.
//! * [`control`] is the central swarm server and its scenario state machines.
//! * [`sim`] runs everything together in a deterministic discrete-time world.

// `!(x > 0.0)` is the NaN-rejecting form of a positivity check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acoustics;
pub mod control;
pub mod protocol;
pub mod robot;
pub mod sim;
