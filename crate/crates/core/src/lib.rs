//! Average-value transient model of a 15 MW direct-drive PMSG offshore wind
//! turbine: aerodynamics and pitch control, machine-side torque control, the
//! DC link with its braking chopper, and a grid-side converter controlled in
//! positive and negative sequence frames with LVRT current injection.
//!
//! The crate is `no_std` (it needs `alloc` for time-series logs and lookup
//! tables). File formats and the command-line runner live in the `wtsim`
//! crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod math;

pub mod aero;
pub mod dc_link;
pub mod framework;
pub mod grid_side;
pub mod machine;
pub mod network;
pub mod pitch;
pub mod engine;
pub mod log;
pub mod metrics;
pub mod scenario;
