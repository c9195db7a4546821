//! Rotating anisotropic harmonic traps under gravity.
//!
//! The crate computes the mode spectrum and stability regions of a particle
//! in a harmonic trap rotating about an arbitrary axis, the two rotation
//! rates at which the rotating gravity vector drives a secular resonance,
//! and trajectories in the co-rotating frame (numerically, through the mode
//! expansion, and in closed form on resonance).
//!
//! Everything here is `no_std` (with `alloc`); file formats and the command
//! line front end live in the `rotrap` crate.
#![no_std]
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analytic;
pub mod dynamics;
mod error;
pub mod linalg;
pub mod resonance;
pub mod spectrum;
mod tolerance;
mod types;

pub use error::Error;
pub use tolerance::Tolerances;
pub use types::{GravitySpec, PhaseState, RotationSpec, TrapConfig, TrapPotential};

pub type Result<T, E = Error> = core::result::Result<T, E>;
