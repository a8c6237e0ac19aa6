//! Deterministic simulation of batteryless, solar-harvesting sensor nodes
//! talking over a point-to-point LoRa or narrowband FSK link.
//!
//! The crate is split into four layers:
//!
//! * [`energy`]: harvesters, clamped capacitors, the hysteresis rail gate and
//!   federated per-peripheral banks (UFoP).
//! * [`phy`]: airtime, sensitivity, path loss, packet delivery and transmit
//!   current models.
//! * [`node`]: the duty-cycled node state machine and its failure detectors.
//! * [`engine`]: the fixed-step simulation loop, scenarios, sweeps,
//!   calibration and result output.

pub mod energy;
pub mod engine;
pub mod error;
pub mod node;
pub mod phy;

pub use error::{Error, FieldViolation, Result};
