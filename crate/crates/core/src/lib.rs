//! Monte Carlo simulator and analytic-bounds library for underlay cognitive
//! radio networks with multiuser, multi-antenna primary and secondary systems.
//!
//! The secondary system shares spectrum with a licensed primary (either an
//! uplink or a downlink cell) and must keep the interference it inflicts on
//! every primary user or antenna below a tolerance. Two secondary schedulers
//! are provided:
//!
//! * [`mac`] — threshold-based user selection for a secondary uplink: users
//!   whose cross-channel interference stays under a designed per-link quota
//!   are eligible, and a capped random subset of them transmits at full power.
//! * [`bc`] — random orthonormal beamforming for a secondary downlink: the
//!   base station transmits at the largest interference-compliant power and
//!   assigns each beam to the user reporting the highest SINR.
//!
//! [`theory`] evaluates the matching closed-form throughput bounds and
//! extreme-value constants, and [`montecarlo`] runs reproducible sweeps of
//! average throughput versus the secondary user count.

pub mod bc;
pub mod error;
pub mod linalg;
pub mod mac;
pub mod model;
pub mod montecarlo;
pub mod rng;
pub mod theory;

pub use error::{Error, Result};
