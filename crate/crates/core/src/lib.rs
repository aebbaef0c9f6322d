#![no_std]
//! Temporal CHSH correlations of qubit channel pipelines.
//!
//! * [`bloch`]: Bloch-vector states and affine channels, Choi/Kraus forms and
//!   the CPTP, unital, unitary and entanglement-breaking predicates.
//! * [`scenario`]: the two-observer, four-time scenario, its correlators by
//!   enumeration and in closed form, and the divisibility check.
//! * [`optimizer`]: multi-start Nelder–Mead search for the largest Bell value
//!   over a channel class.
//! * [`campaigns`]: the verification campaigns built on the above.

extern crate alloc;

pub mod bloch;
pub mod campaigns;
pub mod error;
pub mod linalg;
pub mod nelder_mead;
pub mod optimizer;
mod math;
pub mod rng;
pub mod scenario;

pub use error::{Error, Result};
pub use linalg::{Mat3, Vec3};
