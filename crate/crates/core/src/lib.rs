//! Simulation and gate synthesis for the Lorentz quantum computer model.
//!
//! A register mixes ordinary qubits with hyperbolic bits (hybits). Hybits
//! carry the indefinite metric `diag(1, -1)`, so the register metric is a
//! tensor product of `diag(1, 1)` and `diag(1, -1)` factors and every gate is
//! an isometry of that metric (`G^† η G = η`). Only basis states whose hybits
//! are all `|0)` are observable; measurement postselects onto them.
//!
//! Modules:
//!
//! - [`register`] and [`state`]: bit kinds, layouts, metric signs, state vectors.
//! - [`gates`]: builtin gate matrices, local metrics, isometry checks.
//! - [`circuit`]: the `.lqc` text format and circuit IR.
//! - [`simulator`]: bit-masked kernels, postselected measurement, sampling.
//! - [`synthesis`]: two-level factorization, controlled-gate gadgets, word search.
//! - [`search`]: the logarithmic-depth search algorithm and its closed forms.

pub mod circuit;
pub mod error;
pub mod gates;
pub mod linalg;
pub mod matrix_io;
pub mod register;
pub mod search;
pub mod simulator;
pub mod state;
pub mod synthesis;

pub use error::{Error, Result};
pub use register::{BitKind, RegisterLayout};
pub use state::StateVector;

/// Tolerance for isometry checks (`‖G^† η G - η‖_max`).
pub const EPS_ISO: f64 = 1e-10;

/// Tolerance for synthesis round trips.
pub const EPS_RECON: f64 = 1e-8;

/// Layouts above this many amplitudes are refused.
pub const MAX_AMPLITUDE_BITS: usize = 24;
