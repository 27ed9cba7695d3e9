//! Single-photon frequency conversion and multi-frequency W-state generation
//! in a multi-Λ atom coupled to a Sagnac waveguide loop.
//!
//! - [`scattering`]: steady-state transmission amplitudes (closed forms and a
//!   general N-branch linear solve).
//! - [`oracle`]: time-domain integration of the amplitude equations for a
//!   Gaussian pulse, used as an independent check on [`scattering`].
//! - [`design`]: closed-form and Newton-based parameter design.
//! - [`sweep`]: config parsing, parameter grids and the CSV commands behind
//!   the `sagnac-qfc` binary.
//!
//! All rates are in units of Γ₁.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod design;
pub mod error;
pub mod format;
pub mod oracle;
pub mod params;
pub mod scattering;
pub mod sweep;

pub use error::{Error, Result};
pub use params::{BranchParams, SystemConfig};
pub use scattering::{
    transmission_general, transmission_three_branch_resonant, transmission_two_branch,
    ScatteringResult,
};
