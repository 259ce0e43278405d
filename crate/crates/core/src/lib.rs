//! Simulation and closed-form analysis of SIR epidemic models with
//! state-dependent contact rates, threshold (lockdown) feedback handled as a
//! sliding-mode system, and metapopulation coupling on a contact graph.
//!
//! Every closed-form quantity (peak magnitudes, regime boundaries, crossing
//! abscissae, sliding durations, the bimodality threshold) is available as a
//! plain function and can be checked against the integrated trajectories.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod filippov;
pub mod network;
pub mod ode;
pub mod roots;
pub mod shape;
pub mod sir;
pub mod spectral;

pub use error::{Error, Result};
pub use ode::{StepControl, Trajectory};
pub use sir::{ScalarModel, SimOptions, SirState};
