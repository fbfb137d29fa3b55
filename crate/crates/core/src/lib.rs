//! Event-triggered distributed damping for the 1D wave equation.
//!
//! The crate covers the full pipeline:
//!
//! * [`certificate`]: the 4×4 LMI that certifies exponential decay of a
//!   weighted Lyapunov functional, with a feasibility search over its
//!   multipliers.
//! * [`wave1d`]: a finite-difference Störmer–Verlet solver for
//!   `z_tt = z_xx + f` on `(0, L)` with homogeneous Dirichlet data.
//! * [`trigger`]: sampled-velocity controllers and the relative-energy
//!   triggering rule, plus the inter-event dwell bound.
//! * [`simulation`]: the closed loop that ties the solver to a policy.
//! * [`analysis`]: post-hoc verification of recorded traces.
//! * [`experiment`]: the certify / simulate / compare / sweep / verify
//!   workflows behind the command-line tool.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analysis;
pub mod certificate;
pub mod config;
pub mod error;
pub mod experiment;
pub mod expr;
pub mod io;
pub mod simulation;
pub mod trigger;
pub mod wave1d;

pub use error::{Error, Result};
