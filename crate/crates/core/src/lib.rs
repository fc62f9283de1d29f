//! Robust leader/follower synchronization of power generators under corrupted
//! phase measurements.
//!
//! The crate is organized around the reduced damped generator model
//! ([`model`]), the bounded exogenous signals driving it ([`signals`]), the
//! control laws ([`control`]), the connection supervisor ([`supervisor`]),
//! closed-form robustness bounds ([`analysis`]), the phase-dependent damping
//! extension ([`phase_damping`]), the detailed machine model and its
//! reduction ([`high_order`]) and the fixed-step simulator ([`sim`]).

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod control;
mod error;
pub mod high_order;
pub mod model;
pub mod ode;
pub mod phase_damping;
pub mod signals;
pub mod sim;
pub mod supervisor;

pub use error::{Error, Result};
