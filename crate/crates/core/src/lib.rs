//! Simulation-based falsification of black-box systems against signal
//! temporal logic requirements, driven by Bayesian optimization.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acquisition;
pub mod gp;
pub mod harness;
pub mod optim;
pub mod signal;
pub mod stl;
pub mod sut;
pub mod trace;
