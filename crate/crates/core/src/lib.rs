//! Concentration bounds for the supremum of an empirical process over a
//! finite class of bounded, centred functions of independent coordinates,
//! with exact and Monte Carlo certification of every bound.
//!
//! * [`bound_functions`]: log-Laplace and tail bounds, their inversions, and
//!   the comparison bounds.
//! * [`numerics`]: quadrature, root finding, and the auxiliary integrals.
//! * [`processes`]: scenarios, exact enumeration, and seeded simulation.
//! * [`verify`]: certification reports.

// `!(x > 0.0)` is used on purpose so that NaN fails every precondition.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bound_functions;
pub mod error;
pub mod numerics;
pub mod processes;
pub mod verify;

pub use error::{Error, Result};
