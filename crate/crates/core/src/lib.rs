//! Galerkin P1 finite elements in space and GMMP time stepping for the
//! time-fractional stochastic heat equation on (0, 1) with Caputo order
//! 0 < α < 1, homogeneous Dirichlet conditions and multiplicative Q-Wiener
//! noise, together with a Mittag-Leffler spectral reference solution and a
//! Monte Carlo convergence harness.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fem;
pub mod harness;
pub mod linalg;
pub mod noise;
pub mod oracle;
pub mod rng;
pub mod special_functions;
pub mod stepper;
pub mod weights;

pub use error::{Error, Result};
