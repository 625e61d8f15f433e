//! Numerical laboratory for the variable-coefficient Poisson equation
//! `∇·(a∇p) = f` on the unit square with Dirichlet data `p = g` on the
//! boundary.
//!
//! The crate generates smooth random problem instances ([`datagen`]),
//! computes finite-difference reference solutions ([`refsolver`]), trains
//! fully-connected networks on the PDE residual with either loss-based
//! ("soft") or distance-function-based ("exact") boundary condition
//! imposition ([`diffnet`], [`bc`], [`train`]), and reports comparison
//! metrics ([`eval`]).
//!
//! The crate is `no_std`-compatible (with `alloc`); the default `std`
//! feature enables parallel batch evaluation and wall-clock timing in
//! training logs.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bc;
pub mod datagen;
pub mod diffnet;
pub mod eval;
pub mod jet;
pub mod linalg;
pub mod math;
pub mod refsolver;
pub mod rng;
pub mod train;

pub use jet::Jet2;

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// Crate-wide error type.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A precondition on an argument was violated.
    InvalidArgument(String),
    /// Kernel interpolation system could not be factorized.
    FitFailure {
        /// Rough estimate of the kernel matrix condition number.
        condition_estimate: f64,
    },
    /// Linear solver did not reach the requested residual.
    SolverFailure {
        /// Residual 2-norm of the best iterate.
        residual: f64,
        /// Iterations spent before giving up.
        iterations: usize,
        /// Best iterate found (interior values).
        best: Vec<f64>,
    },
    /// A network evaluation produced a non-finite value.
    EvaluationFailure(&'static str),
    /// Training aborted on a non-finite loss or gradient.
    TrainingFailure {
        /// Epoch (1-based) at which the failure occurred.
        epoch: usize,
        /// Log of all epochs completed before the failure.
        log: Box<train::TrainLog>,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::FitFailure { condition_estimate } => write!(
                f,
                "interpolation fit failed: kernel matrix singular (condition estimate {condition_estimate:.3e})"
            ),
            Error::SolverFailure {
                residual,
                iterations,
                ..
            } => write!(
                f,
                "linear solver failed: residual {residual:.3e} after {iterations} iterations"
            ),
            Error::EvaluationFailure(what) => {
                write!(f, "network evaluation produced non-finite {what}")
            }
            Error::TrainingFailure { epoch, .. } => {
                write!(f, "training failed with non-finite loss at epoch {epoch}")
            }
        }
    }
}

impl core::error::Error for Error {}

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
