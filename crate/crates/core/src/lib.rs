// Negated float comparisons below are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compiler;
pub mod error;
pub mod estimator;
pub mod fourier;
pub mod io;
pub mod pauli;
pub mod pipeline;
pub mod runtime;
pub mod solvers;
pub mod special;
pub mod statevector;

pub use error::{Error, Result};
