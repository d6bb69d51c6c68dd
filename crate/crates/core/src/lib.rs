//! Periodic traveling waves of nonlocal Whitham-type equations
//! `u_t + f(u)_x + K*u_x = 0`, their Whitham modulation matrix, and the
//! Bloch spectrum of the linearization near the origin.
//!
//! The pipeline is: pick an [`symbols::EquationSpec`], compute a wave with
//! [`wave::continue_family`], differentiate it with
//! [`wave::parameter_derivatives`], then build the kernel bases, the
//! modulation matrix and the Bloch-side matrix and compare them.

pub mod bloch;
pub mod cli;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod modulation;
pub mod operators;
pub mod persist;
pub mod spectral;
pub mod symbols;
pub mod wave;

pub use error::{Error, Result};
