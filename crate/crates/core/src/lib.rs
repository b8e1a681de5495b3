//! Nonclassicality of two-qubit Bell-diagonal states beyond steering.
//!
//! Covers Schrödinger strength and steering cost, explicit and searched
//! local-hidden-state models of bounded hidden-variable dimension, and the
//! random access codes these states assist.

pub mod boxes;
pub mod decomposition;
pub mod error;
pub mod quantum;
pub mod rac;

pub use error::{Error, Result};
