//! Density-matrix simulation of dephased four-qubit cluster states.
//!
//! Qubits are indexed from 0 with qubit 0 the leftmost tensor factor, so
//! the qubit called "1" in the usual labelling (N1, F_pair(24), theta1) is
//! index 0 here.

// `!(x > y)` is used on purpose so that NaN takes the failing branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod closed_forms;
pub mod error;
pub mod metrics;
pub mod noise;
pub mod register;
pub mod tensor;

pub use error::{Error, Result};
pub use register::{DensityState, MeasurementSpec, Representation, MEASUREMENT_CONVENTION};
pub use tensor::{ComplexMatrix, C64};
