//! Scale functions of spectrally negative Lévy processes, their shape, and
//! de Finetti's optimal dividend problem.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod definetti;
pub mod error;
pub mod exec;
pub mod levy;
pub mod numeric;
pub mod scale;
pub mod shape;
pub mod sim;

pub use error::{Error, Result};
pub use exec::Exec;
pub use levy::{JumpMeasure, LevyModel};
