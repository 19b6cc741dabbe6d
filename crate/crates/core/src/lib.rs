//! Curvature algebra, principal symbols and gauge-fixed time integration for
//! the two-loop renormalization group flow and related quadratic curvature
//! flows on 3-manifolds.

// Index loops mirror the tensor notation; negated comparisons also reject NaN.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod chart;
pub mod error;
pub mod flows;
pub mod integrate;
pub mod presets;
pub mod symbol;
pub mod tensor3;
pub mod verify;

pub use error::{Error, Result};
