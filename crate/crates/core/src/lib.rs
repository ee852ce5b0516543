#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Risk processes driven by non-stationary arrivals with subexponential claims.

pub mod aggregate;
pub mod arrivals;
pub mod claims;
pub mod error;
pub mod harness;
pub mod ldp;
pub mod numeric;
pub mod ruin;

pub use error::{Error, Result};
