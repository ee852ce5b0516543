//! Small numerical kernels shared by the claims and rate-function modules.

pub mod optim;
pub mod quad;
