//! Shared numerical kernels.

mod erfc;
pub mod linalg;
mod quadrature;
mod summation;

pub use erfc::{erf, erfc, ierfc};
pub use quadrature::{
    integrate_cube, integrate_decaying, integrate_decaying_capped, integrate_interval, DecayCertificate,
    QuadratureResult, DEFAULT_MAX_EVALUATIONS,
};
pub use summation::{compensated_sum, tail_sum_bound, CompensatedSum, ComplexSum};
