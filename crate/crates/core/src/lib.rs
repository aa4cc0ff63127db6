//! Diffraction of weighted model sets and dense Dirac combs built from
//! cut-and-project schemes.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! tolerances quoted throughout the docs assume.

pub mod comb;
pub mod cps;
pub mod diffraction;
mod error;
pub mod model_set;
pub mod numerics;
pub mod random_tiling;
mod scalar;
pub mod weight;

pub use comb::{DenseComb, TruncatedValue, Wavevector};
pub use cps::{Ball, CutProjectScheme, LatticePoint};
pub use diffraction::{AutocorrelationTable, DiffractionSpectrum, Peak, PoissonReport};
pub use error::{Error, Result};
pub use num_complex::Complex;
pub use scalar::{ball_volume, unit_ball_volume, unit_sphere_area, Scalar};
pub use model_set::{Interval, Window};
pub use weight::{Envelope, WeightFunction};

pub type Scheme = CutProjectScheme<f64>;
pub type Complex64 = Complex<f64>;
pub type Weight = WeightFunction<f64>;
pub type Comb = DenseComb<f64>;
pub type Spectrum = DiffractionSpectrum<f64>;
