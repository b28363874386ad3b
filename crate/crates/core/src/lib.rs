//! Divergences between probability measures built from optimal-design
//! criteria, specialised to Gaussian summaries, plus the resampling
//! machinery for two-sample testing.
//!
//! The numerical core is generic over [`Real`] (`f32`, `f64`); the
//! aliases below fix the scalar to `f64` or `f32`. Exact-arithmetic types
//! such as rationals are accepted where only ring operations are needed
//! ([`Matrix`], [`elementary_symmetric`]).

pub mod criteria;
pub mod divergence;
pub mod empirical;
pub mod error;
pub mod matrix;
pub mod rng;
pub mod scalar;
pub mod spectral;
pub mod two_sample;

#[cfg(test)]
pub(crate) mod testutil;

pub use criteria::{CriterionK, CriterionP};
pub use divergence::{DistanceSpec, EvalOptions, Family, FloorChoice, GaussianSummary, PairSpectra};
pub use empirical::{McEstimate, Sample};
pub use error::{Argument, Error, ErrorKind, Result};
pub use matrix::Matrix;
pub use scalar::Real;
pub use spectral::{elementary_symmetric, EigenFloor, Spectrum, SymMatrix};

pub type SymMatrix64 = SymMatrix<f64>;
pub type SymMatrix32 = SymMatrix<f32>;
pub type Spectrum64 = Spectrum<f64>;
pub type Spectrum32 = Spectrum<f32>;
pub type GaussianSummary64 = GaussianSummary<f64>;
pub type GaussianSummary32 = GaussianSummary<f32>;
pub type Sample64 = Sample<f64>;
pub type Sample32 = Sample<f32>;
pub type Matrix64 = Matrix<f64>;
