//! Numerical toolkit for log-concave probability densities sampled on
//! regular grids in dimensions 1 to 3.
//!
//! The crate is generic over the scalar type (see [`Scalar`]); the aliases
//! at the crate root fix it to `f64`, which is what the default tolerances
//! are written for.

pub mod bands;
pub mod error;
pub mod families;
pub mod grid;
pub mod lcgrid;
pub mod linalg;
pub mod lipschitz;
pub mod ops;
pub mod scalar;
pub mod spectra;

pub use error::{Error, Result};
pub use grid::{DensityGrid, GridSpec, LineSet, LogConcavityReport, MomentSummary};
pub use linalg::{AffineMap, LinearMap};
pub use scalar::Scalar;
pub use spectra::{CovMatrix, SplitResult};

pub type Grid = DensityGrid<f64>;
pub type Grid32 = DensityGrid<f32>;
pub type Spec = GridSpec<f64>;
pub type Map = LinearMap<f64>;
pub type Affine = AffineMap<f64>;
pub type Cov = CovMatrix<f64>;
pub type Split = SplitResult<f64>;
pub type Moments = MomentSummary<f64>;
