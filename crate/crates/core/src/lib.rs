//! Fréchet radiomics distance (FRD) between image datasets.
//!
//! Each image is reduced to 94 radiomics features (first-order statistics
//! and five gray-level texture matrix families). Feature distributions of two
//! datasets are min-max normalized, calibrated to `[0, 7.456]`, fitted with
//! multivariate Gaussians and compared by the Fréchet distance.
//!
//! Numeric code is generic over [`scalar::Real`] (`f32` or `f64`); the
//! aliases below fix the scalar for the common cases.

pub mod error;
pub mod features;
pub mod fingerprint;
pub mod frechet;
pub mod grid;
pub mod io;
pub mod kinetics;
pub mod linalg;
pub mod perturbation;
pub mod phantom;
pub mod plot;
pub mod scalar;
pub mod texture;

pub use error::{FrdError, Result};
pub use features::{extract_all, FeatureConfig};
pub use frechet::{frd, mse_paired, FrdOptions, FrdReport, NormalizationMode};
pub use grid::RoiMask;
pub use scalar::Real;

pub type Image = grid::ImageGrid<f64>;
pub type Image32 = grid::ImageGrid<f32>;
pub type FeatureVector = features::FeatureVector<f64>;
pub type FeatureVector32 = features::FeatureVector<f32>;
pub type FeatureMatrix = frechet::FeatureMatrix<f64>;
pub type FeatureMatrix32 = frechet::FeatureMatrix<f32>;
pub type GaussianSummary = frechet::GaussianSummary<f64>;
pub type GaussianSummary32 = frechet::GaussianSummary<f32>;
pub type Matrix = linalg::SquareMatrix<f64>;
pub type Matrix32 = linalg::SquareMatrix<f32>;
