//! Gray-level discretization and the five texture matrices.
//!
//! Voxels outside the region of interest never contribute to a pair, run,
//! zone or neighborhood. Zone and neighborhood connectivity is full: 8 in 2D,
//! 26 in 3D.

mod discretize;
mod glcm;
mod gldm;
mod glrlm;
mod glszm;
mod matrix;
mod ngtdm;

pub use self::discretize::{discretize, DiscretizedGrid, OUTSIDE};
pub use self::glcm::{build_glcm, Glcm};
pub use self::gldm::{build_gldm, Gldm};
pub use self::glrlm::{build_glrlm, Glrlm};
pub use self::glszm::{build_glszm, Glszm};
pub use self::matrix::CountMatrix;
pub use self::ngtdm::{build_ngtdm, Ngtdm};
pub use crate::grid::half_space_directions as directions;
