use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = FrdError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum FrdError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("manifest {path}, line {line}: {msg}")]
    Manifest { path: PathBuf, line: usize, msg: String },

    #[error("duplicate image_id \"{0}\" in manifest")]
    DuplicateId(String),

    #[error("manifest mixes 2D and 3D entries (\"{0}\" differs from the first entry)")]
    MixedDims(String),

    #[error("unsupported color type: {0}")]
    UnsupportedColorType(String),

    #[error("corrupt or unreadable PNG: {0}")]
    Png(String),

    #[error("not a NIfTI-1 file")]
    NotNifti,

    #[error("unsupported NIfTI datatype code {0}")]
    UnsupportedDatatype(i16),

    #[error("unsupported NIfTI dimensionality: {0}")]
    UnsupportedNiftiDims(String),

    #[error("image must be 2D or 3D, got {0} axes")]
    InvalidDims(usize),

    #[error("image contains non-finite intensity at voxel {0}")]
    NonFiniteIntensity(usize),

    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch(Vec<usize>, Vec<usize>),

    #[error("region of interest is empty")]
    EmptyMask,

    #[error("bounding box {lo:?}..{hi:?} lies outside image extent {shape:?}")]
    BBoxOutOfBounds { lo: Vec<usize>, hi: Vec<usize>, shape: Vec<usize> },

    #[error("direction vector must be non-zero")]
    ZeroDirection,

    #[error("no co-occurring voxel pairs inside the region of interest")]
    NoPairs,

    #[error("{0} matrix is empty")]
    EmptyMatrix(&'static str),

    #[error("feature names differ between the two matrices (first mismatch at column {0})")]
    FeatureNameMismatch(usize),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("matrix has eigenvalue {0:e} below the tolerated negative threshold")]
    NegativeEigenvalue(f64),

    #[error("Fréchet distance is not finite even after regularization (epsilon = {0:e})")]
    NonFiniteDistance(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("phase labels of case \"{case_id}\" conflict with the established order: {msg}")]
    PhaseMismatch { case_id: String, msg: String },

    #[error("image \"{image_id}\": {source}")]
    Image {
        image_id: String,
        #[source]
        source: Box<FrdError>,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl FrdError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FrdError::Io { path: path.into(), source }
    }

    pub(crate) fn for_image(self, image_id: &str) -> Self {
        FrdError::Image { image_id: image_id.to_owned(), source: Box::new(self) }
    }
}
