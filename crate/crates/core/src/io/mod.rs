//! Dataset loading: manifests, PNG slices, NIfTI volumes, masks and cropping.

pub mod crop;
pub mod manifest;
pub mod nifti;
pub mod png;

use std::path::Path;

use crate::error::{FrdError, Result};
use crate::grid::{ImageGrid, RoiMask};
use crate::scalar::Real;

pub use self::crop::{crop_window, tumor_crop};
pub use self::manifest::{load_manifest, write_manifest, BoundingBox, DatasetManifest, ManifestEntry};
pub use self::nifti::{load_volume_3d, save_volume_3d, NiftiDatatype, NiftiHeader};
pub use self::png::{load_image_2d, save_image_2d, PngDepth};

/// Storage details needed to write a derived image back in its source format.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceFormat {
    Png(PngDepth),
    Nifti(Box<NiftiHeader>),
}

/// Loads a PNG or NIfTI file, choosing the reader from the file name.
pub fn load_image<T: Real>(path: &Path) -> Result<(ImageGrid<T>, SourceFormat)> {
    match manifest::dims_for_path(path) {
        Some(2) => self::png::read_png(path).map(|(img, d)| (img, SourceFormat::Png(d))),
        Some(3) => nifti::read_nifti(path).map(|(img, h)| (img, SourceFormat::Nifti(Box::new(h)))),
        _ => Err(FrdError::InvalidParameter(format!("{}: unknown image format", path.display()))),
    }
}

/// Writes `image` in the format it was loaded from. PNG keeps its bit depth;
/// NIfTI keeps its geometry and is stored as float32 (float64 when the source
/// type does not fit in float32) with identity scaling.
pub fn save_like<T: Real>(path: &Path, image: &ImageGrid<T>, format: &SourceFormat) -> Result<()> {
    match format {
        SourceFormat::Png(depth) => save_image_2d(path, image, *depth),
        SourceFormat::Nifti(header) => {
            let mut header = (**header).clone();
            header.datatype = if header.datatype.fits_f32() { NiftiDatatype::Float32 } else { NiftiDatatype::Float64 };
            header.scl_slope = 1.0;
            header.scl_inter = 0.0;
            nifti::write_nifti(path, image, &header)
        }
    }
}

/// Loads a mask file; every non-zero voxel is a member.
pub fn load_mask(path: &Path) -> Result<RoiMask> {
    let (img, _) = load_image::<f64>(path)?;
    let members = img.data().iter().map(|&v| v != 0.0).collect();
    RoiMask::new(img.shape().to_vec(), members)
}

/// Writes a mask as 0/255 8-bit PNG or uint8 NIfTI depending on the name.
pub fn save_mask(path: &Path, mask: &RoiMask) -> Result<()> {
    let data = mask.members().iter().map(|&m| if m { 255.0 } else { 0.0 }).collect();
    let img = ImageGrid::<f64>::new(mask.shape().to_vec(), data)?;
    match manifest::dims_for_path(path) {
        Some(2) => save_image_2d(path, &img, PngDepth::Eight),
        Some(3) => {
            let ones = ImageGrid::<f64>::new(
                img.shape().to_vec(),
                img.data().iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect(),
            )?;
            save_volume_3d(path, &ones, NiftiDatatype::Uint8)
        }
        _ => Err(FrdError::InvalidParameter(format!("{}: unknown mask format", path.display()))),
    }
}

/// One manifest entry resolved into memory.
#[derive(Debug, Clone)]
pub struct LoadedImage<T> {
    pub image_id: String,
    pub image: ImageGrid<T>,
    pub mask: Option<RoiMask>,
    pub bbox: Option<BoundingBox>,
    pub format: SourceFormat,
}

/// Loads an entry's image and mask; failures carry the image id.
pub fn load_entry<T: Real>(entry: &ManifestEntry) -> Result<LoadedImage<T>> {
    let inner = || -> Result<LoadedImage<T>> {
        let (image, format) = load_image(&entry.image_path)?;
        let mask = entry.mask_path.as_deref().map(load_mask).transpose()?;
        if let Some(m) = &mask {
            m.check_matches(&image)?;
        }
        if let Some(b) = &entry.bbox {
            b.check_inside(image.shape())?;
        }
        Ok(LoadedImage { image_id: entry.image_id.clone(), image, mask, bbox: entry.bbox.clone(), format })
    };
    inner().map_err(|e| e.for_image(&entry.image_id))
}
