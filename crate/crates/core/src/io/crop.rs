//! Tumor-centered cropping of 2D slices.

use crate::error::{FrdError, Result};
use crate::grid::ImageGrid;
use crate::io::manifest::BoundingBox;
use crate::scalar::Real;

/// Half-open `[start, end)` window per axis.
pub type CropWindow = Vec<(usize, usize)>;

/// Window chosen by [`tumor_crop`] without materializing the crop.
///
/// Per axis the target length is `ceil(extent / 2)`, centered on the bbox
/// center and shifted to stay inside the image. A bbox longer than the target
/// is kept whole instead.
pub fn crop_window(shape: &[usize], bbox: &BoundingBox) -> Result<CropWindow> {
    if shape.len() != 2 {
        return Err(FrdError::InvalidDims(shape.len()));
    }
    bbox.check_inside(shape)?;
    Ok((0..2)
        .map(|axis| {
            let extent = shape[axis];
            let target = extent.div_ceil(2);
            let (lo, hi) = (bbox.lo()[axis], bbox.hi()[axis]);
            if hi - lo > target {
                return (lo, hi);
            }
            let center = (lo + hi) / 2;
            let start = center.saturating_sub(target / 2).min(extent - target);
            (start, start + target)
        })
        .collect())
}

/// Crops a slice to half its height and width around the tumor bbox.
pub fn tumor_crop<T: Real>(image: &ImageGrid<T>, bbox: &BoundingBox) -> Result<ImageGrid<T>> {
    let window = crop_window(image.shape(), bbox)?;
    let (r0, r1) = window[0];
    let (c0, c1) = window[1];
    let cols = image.shape()[1];
    let data = image.data();
    let out = (r0..r1).flat_map(|r| data[r * cols + c0..r * cols + c1].iter().copied()).collect();
    ImageGrid::new(vec![r1 - r0, c1 - c0], out)
}
