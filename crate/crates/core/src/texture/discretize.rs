use crate::error::{FrdError, Result};
use crate::grid::{Geometry, ImageGrid, RoiMask};
use crate::scalar::Real;

/// Level value marking voxels outside the region of interest.
pub const OUTSIDE: u32 = 0;

/// Integer gray levels `1..=num_levels` per voxel, [`OUTSIDE`] elsewhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscretizedGrid {
    geometry: Geometry,
    levels: Vec<u32>,
    num_levels: u32,
    roi_count: usize,
}

impl DiscretizedGrid {
    /// Wraps precomputed levels. Every level must lie in `0..=num_levels` and
    /// at least one voxel must be inside the ROI.
    pub fn from_levels(shape: &[usize], levels: Vec<u32>, num_levels: u32) -> Result<Self> {
        let geometry = Geometry::new(shape);
        if !(2..=3).contains(&shape.len()) {
            return Err(FrdError::InvalidDims(shape.len()));
        }
        if geometry.len() != levels.len() {
            return Err(FrdError::InvalidParameter(format!("{} levels given for shape {shape:?}", levels.len())));
        }
        if num_levels == 0 || levels.iter().any(|&l| l > num_levels) {
            return Err(FrdError::InvalidParameter(format!("levels must lie in 1..={num_levels}")));
        }
        let roi_count = levels.iter().filter(|&&l| l != OUTSIDE).count();
        if roi_count == 0 {
            return Err(FrdError::EmptyMask);
        }
        Ok(Self { geometry, levels, num_levels, roi_count })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn shape(&self) -> &[usize] {
        self.geometry.shape()
    }

    pub fn dims(&self) -> usize {
        self.geometry.dims()
    }

    pub fn levels(&self) -> &[u32] {
        &self.levels
    }

    pub fn level(&self, index: usize) -> u32 {
        self.levels[index]
    }

    pub fn num_levels(&self) -> u32 {
        self.num_levels
    }

    /// Number of voxels inside the region of interest.
    pub fn roi_count(&self) -> usize {
        self.roi_count
    }

    /// Per-level voxel counts, index `level - 1`.
    pub fn histogram(&self) -> Vec<u64> {
        let mut h = vec![0u64; self.num_levels as usize];
        for &l in &self.levels {
            if l != OUTSIDE {
                h[l as usize - 1] += 1;
            }
        }
        h
    }
}

/// Maps ROI intensities to `bin_count` equal-width bins over the ROI range.
///
/// Level of `x` is `floor((x - min) * bins / (max - min)) + 1`, with the ROI
/// maximum folded into the top bin. A constant ROI yields one level.
pub fn discretize<T: Real>(image: &ImageGrid<T>, mask: Option<&RoiMask>, bin_count: u32) -> Result<DiscretizedGrid> {
    if bin_count < 2 {
        return Err(FrdError::InvalidParameter(format!("bin count must be at least 2, got {bin_count}")));
    }
    if let Some(m) = mask {
        m.check_matches(image)?;
    }
    let inside = |i: usize| mask.is_none_or(|m| m.contains(i));
    let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
    for (i, &v) in image.data().iter().enumerate() {
        if inside(i) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if lo > hi {
        return Err(FrdError::EmptyMask);
    }
    let range = hi - lo;
    let num_levels = if range > T::zero() { bin_count } else { 1 };
    let bins = T::lit(bin_count as f64);
    let levels = image
        .data()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if !inside(i) {
                OUTSIDE
            } else if range > T::zero() {
                let bin = ((v - lo) * bins / range).floor().to_u32().unwrap_or(0);
                bin.min(bin_count - 1) + 1
            } else {
                1
            }
        })
        .collect();
    DiscretizedGrid::from_levels(image.shape(), levels, num_levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_bins_split_in_halves() {
        let img = ImageGrid::new(vec![1, 4], vec![0.0f64, 1.0, 2.0, 3.0]).unwrap();
        let g = discretize(&img, None, 2).unwrap();
        assert_eq!(g.levels(), &[1, 1, 2, 2]);
        assert_eq!(g.num_levels(), 2);
    }

    #[test]
    fn constant_image_collapses_to_one_level() {
        let img = ImageGrid::constant(vec![3, 3], 7.0f64).unwrap();
        let g = discretize(&img, None, 32).unwrap();
        assert!(g.levels().iter().all(|&l| l == 1));
        assert_eq!(g.num_levels(), 1);
    }

    #[test]
    fn byte_range_in_32_bins_holds_8_values_each() {
        // Brute-force reference: value v belongs to the bin whose
        // half-open interval [k*255/32, (k+1)*255/32) contains it.
        let img = ImageGrid::from_fn(vec![16, 16], |c| (c[0] * 16 + c[1]) as f64).unwrap();
        let g = discretize(&img, None, 32).unwrap();
        for v in 0..256usize {
            let mut expected = 32;
            for k in 0..32 {
                if (v as f64) < (k + 1) as f64 * 255.0 / 32.0 {
                    expected = k + 1;
                    break;
                }
            }
            assert_eq!(g.level(v) as usize, expected, "value {v}");
        }
        assert!(g.histogram().iter().all(|&n| n == 8));
    }

    #[test]
    fn mask_restricts_range_and_marks_outside() {
        let img = ImageGrid::new(vec![1, 4], vec![100.0f64, 1.0, 2.0, 3.0]).unwrap();
        let mask = RoiMask::new(vec![1, 4], vec![false, true, true, true]).unwrap();
        let g = discretize(&img, Some(&mask), 2).unwrap();
        assert_eq!(g.levels(), &[OUTSIDE, 1, 2, 2]);
        assert_eq!(g.roi_count(), 3);
    }

    #[test]
    fn rejects_tiny_bin_count_and_shape_mismatch() {
        let img = ImageGrid::constant(vec![2, 2], 1.0f64).unwrap();
        assert!(discretize(&img, None, 1).is_err());
        let mask = RoiMask::full(vec![2, 3]).unwrap();
        assert!(matches!(discretize(&img, Some(&mask), 8), Err(FrdError::ShapeMismatch(..))));
    }
}
