//! Image and mask containers plus the voxel-neighborhood geometry used by the
//! texture matrices.
//!
//! Arrays are stored row-major: the last axis varies fastest. A 2D grid has
//! shape `[rows, cols]`; a 3D grid loaded from NIfTI has shape `[nz, ny, nx]`
//! so that the in-memory order equals the on-disk order.

use crate::error::{FrdError, Result};
use crate::scalar::Real;

/// 2D or 3D scalar intensity array.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid<T> {
    shape: Vec<usize>,
    data: Vec<T>,
    min: T,
    max: T,
}

impl<T: Real> ImageGrid<T> {
    pub fn new(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        check_shape(&shape)?;
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(FrdError::InvalidParameter(format!(
                "shape {shape:?} holds {len} voxels but {} values were given",
                data.len()
            )));
        }
        let mut min = T::infinity();
        let mut max = T::neg_infinity();
        for (i, &v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(FrdError::NonFiniteIntensity(i));
            }
            min = min.min(v);
            max = max.max(v);
        }
        Ok(Self { shape, data, min, max })
    }

    /// Grid filled with one value.
    pub fn constant(shape: Vec<usize>, value: T) -> Result<Self> {
        let len = shape.iter().product();
        Self::new(shape, vec![value; len])
    }

    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> T) -> Result<Self> {
        check_shape(&shape)?;
        let geom = Geometry::new(&shape);
        let data = (0..geom.len()).map(|i| f(&geom.coords(i))).collect();
        Self::new(shape, data)
    }

    pub fn dims(&self) -> usize {
        self.shape.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Observed `(min, max)` intensity.
    pub fn value_range(&self) -> (T, T) {
        (self.min, self.max)
    }

    pub fn geometry(&self) -> Geometry {
        Geometry::new(&self.shape)
    }

    pub fn get(&self, coords: &[usize]) -> T {
        self.data[self.geometry().index(coords)]
    }

    /// Converts the scalar type, e.g. `f64` to `f32`.
    pub fn cast<U: Real>(&self) -> ImageGrid<U> {
        let data = self.data.iter().map(|v| U::lit(v.as_f64())).collect();
        ImageGrid::new(self.shape.clone(), data).expect("finite values stay finite")
    }
}

fn check_shape(shape: &[usize]) -> Result<()> {
    if !(2..=3).contains(&shape.len()) {
        return Err(FrdError::InvalidDims(shape.len()));
    }
    if shape.contains(&0) {
        return Err(FrdError::InvalidParameter(format!("zero extent in shape {shape:?}")));
    }
    Ok(())
}

/// Binary region-of-interest mask congruent with an [`ImageGrid`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoiMask {
    shape: Vec<usize>,
    members: Vec<bool>,
}

impl RoiMask {
    /// Builds a mask; an all-false mask is rejected.
    pub fn new(shape: Vec<usize>, members: Vec<bool>) -> Result<Self> {
        check_shape(&shape)?;
        let len: usize = shape.iter().product();
        if len != members.len() {
            return Err(FrdError::InvalidParameter(format!(
                "mask shape {shape:?} holds {len} voxels but {} flags were given",
                members.len()
            )));
        }
        if !members.iter().any(|&m| m) {
            return Err(FrdError::EmptyMask);
        }
        Ok(Self { shape, members })
    }

    pub fn full(shape: Vec<usize>) -> Result<Self> {
        let len = shape.iter().product();
        Self::new(shape, vec![true; len])
    }

    pub fn from_fn(shape: Vec<usize>, mut f: impl FnMut(&[usize]) -> bool) -> Result<Self> {
        check_shape(&shape)?;
        let geom = Geometry::new(&shape);
        let members = (0..geom.len()).map(|i| f(&geom.coords(i))).collect();
        Self::new(shape, members)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn members(&self) -> &[bool] {
        &self.members
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members[index]
    }

    pub fn count(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_full(&self) -> bool {
        self.members.iter().all(|&m| m)
    }

    pub fn check_matches<T: Real>(&self, image: &ImageGrid<T>) -> Result<()> {
        if self.shape != image.shape() {
            return Err(FrdError::ShapeMismatch(image.shape().to_vec(), self.shape.clone()));
        }
        Ok(())
    }
}

/// Shape plus strides; resolves coordinates and offset neighbors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Geometry {
    shape: Vec<usize>,
    strides: Vec<usize>,
}

impl Geometry {
    pub fn new(shape: &[usize]) -> Self {
        let mut strides = vec![1; shape.len()];
        for axis in (0..shape.len().saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * shape[axis + 1];
        }
        Self { shape: shape.to_vec(), strides }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn dims(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum()
    }

    pub fn coords(&self, mut index: usize) -> Vec<usize> {
        self.strides
            .iter()
            .map(|s| {
                let c = index / s;
                index %= s;
                c
            })
            .collect()
    }

    /// Index of `index + offset`, or `None` when that falls outside the grid.
    pub fn offset(&self, index: usize, offset: &[isize]) -> Option<usize> {
        let mut rem = index;
        let mut out = 0usize;
        for ((&extent, &stride), &step) in self.shape.iter().zip(&self.strides).zip(offset) {
            let c = rem / stride;
            rem %= stride;
            let moved = c as isize + step;
            if moved < 0 || moved >= extent as isize {
                return None;
            }
            out += moved as usize * stride;
        }
        Some(out)
    }
}

/// All offsets in `{-1, 0, 1}^dims` except the origin: 8 in 2D, 26 in 3D.
pub fn full_neighborhood(dims: usize) -> Vec<Vec<isize>> {
    let mut out = Vec::new();
    let total = 3usize.pow(dims as u32);
    for code in 0..total {
        let mut c = code;
        let mut off = vec![0isize; dims];
        for axis in (0..dims).rev() {
            off[axis] = (c % 3) as isize - 1;
            c /= 3;
        }
        if off.iter().any(|&o| o != 0) {
            out.push(off);
        }
    }
    out
}

/// One representative of each `{d, -d}` pair of the full neighborhood: the
/// offsets whose first non-zero component is positive. 4 in 2D, 13 in 3D.
pub fn half_space_directions(dims: usize) -> Vec<Vec<isize>> {
    full_neighborhood(dims).into_iter().filter(|o| o.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)).collect()
}
