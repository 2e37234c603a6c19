use crate::error::{FrdError, Result};
use crate::texture::discretize::{DiscretizedGrid, OUTSIDE};
use crate::texture::matrix::CountMatrix;

/// Gray-level run-length matrix along one direction: `(level, run length)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Glrlm {
    counts: CountMatrix,
    direction: Vec<isize>,
    roi_count: usize,
}

impl Glrlm {
    pub fn counts(&self) -> &CountMatrix {
        &self.counts
    }

    pub fn direction(&self) -> &[isize] {
        &self.direction
    }

    /// In-ROI voxel count of the source grid.
    pub fn roi_count(&self) -> usize {
        self.roi_count
    }
}

/// Counts maximal runs of equal level along `direction`. A run starts at
/// every in-ROI voxel whose predecessor is outside the grid, outside the ROI,
/// or of another level.
pub fn build_glrlm(grid: &DiscretizedGrid, direction: &[isize]) -> Result<Glrlm> {
    if direction.iter().all(|&d| d == 0) {
        return Err(FrdError::ZeroDirection);
    }
    if direction.len() != grid.dims() {
        return Err(FrdError::DimensionMismatch(direction.len(), grid.dims()));
    }
    let geom = grid.geometry();
    let back: Vec<isize> = direction.iter().map(|d| -d).collect();
    let mut runs = Vec::new();
    for (v, &level) in grid.levels().iter().enumerate() {
        if level == OUTSIDE || geom.offset(v, &back).is_some_and(|p| grid.level(p) == level) {
            continue;
        }
        let mut length = 1;
        let mut cur = v;
        while let Some(next) = geom.offset(cur, direction).filter(|&n| grid.level(n) == level) {
            length += 1;
            cur = next;
        }
        runs.push((level as usize, length));
    }
    Ok(Glrlm {
        counts: CountMatrix::from_entries(grid.num_levels() as usize, &runs),
        direction: direction.to_vec(),
        roi_count: grid.roi_count(),
    })
}
