use crate::error::{FrdError, Result};
use crate::scalar::Real;
use crate::texture::discretize::{DiscretizedGrid, OUTSIDE};

/// Symmetric gray-level co-occurrence counts for one offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Glcm {
    num_levels: usize,
    counts: Vec<u64>,
    direction: Vec<isize>,
    distance: usize,
}

impl Glcm {
    pub fn num_levels(&self) -> usize {
        self.num_levels
    }

    /// Raw symmetric count for levels `(i, j)`, 1-based.
    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[(i - 1) * self.num_levels + (j - 1)]
    }

    pub fn direction(&self) -> &[isize] {
        &self.direction
    }

    pub fn distance(&self) -> usize {
        self.distance
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// True when no in-ROI voxel pair exists at this offset.
    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    /// Row-major `L x L` joint probabilities summing to one.
    pub fn probabilities<T: Real>(&self) -> Vec<T> {
        let total = T::lit(self.total() as f64);
        self.counts.iter().map(|&c| T::lit(c as f64) / total).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.num_levels;
        (1..=n).all(|i| (1..=n).all(|j| self.count(i, j) == self.count(j, i)))
    }
}

/// Counts level pairs `(grid[v], grid[v + distance * direction])` over in-ROI
/// voxel pairs and adds the transpose.
pub fn build_glcm(grid: &DiscretizedGrid, direction: &[isize], distance: usize) -> Result<Glcm> {
    if direction.iter().all(|&d| d == 0) || distance == 0 {
        return Err(FrdError::ZeroDirection);
    }
    if direction.len() != grid.dims() {
        return Err(FrdError::DimensionMismatch(direction.len(), grid.dims()));
    }
    let n = grid.num_levels() as usize;
    let offset: Vec<isize> = direction.iter().map(|&d| d * distance as isize).collect();
    let geom = grid.geometry();
    let mut counts = vec![0u64; n * n];
    for (v, &a) in grid.levels().iter().enumerate() {
        if a == OUTSIDE {
            continue;
        }
        let Some(w) = geom.offset(v, &offset) else { continue };
        let b = grid.level(w);
        if b == OUTSIDE {
            continue;
        }
        let (a, b) = (a as usize - 1, b as usize - 1);
        counts[a * n + b] += 1;
        counts[b * n + a] += 1;
    }
    Ok(Glcm { num_levels: n, counts, direction: direction.to_vec(), distance })
}
