use crate::grid::full_neighborhood;
use crate::scalar::Real;
use crate::texture::discretize::{DiscretizedGrid, OUTSIDE};

/// Neighbouring gray-tone difference matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Ngtdm<T> {
    s: Vec<T>,
    n: Vec<u64>,
}

impl<T: Real> Ngtdm<T> {
    pub fn num_levels(&self) -> usize {
        self.n.len()
    }

    /// Summed absolute difference for `level` (1-based).
    pub fn s(&self, level: usize) -> T {
        self.s[level - 1]
    }

    /// Voxel count for `level` (1-based).
    pub fn n(&self, level: usize) -> u64 {
        self.n[level - 1]
    }

    /// Voxels with at least one in-ROI neighbor.
    pub fn valid_voxels(&self) -> u64 {
        self.n.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.valid_voxels() == 0
    }
}

/// For each in-ROI voxel with at least one in-ROI neighbor (full connectivity,
/// center excluded), accumulates `|level - mean neighbor level|`.
pub fn build_ngtdm<T: Real>(grid: &DiscretizedGrid) -> Ngtdm<T> {
    let geom = grid.geometry();
    let neighbors = full_neighborhood(grid.dims());
    let levels = grid.num_levels() as usize;
    let mut s = vec![T::zero(); levels];
    let mut n = vec![0u64; levels];
    for (v, &level) in grid.levels().iter().enumerate() {
        if level == OUTSIDE {
            continue;
        }
        let (mut sum, mut count) = (0u64, 0u64);
        for off in &neighbors {
            if let Some(w) = geom.offset(v, off) {
                let l = grid.level(w);
                if l != OUTSIDE {
                    sum += l as u64;
                    count += 1;
                }
            }
        }
        if count == 0 {
            continue;
        }
        let mean = T::lit(sum as f64) / T::lit(count as f64);
        s[level as usize - 1] = s[level as usize - 1] + (T::lit(level as f64) - mean).abs();
        n[level as usize - 1] += 1;
    }
    Ngtdm { s, n }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_grid_has_zero_difference() {
        let g = DiscretizedGrid::from_levels(&[3, 3], vec![1; 9], 1).unwrap();
        let m = build_ngtdm::<f64>(&g);
        assert_eq!(m.s(1), 0.0);
        assert_eq!(m.n(1), 9);
    }

    #[test]
    fn center_peak() {
        let g = DiscretizedGrid::from_levels(&[3, 3], vec![1, 1, 1, 1, 2, 1, 1, 1, 1], 2).unwrap();
        let m = build_ngtdm::<f64>(&g);
        assert_eq!(m.s(2), 1.0);
        assert_eq!(m.n(2), 1);
        // corners: |1 - 4/3|; edges: |1 - 6/5|
        assert!((m.s(1) - (4.0 / 3.0 + 4.0 / 5.0)).abs() < 1e-15);
        assert_eq!(m.n(1), 8);
    }

    #[test]
    fn isolated_voxel_is_excluded() {
        let g = DiscretizedGrid::from_levels(&[3, 3], vec![0, 0, 0, 0, 1, 0, 0, 0, 0], 1).unwrap();
        assert!(build_ngtdm::<f64>(&g).is_empty());
    }
}
