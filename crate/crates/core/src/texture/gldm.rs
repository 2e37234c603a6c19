use crate::grid::full_neighborhood;
use crate::texture::discretize::{DiscretizedGrid, OUTSIDE};
use crate::texture::matrix::CountMatrix;

/// Gray-level dependence matrix. Column `d + 1` holds voxels with dependence
/// `d`, so an isolated voxel lands in column 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gldm {
    counts: CountMatrix,
    alpha: u32,
}

impl Gldm {
    pub fn counts(&self) -> &CountMatrix {
        &self.counts
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }
}

/// Dependence of a voxel: number of in-ROI neighbors (full connectivity)
/// whose level differs by at most `alpha`.
pub fn build_gldm(grid: &DiscretizedGrid, alpha: u32) -> Gldm {
    let geom = grid.geometry();
    let neighbors = full_neighborhood(grid.dims());
    let mut entries = Vec::with_capacity(grid.roi_count());
    for (v, &level) in grid.levels().iter().enumerate() {
        if level == OUTSIDE {
            continue;
        }
        let dependence = neighbors
            .iter()
            .filter_map(|off| geom.offset(v, off))
            .filter(|&w| {
                let l = grid.level(w);
                l != OUTSIDE && l.abs_diff(level) <= alpha
            })
            .count();
        entries.push((level as usize, dependence + 1));
    }
    Gldm { counts: CountMatrix::from_entries(grid.num_levels() as usize, &entries), alpha }
}
