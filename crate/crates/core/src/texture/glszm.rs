use crate::grid::full_neighborhood;
use crate::texture::discretize::{DiscretizedGrid, OUTSIDE};
use crate::texture::matrix::CountMatrix;

/// Gray-level size-zone matrix: `(level, zone size)` counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Glszm {
    counts: CountMatrix,
    roi_count: usize,
}

impl Glszm {
    pub fn counts(&self) -> &CountMatrix {
        &self.counts
    }

    pub fn roi_count(&self) -> usize {
        self.roi_count
    }
}

/// Labels 8-connected (2D) / 26-connected (3D) zones of equal level.
pub fn build_glszm(grid: &DiscretizedGrid) -> Glszm {
    let geom = grid.geometry();
    let neighbors = full_neighborhood(grid.dims());
    let mut visited = vec![false; grid.levels().len()];
    let mut zones = Vec::new();
    let mut stack = Vec::new();
    for (seed, &level) in grid.levels().iter().enumerate() {
        if level == OUTSIDE || visited[seed] {
            continue;
        }
        visited[seed] = true;
        stack.push(seed);
        let mut size = 0;
        while let Some(v) = stack.pop() {
            size += 1;
            for off in &neighbors {
                if let Some(w) = geom.offset(v, off) {
                    if !visited[w] && grid.level(w) == level {
                        visited[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        zones.push((level as usize, size));
    }
    Glszm { counts: CountMatrix::from_entries(grid.num_levels() as usize, &zones), roi_count: grid.roi_count() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l_shaped_zone_and_singleton() {
        let g = DiscretizedGrid::from_levels(&[2, 2], vec![1, 1, 1, 2], 2).unwrap();
        let m = build_glszm(&g);
        assert_eq!(m.counts().get(1, 3), 1);
        assert_eq!(m.counts().get(2, 1), 1);
        assert_eq!(m.counts().total(), 2);
    }

    #[test]
    fn constant_grid_is_one_zone() {
        let g = DiscretizedGrid::from_levels(&[2, 3, 4], vec![1; 24], 1).unwrap();
        assert_eq!(build_glszm(&g).counts().get(1, 24), 1);
    }

    #[test]
    fn diagonal_touch_connects() {
        let g = DiscretizedGrid::from_levels(&[2, 2], vec![1, 2, 2, 1], 2).unwrap();
        let m = build_glszm(&g);
        assert_eq!(m.counts().get(1, 2), 1);
        assert_eq!(m.counts().get(2, 2), 1);
    }
}
