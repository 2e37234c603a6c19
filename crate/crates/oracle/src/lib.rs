//! Slow reference implementations of the texture matrices and their features.
//!
//! Everything here is written for clarity, not speed: matrices are built by
//! enumerating voxel pairs, candidate runs and flood-filled zones directly,
//! and features are evaluated from their textbook sums over dense matrices.
//! Levels are 1-based; level 0 marks a voxel outside the region.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

/// A discretized grid: `levels[k]` in `0..=num_levels`, row-major.
#[derive(Debug, Clone)]
pub struct LevelGrid {
    pub shape: Vec<usize>,
    pub levels: Vec<u32>,
    pub num_levels: usize,
}

impl LevelGrid {
    pub fn new(shape: Vec<usize>, levels: Vec<u32>, num_levels: usize) -> Self {
        assert_eq!(shape.iter().product::<usize>(), levels.len());
        assert!(levels.iter().all(|&l| l as usize <= num_levels));
        Self { shape, levels, num_levels }
    }

    fn coords(&self, mut k: usize) -> Vec<isize> {
        let mut c = vec![0isize; self.shape.len()];
        for axis in (0..self.shape.len()).rev() {
            c[axis] = (k % self.shape[axis]) as isize;
            k /= self.shape[axis];
        }
        c
    }

    /// Level at a signed coordinate; 0 off the grid.
    fn at(&self, c: &[isize]) -> u32 {
        let mut k = 0usize;
        for (axis, &x) in c.iter().enumerate() {
            if x < 0 || x as usize >= self.shape[axis] {
                return 0;
            }
            k = k * self.shape[axis] + x as usize;
        }
        self.levels[k]
    }

    fn roi_count(&self) -> usize {
        self.levels.iter().filter(|&&l| l > 0).count()
    }
}

fn shift(c: &[isize], d: &[isize], times: isize) -> Vec<isize> {
    c.iter().zip(d).map(|(&a, &b)| a + b * times).collect()
}

/// Every non-zero offset in `{-1, 0, 1}^dims`.
pub fn neighbor_offsets(dims: usize) -> Vec<Vec<isize>> {
    let mut out = vec![vec![]];
    for _ in 0..dims {
        out = out.into_iter().flat_map(|p: Vec<isize>| (-1..=1).map(move |x| [p.clone(), vec![x]].concat())).collect();
    }
    out.retain(|o| o.iter().any(|&x| x != 0));
    out
}

/// One offset from each `{o, -o}` pair.
pub fn unique_directions(dims: usize) -> Vec<Vec<isize>> {
    neighbor_offsets(dims).into_iter().filter(|o| o.iter().find(|&&x| x != 0).copied() == Some(1)).collect()
}

/// Co-occurrence counts: every ordered voxel pair `(p, q)` with
/// `q - p = +-distance * dir`, both in the region.
pub fn glcm(grid: &LevelGrid, dir: &[isize], distance: usize) -> DMatrix<f64> {
    let ng = grid.num_levels;
    let mut m = DMatrix::zeros(ng, ng);
    let n = grid.levels.len();
    for a in 0..n {
        for b in 0..n {
            let (ca, cb) = (grid.coords(a), grid.coords(b));
            let diff: Vec<isize> = cb.iter().zip(&ca).map(|(x, y)| x - y).collect();
            let fwd = shift(&vec![0; dir.len()], dir, distance as isize);
            let back = shift(&vec![0; dir.len()], dir, -(distance as isize));
            if diff != fwd && diff != back {
                continue;
            }
            let (la, lb) = (grid.levels[a], grid.levels[b]);
            if la > 0 && lb > 0 {
                m[(la as usize - 1, lb as usize - 1)] += 1.0;
            }
        }
    }
    m
}

/// Sparse `(level, column) -> count` table.
pub type Sparse = BTreeMap<(usize, usize), u64>;

/// Run-length counts keyed by `(level, length)`: each candidate segment is
/// checked for uniformity and for maximality at both ends.
pub fn glrlm(grid: &LevelGrid, dir: &[isize]) -> Sparse {
    let mut out = Sparse::new();
    let longest = *grid.shape.iter().max().unwrap_or(&0);
    for k in 0..grid.levels.len() {
        let g = grid.levels[k];
        if g == 0 {
            continue;
        }
        let start = grid.coords(k);
        if grid.at(&shift(&start, dir, -1)) == g {
            continue;
        }
        for len in 1..=longest {
            let uniform = (0..len).all(|t| grid.at(&shift(&start, dir, t as isize)) == g);
            let closed = grid.at(&shift(&start, dir, len as isize)) != g;
            if uniform && closed {
                *out.entry((g as usize, len)).or_default() += 1;
            }
        }
    }
    out
}

/// Size-zone counts keyed by `(level, zone size)` from a union-find over
/// equal-level neighbors.
pub fn glszm(grid: &LevelGrid) -> Sparse {
    let n = grid.levels.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for a in 0..n {
        for b in 0..n {
            if a == b || grid.levels[a] == 0 || grid.levels[a] != grid.levels[b] {
                continue;
            }
            let (ca, cb) = (grid.coords(a), grid.coords(b));
            if ca.iter().zip(&cb).all(|(x, y)| (x - y).abs() <= 1) {
                let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let mut sizes: BTreeMap<usize, (u32, usize)> = BTreeMap::new();
    for k in 0..n {
        if grid.levels[k] > 0 {
            let r = root(&mut parent, k);
            sizes.entry(r).or_insert((grid.levels[k], 0)).1 += 1;
        }
    }
    let mut out = Sparse::new();
    for (level, size) in sizes.into_values() {
        *out.entry((level as usize, size)).or_default() += 1;
    }
    out
}

/// Dependence counts keyed by `(level, dependents + 1)`.
pub fn gldm(grid: &LevelGrid, alpha: u32) -> Sparse {
    let offsets = neighbor_offsets(grid.shape.len());
    let mut out = Sparse::new();
    for k in 0..grid.levels.len() {
        let g = grid.levels[k];
        if g == 0 {
            continue;
        }
        let c = grid.coords(k);
        let dependents = offsets
            .iter()
            .filter(|o| {
                let l = grid.at(&shift(&c, o, 1));
                l > 0 && l.abs_diff(g) <= alpha
            })
            .count();
        *out.entry((g as usize, dependents + 1)).or_default() += 1;
    }
    out
}

/// Neighborhood difference table: `(s_i, n_i)` per level.
pub fn ngtdm(grid: &LevelGrid) -> (Vec<f64>, Vec<u64>) {
    let offsets = neighbor_offsets(grid.shape.len());
    let mut s = vec![0.0; grid.num_levels];
    let mut n = vec![0u64; grid.num_levels];
    for k in 0..grid.levels.len() {
        let g = grid.levels[k];
        if g == 0 {
            continue;
        }
        let c = grid.coords(k);
        let neighbors: Vec<f64> =
            offsets.iter().map(|o| grid.at(&shift(&c, o, 1))).filter(|&l| l > 0).map(f64::from).collect();
        if neighbors.is_empty() {
            continue;
        }
        let mean = neighbors.iter().sum::<f64>() / neighbors.len() as f64;
        s[g as usize - 1] += (f64::from(g) - mean).abs();
        n[g as usize - 1] += 1;
    }
    (s, n)
}

/// Named feature values of one class.
pub type Features = BTreeMap<&'static str, f64>;

fn h(values: impl IntoIterator<Item = f64>) -> f64 {
    -values.into_iter().filter(|&v| v > 0.0).map(|v| v * v.log2()).sum::<f64>()
}

/// Co-occurrence features of one non-empty count matrix.
pub fn glcm_features(counts: &DMatrix<f64>) -> Features {
    let ng = counts.nrows();
    let p = counts / counts.sum();
    let px: Vec<f64> = (0..ng).map(|i| p.row(i).sum()).collect();
    let py: Vec<f64> = (0..ng).map(|j| p.column(j).sum()).collect();
    let lv = |i: usize| (i + 1) as f64;
    let cells = || (0..ng).flat_map(move |i| (0..ng).map(move |j| (i, j)));

    let mux: f64 = (0..ng).map(|i| lv(i) * px[i]).sum();
    let muy: f64 = (0..ng).map(|j| lv(j) * py[j]).sum();
    let sx = (0..ng).map(|i| (lv(i) - mux).powi(2) * px[i]).sum::<f64>().sqrt();
    let sy = (0..ng).map(|j| (lv(j) - muy).powi(2) * py[j]).sum::<f64>().sqrt();

    let mut pxpy = vec![0.0; 2 * ng + 1];
    let mut pxmy = vec![0.0; ng];
    for (i, j) in cells() {
        pxpy[i + j + 2] += p[(i, j)];
        pxmy[i.abs_diff(j)] += p[(i, j)];
    }
    let sum_over = |f: &dyn Fn(f64, f64, f64) -> f64| cells().map(|(i, j)| f(lv(i), lv(j), p[(i, j)])).sum::<f64>();

    let mut f = Features::new();
    let ac = sum_over(&|i, j, v| i * j * v);
    f.insert("Autocorrelation", ac);
    f.insert("JointAverage", mux);
    f.insert("ClusterProminence", sum_over(&|i, j, v| (i + j - mux - muy).powi(4) * v));
    f.insert("ClusterShade", sum_over(&|i, j, v| (i + j - mux - muy).powi(3) * v));
    f.insert("ClusterTendency", sum_over(&|i, j, v| (i + j - mux - muy).powi(2) * v));
    f.insert("Contrast", sum_over(&|i, j, v| (i - j).powi(2) * v));
    f.insert("Correlation", if sx * sy > 0.0 { (ac - mux * muy) / (sx * sy) } else { 1.0 });
    let da: f64 = pxmy.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    f.insert("DifferenceAverage", da);
    f.insert("DifferenceEntropy", h(pxmy.iter().copied()));
    f.insert("DifferenceVariance", pxmy.iter().enumerate().map(|(k, v)| (k as f64 - da).powi(2) * v).sum());
    f.insert("JointEnergy", p.iter().map(|v| v * v).sum());
    let hxy = h(p.iter().copied());
    f.insert("JointEntropy", hxy);
    let (hx, hy) = (h(px.iter().copied()), h(py.iter().copied()));
    let hxy1 = -cells().filter(|&(i, j)| p[(i, j)] > 0.0).map(|(i, j)| p[(i, j)] * (px[i] * py[j]).log2()).sum::<f64>();
    let hxy2 = h(cells().map(|(i, j)| px[i] * py[j]));
    f.insert("Imc1", if hx.max(hy) > 0.0 { (hxy - hxy1) / hx.max(hy) } else { 0.0 });
    f.insert("Imc2", if hxy2 - hxy > 1e-12 { (1.0 - (-2.0 * (hxy2 - hxy)).exp()).sqrt() } else { 0.0 });
    let n = ng as f64;
    f.insert("Idm", sum_over(&|i, j, v| v / (1.0 + (i - j).powi(2))));
    f.insert("Idmn", sum_over(&|i, j, v| v / (1.0 + (i - j).powi(2) / (n * n))));
    f.insert("Id", sum_over(&|i, j, v| v / (1.0 + (i - j).abs())));
    f.insert("Idn", sum_over(&|i, j, v| v / (1.0 + (i - j).abs() / n)));
    f.insert("InverseVariance", pxmy.iter().enumerate().skip(1).map(|(k, v)| v / (k * k) as f64).sum());
    f.insert("MaximumProbability", p.max());
    f.insert("SumAverage", pxpy.iter().enumerate().map(|(k, v)| k as f64 * v).sum());
    f.insert("SumEntropy", h(pxpy.iter().copied()));
    f.insert("SumSquares", sum_over(&|i, _, v| (i - mux).powi(2) * v));
    f.insert("MCC", mcc(&p, &px, &py));
    f
}

/// Maximal correlation coefficient from the eigenvalues of the
/// non-symmetric `Q` restricted to occupied levels.
fn mcc(p: &DMatrix<f64>, px: &[f64], py: &[f64]) -> f64 {
    let rows: Vec<usize> = (0..px.len()).filter(|&i| px[i] > 0.0).collect();
    let cols: Vec<usize> = (0..py.len()).filter(|&k| py[k] > 0.0).collect();
    if rows.len() < 2 {
        return 1.0;
    }
    let q = DMatrix::from_fn(rows.len(), rows.len(), |a, b| {
        let (i, j) = (rows[a], rows[b]);
        cols.iter().map(|&k| p[(i, k)] * p[(j, k)] / (px[i] * py[k])).sum::<f64>()
    });
    let mut eig: Vec<f64> = q.complex_eigenvalues().iter().map(|z| z.re).collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    if eig[1] < 1e-12 {
        0.0
    } else {
        eig[1].sqrt()
    }
}

/// Statistics shared by run, zone and dependence tables, keyed by the
/// run-length names; `voxels` is the denominator of the percentage.
pub fn size_features(table: &Sparse, voxels: usize) -> Features {
    let nz: f64 = table.values().map(|&c| c as f64).sum();
    let mut by_level: BTreeMap<usize, f64> = BTreeMap::new();
    let mut by_size: BTreeMap<usize, f64> = BTreeMap::new();
    for (&(i, j), &c) in table {
        *by_level.entry(i).or_default() += c as f64;
        *by_size.entry(j).or_default() += c as f64;
    }
    let mean_of = |w: &dyn Fn(f64, f64) -> f64| {
        table.iter().map(|(&(i, j), &c)| c as f64 * w(i as f64, j as f64)).sum::<f64>() / nz
    };
    let mu_i = mean_of(&|i, _| i);
    let mu_j = mean_of(&|_, j| j);
    let gln = by_level.values().map(|v| v * v).sum::<f64>() / nz;
    let rln = by_size.values().map(|v| v * v).sum::<f64>() / nz;

    let mut f = Features::new();
    f.insert("ShortRunEmphasis", mean_of(&|_, j| 1.0 / (j * j)));
    f.insert("LongRunEmphasis", mean_of(&|_, j| j * j));
    f.insert("GrayLevelNonUniformity", gln);
    f.insert("GrayLevelNonUniformityNormalized", gln / nz);
    f.insert("RunLengthNonUniformity", rln);
    f.insert("RunLengthNonUniformityNormalized", rln / nz);
    f.insert("RunPercentage", nz / voxels as f64);
    f.insert("GrayLevelVariance", mean_of(&|i, _| (i - mu_i).powi(2)));
    f.insert("RunVariance", mean_of(&|_, j| (j - mu_j).powi(2)));
    f.insert("RunEntropy", h(table.values().map(|&c| c as f64 / nz)));
    f.insert("LowGrayLevelRunEmphasis", mean_of(&|i, _| 1.0 / (i * i)));
    f.insert("HighGrayLevelRunEmphasis", mean_of(&|i, _| i * i));
    f.insert("ShortRunLowGrayLevelEmphasis", mean_of(&|i, j| 1.0 / (i * i * j * j)));
    f.insert("ShortRunHighGrayLevelEmphasis", mean_of(&|i, j| i * i / (j * j)));
    f.insert("LongRunLowGrayLevelEmphasis", mean_of(&|i, j| j * j / (i * i)));
    f.insert("LongRunHighGrayLevelEmphasis", mean_of(&|i, j| i * i * j * j));
    f
}

fn renamed(src: &Features, pairs: &[(&'static str, &'static str)]) -> Features {
    pairs.iter().map(|&(to, from)| (to, src[from])).collect()
}

pub fn glrlm_features(table: &Sparse, grid: &LevelGrid) -> Features {
    size_features(table, grid.roi_count())
}

pub fn glszm_features(table: &Sparse, grid: &LevelGrid) -> Features {
    renamed(
        &size_features(table, grid.roi_count()),
        &[
            ("SmallAreaEmphasis", "ShortRunEmphasis"),
            ("LargeAreaEmphasis", "LongRunEmphasis"),
            ("GrayLevelNonUniformity", "GrayLevelNonUniformity"),
            ("GrayLevelNonUniformityNormalized", "GrayLevelNonUniformityNormalized"),
            ("SizeZoneNonUniformity", "RunLengthNonUniformity"),
            ("SizeZoneNonUniformityNormalized", "RunLengthNonUniformityNormalized"),
            ("ZonePercentage", "RunPercentage"),
            ("GrayLevelVariance", "GrayLevelVariance"),
            ("ZoneVariance", "RunVariance"),
            ("ZoneEntropy", "RunEntropy"),
            ("LowGrayLevelZoneEmphasis", "LowGrayLevelRunEmphasis"),
            ("HighGrayLevelZoneEmphasis", "HighGrayLevelRunEmphasis"),
            ("SmallAreaLowGrayLevelEmphasis", "ShortRunLowGrayLevelEmphasis"),
            ("SmallAreaHighGrayLevelEmphasis", "ShortRunHighGrayLevelEmphasis"),
            ("LargeAreaLowGrayLevelEmphasis", "LongRunLowGrayLevelEmphasis"),
            ("LargeAreaHighGrayLevelEmphasis", "LongRunHighGrayLevelEmphasis"),
        ],
    )
}

pub fn gldm_features(table: &Sparse, grid: &LevelGrid) -> Features {
    renamed(
        &size_features(table, grid.roi_count()),
        &[
            ("SmallDependenceEmphasis", "ShortRunEmphasis"),
            ("LargeDependenceEmphasis", "LongRunEmphasis"),
            ("GrayLevelNonUniformity", "GrayLevelNonUniformity"),
            ("DependenceNonUniformity", "RunLengthNonUniformity"),
            ("DependenceNonUniformityNormalized", "RunLengthNonUniformityNormalized"),
            ("GrayLevelVariance", "GrayLevelVariance"),
            ("DependenceVariance", "RunVariance"),
            ("DependenceEntropy", "RunEntropy"),
            ("LowGrayLevelEmphasis", "LowGrayLevelRunEmphasis"),
            ("HighGrayLevelEmphasis", "HighGrayLevelRunEmphasis"),
            ("SmallDependenceLowGrayLevelEmphasis", "ShortRunLowGrayLevelEmphasis"),
            ("SmallDependenceHighGrayLevelEmphasis", "ShortRunHighGrayLevelEmphasis"),
            ("LargeDependenceLowGrayLevelEmphasis", "LongRunLowGrayLevelEmphasis"),
            ("LargeDependenceHighGrayLevelEmphasis", "LongRunHighGrayLevelEmphasis"),
        ],
    )
}

pub fn ngtdm_features(s: &[f64], n: &[u64]) -> Features {
    let nvp: f64 = n.iter().map(|&c| c as f64).sum();
    let occ: Vec<usize> = (0..n.len()).filter(|&i| n[i] > 0).collect();
    let p = |i: usize| n[i] as f64 / nvp;
    let lv = |i: usize| (i + 1) as f64;
    let ngp = occ.len() as f64;
    let s_sum: f64 = occ.iter().map(|&i| s[i]).sum();
    let ps: f64 = occ.iter().map(|&i| p(i) * s[i]).sum();
    let pairs = || occ.iter().flat_map(|&i| occ.iter().map(move |&j| (i, j)));

    let mut f = Features::new();
    f.insert("Coarseness", if ps > 0.0 { 1.0 / ps } else { 1e6 });
    let spread: f64 = pairs().map(|(i, j)| p(i) * p(j) * (lv(i) - lv(j)).powi(2)).sum();
    f.insert("Contrast", if occ.len() > 1 { spread / (ngp * (ngp - 1.0)) * s_sum / nvp } else { 0.0 });
    let busy: f64 = pairs().map(|(i, j)| (lv(i) * p(i) - lv(j) * p(j)).abs()).sum();
    f.insert("Busyness", if busy > 0.0 { ps / busy } else { 0.0 });
    let cx: f64 = pairs().map(|(i, j)| (lv(i) - lv(j)).abs() * (p(i) * s[i] + p(j) * s[j]) / (p(i) + p(j))).sum();
    f.insert("Complexity", cx / nvp);
    let st: f64 = pairs().map(|(i, j)| (p(i) + p(j)) * (lv(i) - lv(j)).powi(2)).sum();
    f.insert("Strength", if s_sum > 0.0 { st / s_sum } else { 0.0 });
    f
}

/// Element-wise mean of per-direction feature maps.
pub fn average(parts: &[Features]) -> Features {
    let mut out = Features::new();
    for part in parts {
        for (&k, &v) in part {
            *out.entry(k).or_default() += v / parts.len() as f64;
        }
    }
    out
}

/// All texture classes of a grid, keyed `class.Name`, with co-occurrence
/// and run-length features averaged over the unique directions.
pub fn texture_features(grid: &LevelGrid, alpha: u32, distance: usize) -> BTreeMap<String, f64> {
    let dirs = unique_directions(grid.shape.len());
    let mut out = BTreeMap::new();
    let mut put = |class: &str, f: Features| {
        for (k, v) in f {
            out.insert(format!("{class}.{k}"), v);
        }
    };
    let co: Vec<Features> =
        dirs.iter().map(|d| glcm(grid, d, distance)).filter(|m| m.sum() > 0.0).map(|m| glcm_features(&m)).collect();
    put("glcm", average(&co));
    let runs: Vec<Features> = dirs.iter().map(|d| glrlm_features(&glrlm(grid, d), grid)).collect();
    put("glrlm", average(&runs));
    put("glszm", glszm_features(&glszm(grid), grid));
    let (s, n) = ngtdm(grid);
    put("ngtdm", ngtdm_features(&s, &n));
    put("gldm", gldm_features(&gldm(grid, alpha), grid));
    out
}
