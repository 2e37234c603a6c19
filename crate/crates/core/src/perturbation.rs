//! Gaussian noise and blur at percentage scales, dataset perturbation, and
//! the distance-versus-scale validation sweep.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FrdError, Result};
use crate::features::{extract_entry, FeatureConfig};
use crate::fingerprint::{fingerprint, stable_hash};
use crate::frechet::{frd, FeatureMatrix, FrdOptions};
use crate::grid::ImageGrid;
use crate::io::{load_entry, save_like, write_manifest, DatasetManifest, LoadedImage, ManifestEntry};
use crate::plot::{Chart, Series};
use crate::scalar::Real;

pub const DEFAULT_BLUR_DIVISOR: f64 = 4.0;
pub const DEFAULT_SCALES: [f64; 5] = [1.0, 5.0, 10.0, 20.0, 50.0];
pub const SWEEP_HEADER: [&str; 4] = ["kind", "scale_pct", "dims", "frd"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbationKind {
    Noise,
    Blur,
}

impl PerturbationKind {
    pub const ALL: [Self; 2] = [Self::Noise, Self::Blur];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Noise => "noise",
            Self::Blur => "blur",
        }
    }
}

impl fmt::Display for PerturbationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PerturbationKind {
    type Err = FrdError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "noise" => Ok(Self::Noise),
            "blur" => Ok(Self::Blur),
            other => Err(FrdError::InvalidParameter(format!("unknown perturbation kind \"{other}\""))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub kind: PerturbationKind,
    pub scale_pct: f64,
    pub seed: u64,
    pub blur_divisor: f64,
}

impl PerturbationSpec {
    pub fn new(kind: PerturbationKind, scale_pct: f64, seed: u64) -> Self {
        Self { kind, scale_pct, seed, blur_divisor: DEFAULT_BLUR_DIVISOR }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=100.0).contains(&self.scale_pct) {
            return Err(FrdError::InvalidParameter(format!("scale {} is outside [0, 100]", self.scale_pct)));
        }
        if !(self.blur_divisor > 0.0 && self.blur_divisor.is_finite()) {
            return Err(FrdError::InvalidParameter(format!("blur divisor {} must be positive", self.blur_divisor)));
        }
        Ok(())
    }

    /// Seed for one image: the base seed mixed with a hash of its id.
    pub fn image_seed(&self, image_id: &str) -> u64 {
        self.seed ^ stable_hash(image_id)
    }

    /// Applies the perturbation to one image.
    pub fn apply<T: Real>(&self, image: &ImageGrid<T>, image_id: &str) -> Result<Perturbed<T>> {
        self.validate()?;
        Ok(match self.kind {
            PerturbationKind::Noise => gaussian_noise(image, self.scale_pct, self.image_seed(image_id)),
            PerturbationKind::Blur => {
                Perturbed { image: gaussian_blur(image, self.scale_pct, self.blur_divisor), degenerate: false }
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Perturbed<T> {
    pub image: ImageGrid<T>,
    /// Set when the input had no intensity range and was returned unchanged.
    pub degenerate: bool,
}

/// Adds N(0, sigma^2) noise with `sigma = scale_pct / 100 * (max - min)`,
/// clamping the result to the input range.
pub fn gaussian_noise<T: Real>(image: &ImageGrid<T>, scale_pct: f64, seed: u64) -> Perturbed<T> {
    let (lo, hi) = image.value_range();
    if hi <= lo {
        return Perturbed { image: image.clone(), degenerate: true };
    }
    let sigma = scale_pct / 100.0 * (hi - lo).as_f64();
    if sigma == 0.0 {
        return Perturbed { image: image.clone(), degenerate: false };
    }
    let normal = Normal::new(0.0, sigma).expect("finite positive sigma");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = image.data().iter().map(|&v| (v + T::lit(rng.sample(normal))).max(lo).min(hi)).collect();
    let image = ImageGrid::new(image.shape().to_vec(), data).expect("clamped noise stays finite");
    Perturbed { image, degenerate: false }
}

/// Normalized Gaussian kernel of radius `ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as usize;
    let raw: Vec<f64> = (0..=2 * radius)
        .map(|k| {
            let d = k as f64 - radius as f64;
            (-d * d / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Separable Gaussian blur with `sigma = scale_pct / 100 * min_extent / divisor`
/// and replicated borders.
pub fn gaussian_blur<T: Real>(image: &ImageGrid<T>, scale_pct: f64, divisor: f64) -> ImageGrid<T> {
    let min_extent = *image.shape().iter().min().expect("non-empty shape") as f64;
    let sigma = scale_pct / 100.0 * min_extent / divisor;
    if sigma <= 0.0 {
        return image.clone();
    }
    blur_with_sigma(image, sigma)
}

/// Separable Gaussian blur with an explicit `sigma` in voxels.
pub fn blur_with_sigma<T: Real>(image: &ImageGrid<T>, sigma: f64) -> ImageGrid<T> {
    let kernel: Vec<T> = gaussian_kernel(sigma).into_iter().map(T::lit).collect();
    let radius = (kernel.len() / 2) as isize;
    let shape = image.shape().to_vec();
    let mut data = image.data().to_vec();
    let mut line = Vec::new();
    for axis in 0..shape.len() {
        let stride: usize = shape[axis + 1..].iter().product();
        let len = shape[axis];
        let outer: usize = shape[..axis].iter().product();
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * len * stride + inner;
                line.clear();
                line.extend((0..len).map(|k| data[base + k * stride]));
                for k in 0..len {
                    let mut acc = T::zero();
                    for (t, &w) in kernel.iter().enumerate() {
                        let src = (k as isize + t as isize - radius).clamp(0, len as isize - 1) as usize;
                        acc = acc + w * line[src];
                    }
                    data[base + k * stride] = acc;
                }
            }
        }
    }
    ImageGrid::new(shape, data).expect("blur of finite data is finite")
}

/// Result of [`perturb_dataset`].
#[derive(Debug, Clone)]
pub struct PerturbOutcome {
    pub manifest: DatasetManifest,
    pub manifest_path: PathBuf,
    /// Image ids returned unchanged because they had no intensity range.
    pub degenerate_ids: Vec<String>,
}

fn file_stem_for(id: &str) -> String {
    id.chars().map(|c| if c.is_ascii_alphanumeric() || "-_.".contains(c) { c } else { '_' }).collect()
}

fn extension_of(path: &Path) -> &'static str {
    let name = path.file_name().map(|n| n.to_string_lossy().to_ascii_lowercase()).unwrap_or_default();
    if name.ends_with(".nii.gz") {
        "nii.gz"
    } else if name.ends_with(".nii") {
        "nii"
    } else {
        "png"
    }
}

/// Perturbs every image of `manifest` into `out_dir/images`, copies masks
/// byte-for-byte into `out_dir/masks`, and writes `out_dir/manifest.csv`.
pub fn perturb_dataset(manifest: &DatasetManifest, spec: &PerturbationSpec, out_dir: &Path) -> Result<PerturbOutcome> {
    spec.validate()?;
    let (img_dir, mask_dir) = (out_dir.join("images"), out_dir.join("masks"));
    for d in [&img_dir, &mask_dir] {
        std::fs::create_dir_all(d).map_err(|e| FrdError::io(d, e))?;
    }
    let mut used = HashSet::new();
    let stems: Vec<String> = manifest
        .entries
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let stem = file_stem_for(&e.image_id);
            if used.insert(stem.to_ascii_lowercase()) {
                stem
            } else {
                format!("{stem}_{k}")
            }
        })
        .collect();

    let results = manifest
        .entries
        .par_iter()
        .zip(&stems)
        .map(|(entry, stem)| {
            let run = || -> Result<(ManifestEntry, bool)> {
                let loaded = load_entry::<f64>(entry)?;
                let out = spec.apply(&loaded.image, &entry.image_id)?;
                let image_path = img_dir.join(format!("{stem}.{}", extension_of(&entry.image_path)));
                save_like(&image_path, &out.image, &loaded.format)?;
                let mask_path = match &entry.mask_path {
                    Some(src) => {
                        let dst = mask_dir.join(format!("{stem}.{}", extension_of(src)));
                        std::fs::copy(src, &dst).map_err(|e| FrdError::io(src, e))?;
                        Some(dst)
                    }
                    None => None,
                };
                let new =
                    ManifestEntry { image_id: entry.image_id.clone(), image_path, mask_path, bbox: entry.bbox.clone() };
                Ok((new, out.degenerate))
            };
            run().map_err(|e| e.for_image(&entry.image_id))
        })
        .collect::<Result<Vec<_>>>()?;

    let degenerate_ids = results.iter().filter(|(_, d)| *d).map(|(e, _)| e.image_id.clone()).collect();
    let manifest = DatasetManifest::new(results.into_iter().map(|(e, _)| e).collect())?;
    let manifest_path = out_dir.join("manifest.csv");
    write_manifest(&manifest_path, &manifest)?;
    Ok(PerturbOutcome { manifest, manifest_path, degenerate_ids })
}

/// Settings of a validation sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub kinds: Vec<PerturbationKind>,
    pub scales: Vec<f64>,
    pub features: FeatureConfig,
    pub frd: FrdOptions,
    pub seed: u64,
    pub blur_divisor: f64,
    pub crop: bool,
}

impl SweepConfig {
    pub fn new(features: FeatureConfig) -> Self {
        Self {
            kinds: PerturbationKind::ALL.to_vec(),
            scales: DEFAULT_SCALES.to_vec(),
            features,
            frd: FrdOptions::default(),
            seed: 0,
            blur_divisor: DEFAULT_BLUR_DIVISOR,
            crop: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.scales.is_empty() || self.kinds.is_empty() {
            return Err(FrdError::InvalidParameter("sweep needs at least one kind and one scale".into()));
        }
        if self.scales.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FrdError::InvalidParameter(format!(
                "sweep scales {:?} must be strictly increasing",
                self.scales
            )));
        }
        for &s in &self.scales {
            PerturbationSpec { kind: PerturbationKind::Noise, scale_pct: s, seed: 0, blur_divisor: self.blur_divisor }
                .validate()?;
        }
        self.features.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kind: PerturbationKind,
    pub scale_pct: f64,
    pub dims: usize,
    pub frd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub config_fingerprint: String,
}

impl SweepResult {
    /// First adjacent pair, per kind, where the distance fails to increase.
    pub fn first_violation(&self) -> Option<(SweepRow, SweepRow)> {
        let mut kinds: Vec<PerturbationKind> = self.rows.iter().map(|r| r.kind).collect();
        kinds.dedup();
        kinds.into_iter().find_map(|kind| {
            let rows: Vec<&SweepRow> = self.rows.iter().filter(|r| r.kind == kind).collect();
            rows.windows(2).find(|w| w[1].frd <= w[0].frd).map(|w| (*w[0], *w[1]))
        })
    }

    pub fn is_monotone(&self) -> bool {
        self.first_violation().is_none()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(SWEEP_HEADER)?;
        for r in &self.rows {
            w.write_record([
                r.kind.to_string(),
                r.scale_pct.to_string(),
                r.dims.to_string(),
                format!("{:.16e}", r.frd),
            ])?;
        }
        w.flush().map_err(|e| FrdError::io(path, e))
    }

    /// Log-log chart of distance against scale, one line per kind.
    pub fn chart(&self) -> Chart {
        let mut kinds: Vec<PerturbationKind> = self.rows.iter().map(|r| r.kind).collect();
        kinds.dedup();
        let dims = self.rows.first().map_or(0, |r| r.dims);
        Chart {
            title: format!("FRD by perturbation scale ({dims}D)"),
            description: Some(format!("config_fingerprint {}", self.config_fingerprint)),
            x_label: "perturbation scale (%)".into(),
            y_label: "FRD".into(),
            log_x: true,
            log_y: true,
            x_categories: None,
            series: kinds
                .into_iter()
                .map(|k| Series {
                    label: format!("{dims}D {k}"),
                    points: self.rows.iter().filter(|r| r.kind == k).map(|r| (r.scale_pct, r.frd, 4.0)).collect(),
                })
                .collect(),
        }
    }
}

/// Extracts features of the clean set once, then for each kind and scale
/// perturbs the set in memory and measures FRD(clean, perturbed).
pub fn validation_sweep(manifest: &DatasetManifest, config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let loaded: Vec<LoadedImage<f64>> = manifest.entries.par_iter().map(load_entry).collect::<Result<_>>()?;
    let extract_set = |images: &[LoadedImage<f64>]| -> Result<FeatureMatrix<f64>> {
        let rows =
            images.par_iter().map(|l| extract_entry(l, &config.features, config.crop)).collect::<Result<Vec<_>>>()?;
        FeatureMatrix::from_vectors(rows)
    };
    let clean = extract_set(&loaded)?;
    let mut rows = Vec::new();
    for &kind in &config.kinds {
        for &scale_pct in &config.scales {
            let spec = PerturbationSpec { kind, scale_pct, seed: config.seed, blur_divisor: config.blur_divisor };
            let cell = || -> Result<f64> {
                let perturbed = loaded
                    .par_iter()
                    .map(|l| {
                        let out = spec.apply(&l.image, &l.image_id)?;
                        Ok(LoadedImage { image: out.image, ..l.clone() })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(frd(&clean, &extract_set(&perturbed)?, &config.frd)?.frd)
            };
            let frd = cell().map_err(|e| FrdError::InvalidParameter(format!("sweep cell {kind} {scale_pct}%: {e}")))?;
            rows.push(SweepRow { kind, scale_pct, dims: manifest.dims, frd });
        }
    }
    Ok(SweepResult { rows, config_fingerprint: fingerprint(config) })
}
