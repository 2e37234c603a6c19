//! Deterministic synthetic phantoms: a smooth textured background with one
//! hyperintense ellipsoidal lesion and its mask.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{FrdError, Result};
use crate::fingerprint::stable_hash;
use crate::grid::{ImageGrid, RoiMask};
use crate::io::{
    save_image_2d, save_mask, save_volume_3d, write_manifest, BoundingBox, DatasetManifest, ManifestEntry,
    NiftiDatatype, PngDepth,
};
use crate::perturbation::blur_with_sigma;

pub const CASE_TABLE_HEADER: [&str; 4] = ["case_id", "phase", "image_path", "mask_path"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub count: usize,
    pub shape: Vec<usize>,
    /// Lesion semi-axis range in voxels.
    pub radius_range: (f64, f64),
    /// Lesion intensity relative to the background under it.
    pub lesion_boost: f64,
    pub background_level: f64,
    /// Relative amplitude of the low-frequency background variation.
    pub background_amplitude: f64,
    /// Relative standard deviation of the multi-scale smoothed-noise texture.
    pub texture_amplitude: f64,
    /// Smoothing widths (voxels) of the texture octaves; each octave
    /// contributes equal variance.
    pub texture_scales: Vec<f64>,
    /// Relative standard deviation of the fine per-voxel noise.
    pub fine_noise: f64,
    pub seed: u64,
}

impl PhantomSpec {
    pub fn new(count: usize, shape: Vec<usize>, seed: u64) -> Self {
        let min_extent = shape.iter().copied().min().unwrap_or(0) as f64;
        Self {
            count,
            shape,
            radius_range: (min_extent * 0.1, min_extent * 0.25),
            lesion_boost: 2.0,
            background_level: 1000.0,
            background_amplitude: 0.05,
            texture_amplitude: 0.1,
            texture_scales: [64.0, 32.0, 16.0, 8.0].iter().map(|d| min_extent / d).collect(),
            fine_noise: 0.005,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(FrdError::InvalidParameter(msg));
        if self.count == 0 {
            return bad("phantom count must be at least 1".into());
        }
        if !(2..=3).contains(&self.shape.len()) || self.shape.contains(&0) {
            return bad(format!("phantom shape {:?} must have 2 or 3 non-zero extents", self.shape));
        }
        let min_extent = *self.shape.iter().min().expect("non-empty") as f64;
        let (r0, r1) = self.radius_range;
        if !(r0 >= 1.0 && r0 <= r1 && r1 < min_extent / 2.0) {
            return bad(format!("radius range ({r0}, {r1}) must satisfy 1 <= min <= max < {}", min_extent / 2.0));
        }
        if !(self.lesion_boost > 0.0 && self.background_level > 0.0) {
            return bad("lesion boost and background level must be positive".into());
        }
        if !(0.0..1.0).contains(&self.background_amplitude) || self.fine_noise < 0.0 || self.texture_amplitude < 0.0 {
            return bad("background amplitude must be in [0, 1) and noise amplitudes non-negative".into());
        }
        if self.texture_scales.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return bad(format!("texture scales {:?} must be positive", self.texture_scales));
        }
        Ok(())
    }

    pub fn dims(&self) -> usize {
        self.shape.len()
    }

    fn rng_for(&self, label: &str) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ stable_hash(label))
    }

    fn extension(&self) -> &'static str {
        if self.dims() == 2 {
            "png"
        } else {
            "nii.gz"
        }
    }
}

/// One phantom held in memory, before any phase-dependent scaling.
#[derive(Debug, Clone)]
pub struct Phantom {
    pub image_id: String,
    pub background: ImageGrid<f64>,
    pub mask: RoiMask,
    pub bbox: BoundingBox,
}

struct Wave {
    freq: Vec<f64>,
    phase: f64,
    weight: f64,
}

/// Builds the background and lesion of phantom `image_id`.
pub fn make_phantom(spec: &PhantomSpec, image_id: &str) -> Result<Phantom> {
    spec.validate()?;
    let mut rng = spec.rng_for(image_id);
    let shape = spec.shape.clone();
    let waves: Vec<Wave> = (0..6)
        .map(|_| Wave {
            freq: shape.iter().map(|_| rng.random_range(0.5..3.0)).collect(),
            phase: rng.random_range(0.0..TAU),
            weight: rng.random_range(0.5..1.0),
        })
        .collect();
    let total_weight: f64 = waves.iter().map(|w| w.weight).sum();
    let (r0, r1) = spec.radius_range;
    let semi: Vec<f64> = shape.iter().map(|_| rng.random_range(r0..=r1)).collect();
    let center: Vec<f64> = shape
        .iter()
        .zip(&semi)
        .map(|(&e, &r)| {
            let (lo, hi) = (r, e as f64 - 1.0 - r);
            if hi > lo {
                rng.random_range(lo..hi)
            } else {
                (e as f64 - 1.0) / 2.0
            }
        })
        .collect();
    let normal = Normal::new(0.0, spec.fine_noise.max(0.0) * spec.background_level).expect("finite sigma");
    let amp = spec.background_amplitude * spec.background_level;

    let inside = |c: &[usize]| -> bool {
        c.iter().zip(&center).zip(&semi).map(|((&x, &m), &r)| ((x as f64 - m) / r).powi(2)).sum::<f64>() <= 1.0
    };
    let texture = smoothed_texture(&shape, &spec.texture_scales, &mut rng)?;
    let tex_amp = spec.texture_amplitude * spec.background_level;
    let background = ImageGrid::from_fn(shape.clone(), |c| {
        let smooth: f64 = waves
            .iter()
            .map(|w| {
                let arg: f64 = c.iter().zip(&w.freq).zip(&shape).map(|((&x, &f), &e)| f * x as f64 / e as f64).sum();
                w.weight * (TAU * arg + w.phase).cos()
            })
            .sum();
        let noise = if spec.fine_noise > 0.0 { rng.sample(normal) } else { 0.0 };
        let t = texture.as_ref().map_or(0.0, |t| t.get(c));
        spec.background_level + amp * smooth / total_weight + tex_amp * t + noise
    })?;
    let mask = RoiMask::from_fn(shape.clone(), inside)?;
    let geom = background.geometry();
    let (mut lo, mut hi) = (shape.clone(), vec![0; shape.len()]);
    for (i, _) in mask.members().iter().enumerate().filter(|(_, &m)| m) {
        for (axis, &x) in geom.coords(i).iter().enumerate() {
            lo[axis] = lo[axis].min(x);
            hi[axis] = hi[axis].max(x + 1);
        }
    }
    let bbox = BoundingBox::new(lo, hi)?;
    Ok(Phantom { image_id: image_id.to_owned(), background, mask, bbox })
}

/// Sum of white-noise fields blurred at each scale, each octave rescaled to
/// unit variance, the total scaled to unit variance.
fn smoothed_texture(shape: &[usize], scales: &[f64], rng: &mut ChaCha8Rng) -> Result<Option<ImageGrid<f64>>> {
    if scales.is_empty() {
        return Ok(None);
    }
    let len: usize = shape.iter().product();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut total = vec![0.0; len];
    for &scale in scales {
        let white = ImageGrid::new(shape.to_vec(), (0..len).map(|_| rng.sample(normal)).collect())?;
        let smooth = blur_with_sigma(&white, scale);
        let sd = standard_deviation(smooth.data());
        for (t, &v) in total.iter_mut().zip(smooth.data()) {
            *t += if sd > 0.0 { v / sd } else { 0.0 };
        }
    }
    let sd = standard_deviation(&total);
    Ok(Some(ImageGrid::new(shape.to_vec(), total.iter().map(|&v| if sd > 0.0 { v / sd } else { 0.0 }).collect())?))
}

fn standard_deviation(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

impl Phantom {
    /// Image with the lesion raised to `boost * multiplier` times the background.
    pub fn render(&self, boost: f64, multiplier: f64) -> Result<ImageGrid<f64>> {
        let gain = boost * multiplier;
        let data = self
            .background
            .data()
            .iter()
            .enumerate()
            .map(|(i, &v)| if self.mask.contains(i) { v * gain } else { v })
            .collect();
        ImageGrid::new(self.background.shape().to_vec(), data)
    }
}

fn save_image(path: &Path, image: &ImageGrid<f64>) -> Result<()> {
    match image.dims() {
        2 => save_image_2d(path, image, PngDepth::Sixteen),
        _ => save_volume_3d(path, image, NiftiDatatype::Float32),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| FrdError::io(dir, e))
}

/// Writes `count` phantoms with masks to `out_dir` plus `manifest.csv`.
pub fn generate_phantoms(spec: &PhantomSpec, out_dir: &Path) -> Result<DatasetManifest> {
    spec.validate()?;
    let (img_dir, mask_dir) = (out_dir.join("images"), out_dir.join("masks"));
    ensure_dir(&img_dir)?;
    ensure_dir(&mask_dir)?;
    let ext = spec.extension();
    let mut entries = Vec::with_capacity(spec.count);
    for k in 0..spec.count {
        let id = format!("phantom_{k:04}");
        let p = make_phantom(spec, &id)?;
        let image_path = img_dir.join(format!("{id}.{ext}"));
        let mask_path = mask_dir.join(format!("{id}.{ext}"));
        save_image(&image_path, &p.render(spec.lesion_boost, 1.0)?)?;
        save_mask(&mask_path, &p.mask)?;
        entries.push(ManifestEntry { image_id: id, image_path, mask_path: Some(mask_path), bbox: Some(p.bbox) });
    }
    let manifest = DatasetManifest::new(entries)?;
    write_manifest(&out_dir.join("manifest.csv"), &manifest)?;
    Ok(manifest)
}

/// One row of a kinetics case table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseTableRow {
    pub case_id: String,
    pub phase: String,
    pub image_path: PathBuf,
    pub mask_path: Option<PathBuf>,
}

/// Phase labels `pre, P1, P2, ...` for `n` phases.
pub fn phase_labels(n: usize) -> Vec<String> {
    (0..n).map(|k| if k == 0 { "pre".to_owned() } else { format!("P{k}") }).collect()
}

/// Writes `count` cases, each with one image per multiplier whose lesion is
/// scaled by that multiplier, and the case table `out_dir/cases.csv`.
/// Each phase gets fresh fine noise drawn from a seed derived from the case
/// and phase.
pub fn generate_phase_series(
    spec: &PhantomSpec,
    multipliers: &[f64],
    out_dir: &Path,
) -> Result<(PathBuf, Vec<CaseTableRow>)> {
    spec.validate()?;
    if multipliers.is_empty() || multipliers.iter().any(|&m| !(m > 0.0 && m.is_finite())) {
        return Err(FrdError::InvalidParameter(format!("phase multipliers {multipliers:?} must be positive")));
    }
    let case_dir = out_dir.join("cases");
    ensure_dir(&case_dir)?;
    let ext = spec.extension();
    let labels = phase_labels(multipliers.len());
    let mut rows = Vec::new();
    for k in 0..spec.count {
        let case_id = format!("case_{k:04}");
        let p = make_phantom(spec, &case_id)?;
        let mask_path = case_dir.join(format!("{case_id}_mask.{ext}"));
        save_mask(&mask_path, &p.mask)?;
        for (label, &m) in labels.iter().zip(multipliers) {
            let mut rng = spec.rng_for(&format!("{case_id}/{label}"));
            let sigma = spec.fine_noise * spec.background_level;
            let base = p.render(spec.lesion_boost, m)?;
            let data = base
                .data()
                .iter()
                .map(|&v| if sigma > 0.0 { v + rng.sample(Normal::new(0.0, sigma).expect("finite sigma")) } else { v })
                .collect();
            let image = ImageGrid::new(base.shape().to_vec(), data)?;
            let image_path = case_dir.join(format!("{case_id}_{label}.{ext}"));
            save_image(&image_path, &image)?;
            rows.push(CaseTableRow {
                case_id: case_id.clone(),
                phase: label.clone(),
                image_path,
                mask_path: Some(mask_path.clone()),
            });
        }
    }
    let table = out_dir.join("cases.csv");
    write_case_table(&table, &rows)?;
    Ok((table, rows))
}

/// Writes a case table; paths under the table's folder are stored relative.
pub fn write_case_table(path: &Path, rows: &[CaseTableRow]) -> Result<()> {
    let base = path.parent().unwrap_or(Path::new(""));
    let rel = |p: &Path| p.strip_prefix(base).unwrap_or(p).to_string_lossy().into_owned();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CASE_TABLE_HEADER)?;
    for r in rows {
        w.write_record([
            r.case_id.clone(),
            r.phase.clone(),
            rel(&r.image_path),
            r.mask_path.as_deref().map(rel).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| FrdError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::load_manifest;

    #[test]
    fn phantom_is_deterministic_and_lesion_is_brighter() {
        let spec = PhantomSpec::new(1, vec![64, 64], 7);
        let a = make_phantom(&spec, "x").unwrap();
        let b = make_phantom(&spec, "x").unwrap();
        assert_eq!(a.background, b.background);
        assert_ne!(a.background, make_phantom(&spec, "y").unwrap().background);
        let img = a.render(2.0, 1.0).unwrap();
        let (mut inside, mut outside) = ((0.0, 0), (0.0, 0));
        for (i, &v) in img.data().iter().enumerate() {
            let acc = if a.mask.contains(i) { &mut inside } else { &mut outside };
            acc.0 += v;
            acc.1 += 1;
        }
        let ratio = (inside.0 / inside.1 as f64) / (outside.0 / outside.1 as f64);
        assert!((ratio - 2.0).abs() < 0.2, "ratio {ratio}");
        for (i, &m) in a.mask.members().iter().enumerate() {
            let c = img.geometry().coords(i);
            let in_box = c.iter().enumerate().all(|(k, &x)| x >= a.bbox.lo()[k] && x < a.bbox.hi()[k]);
            assert!(!m || in_box);
        }
    }

    #[test]
    fn generated_dataset_round_trips_through_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let spec = PhantomSpec::new(3, vec![12, 12, 12], 1);
        let m = generate_phantoms(&spec, dir.path()).unwrap();
        assert_eq!(m.len(), 3);
        assert_eq!(m.dims, 3);
        assert_eq!(load_manifest(&dir.path().join("manifest.csv")).unwrap(), m);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = PhantomSpec::new(1, vec![16, 16], 0);
        spec.radius_range = (2.0, 8.0);
        assert!(spec.validate().is_err());
        spec.radius_range = (2.0, 4.0);
        spec.count = 0;
        assert!(spec.validate().is_err());
    }
}
