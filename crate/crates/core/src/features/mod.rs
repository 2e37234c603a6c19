//! The 94-feature radiomics vector: first-order statistics plus the five
//! texture-matrix families, with conventions following PyRadiomics.

mod first_order;
mod glcm;
pub mod names;
mod ngtdm;
mod size_matrix;
mod values;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FrdError, Result};
use crate::grid::{ImageGrid, RoiMask};
use crate::io::{load_entry, tumor_crop, BoundingBox, DatasetManifest, LoadedImage};
use crate::scalar::Real;
use crate::texture::{build_glcm, build_gldm, build_glrlm, build_glszm, build_ngtdm, directions, discretize};

pub use self::first_order::first_order_features;
pub use self::glcm::{glcm_features, single_glcm_features};
pub use self::names::{feature_names, FEATURE_COUNT};
pub use self::ngtdm::{ngtdm_features, COARSENESS_CAP};
pub use self::size_matrix::{gldm_features, glrlm_features, glszm_features, single_glrlm_features};
pub use self::values::ClassValues;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub bin_count: u32,
    pub gldm_alpha: u32,
    pub glcm_distance: usize,
    pub dims: usize,
}

impl FeatureConfig {
    pub fn new(dims: usize) -> Self {
        Self { bin_count: 32, gldm_alpha: 0, glcm_distance: 1, dims }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bin_count < 2 {
            return Err(FrdError::InvalidParameter(format!("bin_count must be >= 2, got {}", self.bin_count)));
        }
        if self.glcm_distance < 1 {
            return Err(FrdError::InvalidParameter("glcm_distance must be >= 1".into()));
        }
        if !(2..=3).contains(&self.dims) {
            return Err(FrdError::InvalidDims(self.dims));
        }
        Ok(())
    }
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self::new(2)
    }
}

/// The 94 feature values of one image in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T> {
    pub image_id: String,
    pub values: Vec<T>,
}

impl<T: Real> FeatureVector<T> {
    pub fn new(image_id: impl Into<String>, values: Vec<T>) -> Result<Self> {
        if values.len() != FEATURE_COUNT {
            return Err(FrdError::InvalidParameter(format!(
                "expected {FEATURE_COUNT} feature values, got {}",
                values.len()
            )));
        }
        Ok(Self { image_id: image_id.into(), values })
    }

    pub fn names() -> Vec<String> {
        feature_names()
    }

    pub fn get(&self, name: &str) -> Option<T> {
        feature_names().iter().position(|n| n == name).map(|k| self.values[k])
    }
}

/// Extracts all 94 features of `image` inside `mask` (whole grid if absent).
pub fn extract_all<T: Real>(
    image_id: &str,
    image: &ImageGrid<T>,
    mask: Option<&RoiMask>,
    config: &FeatureConfig,
) -> Result<FeatureVector<T>> {
    config.validate()?;
    if image.dims() != config.dims {
        return Err(FrdError::InvalidParameter(format!(
            "image is {}D but the configuration expects {}D",
            image.dims(),
            config.dims
        )));
    }
    let grid = discretize(image, mask, config.bin_count)?;
    let dirs = directions(grid.dims());

    let glcms = dirs.iter().map(|d| build_glcm(&grid, d, config.glcm_distance)).collect::<Result<Vec<_>>>()?;
    let glrlms = dirs.iter().map(|d| build_glrlm(&grid, d)).collect::<Result<Vec<_>>>()?;
    let classes = [
        first_order::first_order_with_grid(image, mask, &grid)?,
        glcm_features(&glcms)?,
        glrlm_features(&glrlms)?,
        glszm_features(&build_glszm(&grid))?,
        ngtdm_features(&build_ngtdm::<T>(&grid))?,
        gldm_features(&build_gldm(&grid, config.gldm_alpha))?,
    ];
    let values: Vec<T> = classes.into_iter().flat_map(ClassValues::into_values).collect();
    if let Some(k) = values.iter().position(|v| !v.is_finite()) {
        return Err(FrdError::InvalidParameter(format!("feature {} is not finite", feature_names()[k])));
    }
    FeatureVector::new(image_id, values)
}

/// Features of a loaded manifest entry. With `crop` set, 2D entries that
/// carry a bbox are first reduced to the tumor-centered window.
pub fn extract_entry<T: Real>(loaded: &LoadedImage<T>, config: &FeatureConfig, crop: bool) -> Result<FeatureVector<T>> {
    let id = loaded.image_id.as_str();
    let run = || -> Result<FeatureVector<T>> {
        match loaded.bbox.as_ref().filter(|_| crop && loaded.image.dims() == 2) {
            Some(bbox) => {
                let image = tumor_crop(&loaded.image, bbox)?;
                let mask = loaded.mask.as_ref().map(|m| crop_mask(m, bbox)).transpose()?;
                extract_all(id, &image, mask.as_ref(), config)
            }
            None => extract_all(id, &loaded.image, loaded.mask.as_ref(), config),
        }
    };
    run().map_err(|e| e.for_image(id))
}

fn crop_mask(mask: &RoiMask, bbox: &BoundingBox) -> Result<RoiMask> {
    let as_image = ImageGrid::<f64>::new(
        mask.shape().to_vec(),
        mask.members().iter().map(|&m| if m { 1.0 } else { 0.0 }).collect(),
    )?;
    let cropped = tumor_crop(&as_image, bbox)?;
    RoiMask::new(cropped.shape().to_vec(), cropped.data().iter().map(|&v| v != 0.0).collect())
}

/// Loads and extracts every manifest entry in parallel; rows keep manifest order.
pub fn extract_dataset<T: Real>(
    manifest: &DatasetManifest,
    config: &FeatureConfig,
    crop: bool,
) -> Result<Vec<FeatureVector<T>>> {
    manifest
        .entries
        .par_iter()
        .map(|entry| {
            let loaded = load_entry::<T>(entry)?;
            extract_entry(&loaded, config, crop)
        })
        .collect()
}

/// Features CSV: header `image_id,<94 names>`, values with 17 significant digits.
pub fn write_features_csv<T: Real>(path: &Path, rows: &[FeatureVector<T>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["image_id".to_owned()];
    header.extend(feature_names());
    w.write_record(&header)?;
    for row in rows {
        let mut record = vec![row.image_id.clone()];
        record.extend(row.values.iter().map(|v| format!("{:.16e}", v.as_f64())));
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| FrdError::io(path, e))
}

pub fn read_features_csv<T: Real>(path: &Path) -> Result<Vec<FeatureVector<T>>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path)?;
    let header = reader.headers()?.clone();
    let mut expected = vec!["image_id".to_owned()];
    expected.extend(feature_names());
    if let Some(k) =
        (0..header.len().max(expected.len())).find(|&k| header.get(k) != expected.get(k).map(String::as_str))
    {
        return Err(FrdError::FeatureNameMismatch(k));
    }
    let mut rows = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record?;
        let values = record
            .iter()
            .skip(1)
            .map(|s| s.trim().parse::<f64>().map(T::lit))
            .collect::<std::result::Result<Vec<T>, _>>()
            .map_err(|e| FrdError::Manifest { path: path.to_path_buf(), line: k + 2, msg: e.to_string() })?;
        rows.push(FeatureVector::new(&record[0], values)?);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn textured() -> ImageGrid<f64> {
        ImageGrid::from_fn(vec![24, 20], |c| ((c[0] * 7 + c[1] * 13) % 17) as f64 + (c[0] as f64 * 0.3).sin() * 4.0)
            .unwrap()
    }

    #[test]
    fn vector_has_94_finite_values() {
        let f = extract_all("a", &textured(), None, &FeatureConfig::new(2)).unwrap();
        assert_eq!(f.values.len(), 94);
        assert!(f.values.iter().all(|v| v.is_finite()));
        assert_eq!(f.get("firstorder.Minimum"), Some(textured().value_range().0));
    }

    #[test]
    fn extraction_is_pure() {
        let cfg = FeatureConfig::new(2);
        let a = extract_all("a", &textured(), None, &cfg).unwrap();
        let b = extract_all("a", &textured(), None, &cfg).unwrap();
        assert!(a.values.iter().zip(&b.values).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn shift_changes_only_location_features() {
        let cfg = FeatureConfig::new(2);
        let img = textured();
        let shifted = ImageGrid::new(img.shape().to_vec(), img.data().iter().map(|v| v + 100.0).collect()).unwrap();
        let a = extract_all("a", &img, None, &cfg).unwrap();
        let b = extract_all("b", &shifted, None, &cfg).unwrap();
        let location = ["Mean", "Minimum", "Maximum", "Median", "10Percentile", "90Percentile"];
        for (k, name) in feature_names().iter().enumerate() {
            let short = name.trim_start_matches("firstorder.");
            let (x, y) = (a.values[k], b.values[k]);
            if name.starts_with("firstorder.") && location.contains(&short) {
                assert!((y - x - 100.0).abs() < 1e-9, "{name}");
            } else if name.starts_with("firstorder.") && ["Energy", "TotalEnergy", "RootMeanSquared"].contains(&short) {
                continue;
            } else {
                assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0), "{name}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn mask_restricts_extraction() {
        let cfg = FeatureConfig::new(2);
        let img = textured();
        let mask = RoiMask::from_fn(vec![24, 20], |c| (4..16).contains(&c[0]) && (3..12).contains(&c[1])).unwrap();
        let other =
            ImageGrid::from_fn(vec![24, 20], |c| if mask.contains(c[0] * 20 + c[1]) { img.get(c) } else { -500.0 })
                .unwrap();
        let a = extract_all("a", &img, Some(&mask), &cfg).unwrap();
        let b = extract_all("b", &other, Some(&mask), &cfg).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn dims_mismatch_and_bad_bins_are_rejected() {
        let mut cfg = FeatureConfig::new(3);
        assert!(extract_all("a", &textured(), None, &cfg).is_err());
        cfg.dims = 2;
        cfg.bin_count = 1;
        assert!(extract_all("a", &textured(), None, &cfg).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        let f = extract_all("img,1", &textured(), None, &FeatureConfig::new(2)).unwrap();
        write_features_csv(&p, std::slice::from_ref(&f)).unwrap();
        let back = read_features_csv::<f64>(&p).unwrap();
        assert_eq!(back, vec![f]);
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text.lines().next().unwrap().split(',').count(), 95);
    }
}
