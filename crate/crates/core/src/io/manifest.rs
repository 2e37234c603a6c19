//! Dataset manifests: CSV files with header `image_id,image_path,mask_path,bbox`.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use crate::error::{FrdError, Result};

pub const MANIFEST_HEADER: [&str; 4] = ["image_id", "image_path", "mask_path", "bbox"];

/// Axis-aligned box; `lo` inclusive, `hi` exclusive, one entry per axis.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoundingBox {
    lo: Vec<usize>,
    hi: Vec<usize>,
}

impl BoundingBox {
    pub fn new(lo: Vec<usize>, hi: Vec<usize>) -> Result<Self> {
        if lo.len() != hi.len() || !(2..=3).contains(&lo.len()) {
            return Err(FrdError::InvalidParameter(format!("bounding box {lo:?}..{hi:?} has bad arity")));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l >= h) {
            return Err(FrdError::InvalidParameter(format!("bounding box {lo:?}..{hi:?} is empty")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> &[usize] {
        &self.lo
    }

    pub fn hi(&self) -> &[usize] {
        &self.hi
    }

    pub fn dims(&self) -> usize {
        self.lo.len()
    }

    pub fn extent(&self, axis: usize) -> usize {
        self.hi[axis] - self.lo[axis]
    }

    pub fn check_inside(&self, shape: &[usize]) -> Result<()> {
        if shape.len() != self.dims() || self.hi.iter().zip(shape).any(|(h, s)| h > s) {
            return Err(FrdError::BBoxOutOfBounds { lo: self.lo.clone(), hi: self.hi.clone(), shape: shape.to_vec() });
        }
        Ok(())
    }

    /// Parses `lo0,lo1[,lo2],hi0,hi1[,hi2]`.
    pub fn parse(text: &str) -> Result<Self> {
        let nums = text
            .split(',')
            .map(|t| t.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| FrdError::InvalidParameter(format!("bbox \"{text}\": {e}")))?;
        if nums.len() != 4 && nums.len() != 6 {
            return Err(FrdError::InvalidParameter(format!("bbox \"{text}\" needs 4 or 6 integers")));
        }
        let half = nums.len() / 2;
        Self::new(nums[..half].to_vec(), nums[half..].to_vec())
    }

    pub fn encode(&self) -> String {
        self.lo.iter().chain(&self.hi).map(|v| v.to_string()).collect::<Vec<_>>().join(",")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub image_id: String,
    pub image_path: PathBuf,
    pub mask_path: Option<PathBuf>,
    pub bbox: Option<BoundingBox>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetManifest {
    pub dims: usize,
    pub entries: Vec<ManifestEntry>,
}

/// Dimensionality implied by a file name: PNG is 2D, NIfTI is 3D.
pub fn dims_for_path(path: &Path) -> Option<usize> {
    let name = path.file_name()?.to_string_lossy().to_ascii_lowercase();
    if name.ends_with(".png") {
        Some(2)
    } else if name.ends_with(".nii") || name.ends_with(".nii.gz") {
        Some(3)
    } else {
        None
    }
}

impl DatasetManifest {
    /// Builds a manifest, checking id uniqueness and shared dimensionality.
    pub fn new(entries: Vec<ManifestEntry>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut dims = None;
        for e in &entries {
            if !seen.insert(e.image_id.as_str()) {
                return Err(FrdError::DuplicateId(e.image_id.clone()));
            }
            let d = dims_for_path(&e.image_path).ok_or_else(|| {
                FrdError::InvalidParameter(format!(
                    "{}: unknown image format (expected .png, .nii or .nii.gz)",
                    e.image_path.display()
                ))
            })?;
            match dims {
                None => dims = Some(d),
                Some(first) if first != d => return Err(FrdError::MixedDims(e.image_id.clone())),
                _ => {}
            }
            if let Some(b) = &e.bbox {
                if b.dims() != d {
                    return Err(FrdError::InvalidParameter(format!(
                        "bbox of \"{}\" has {} axes but the image is {d}D",
                        e.image_id,
                        b.dims()
                    )));
                }
            }
        }
        let dims = dims.ok_or_else(|| FrdError::InvalidParameter("manifest has no entries".into()))?;
        Ok(Self { dims, entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.entries.iter().map(|e| e.image_id.clone()).collect()
    }
}

/// Parses a manifest; relative paths resolve against the manifest's folder.
pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| FrdError::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let bad = |line: usize, msg: String| FrdError::Manifest { path: path.to_path_buf(), line, msg };

    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = records.next().ok_or_else(|| bad(1, "missing header".into()))??;
    if header.iter().collect::<Vec<_>>() != MANIFEST_HEADER {
        return Err(bad(1, format!("header must be `{}`", MANIFEST_HEADER.join(","))));
    }
    let resolve = |p: &str| {
        let p = PathBuf::from(p);
        if p.is_absolute() {
            p
        } else {
            base.join(p)
        }
    };

    let mut entries = Vec::new();
    for (k, record) in records.enumerate() {
        let line = k + 2;
        let record = record?;
        if record.len() != 4 {
            return Err(bad(line, format!("expected 4 columns, found {}", record.len())));
        }
        let image_id = record[0].trim().to_owned();
        if image_id.is_empty() {
            return Err(bad(line, "empty image_id".into()));
        }
        if record[1].trim().is_empty() {
            return Err(bad(line, "empty image_path".into()));
        }
        let mask_path = Some(record[2].trim()).filter(|s| !s.is_empty()).map(resolve);
        let bbox = match record[3].trim() {
            "" => None,
            text => Some(BoundingBox::parse(text).map_err(|e| bad(line, e.to_string()))?),
        };
        entries.push(ManifestEntry { image_id, image_path: resolve(record[1].trim()), mask_path, bbox });
    }
    DatasetManifest::new(entries)
}

/// Writes a manifest; paths under the manifest's folder are stored relative.
pub fn write_manifest(path: &Path, manifest: &DatasetManifest) -> Result<()> {
    let base = path.parent().unwrap_or(Path::new(""));
    let rel = |p: &Path| p.strip_prefix(base).unwrap_or(p).to_string_lossy().into_owned();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(MANIFEST_HEADER)?;
    for e in &manifest.entries {
        w.write_record([
            e.image_id.clone(),
            rel(&e.image_path),
            e.mask_path.as_deref().map(rel).unwrap_or_default(),
            e.bbox.as_ref().map(BoundingBox::encode).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| FrdError::io(path, e))
}
