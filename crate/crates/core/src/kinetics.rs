//! Tumor-region contrast kinetics across DCE phases.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{FrdError, Result};
use crate::grid::{ImageGrid, RoiMask};
use crate::io::{load_image, load_mask};
use crate::phantom::{CaseTableRow, CASE_TABLE_HEADER};
use crate::plot::{Chart, Series};
use crate::scalar::Real;

pub const SERIES_HEADER: [&str; 4] = ["case_id", "phase", "value", "normalized"];
pub const AGGREGATE_HEADER: [&str; 4] = ["phase", "mean", "std", "n"];

/// Mean intensity inside `mask`.
pub fn region_mean<T: Real>(image: &ImageGrid<T>, mask: &RoiMask) -> Result<T> {
    mask.check_matches(image)?;
    let (sum, n) = image
        .data()
        .iter()
        .zip(mask.members())
        .filter(|(_, &m)| m)
        .fold((T::zero(), 0usize), |(s, n), (&v, _)| (s + v, n + 1));
    if n == 0 {
        return Err(FrdError::EmptyMask);
    }
    Ok(sum / T::from_count(n))
}

/// Mean inside `mask` divided by the mean of the remaining voxels.
pub fn normalized_region_mean<T: Real>(image: &ImageGrid<T>, mask: &RoiMask) -> Result<T> {
    mask.check_matches(image)?;
    if mask.is_full() {
        return Err(FrdError::InvalidParameter("mask covers the whole image; no tumor-free voxels remain".into()));
    }
    let inverse = RoiMask::new(mask.shape().to_vec(), mask.members().iter().map(|&m| !m).collect())?;
    let outside = region_mean(image, &inverse)?;
    if outside == T::zero() {
        return Err(FrdError::InvalidParameter("tumor-free mean intensity is zero".into()));
    }
    Ok(region_mean(image, mask)? / outside)
}

/// One case: ordered `(phase, image)` pairs sharing a single mask.
#[derive(Debug, Clone)]
pub struct KineticsCase<T> {
    pub case_id: String,
    pub phases: Vec<(String, ImageGrid<T>)>,
    pub mask: RoiMask,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSeries {
    pub case_id: String,
    pub phase_labels: Vec<String>,
    pub values: Vec<f64>,
    pub normalized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseStat {
    pub phase: String,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single case.
    pub std: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticsAggregate {
    pub phases: Vec<PhaseStat>,
}

/// Merges each case's labels into one global order (order of first
/// appearance), failing if a case lists two known phases in reverse order.
fn phase_order<T>(cases: &[KineticsCase<T>]) -> Result<Vec<String>> {
    let mut order: Vec<String> = Vec::new();
    for case in cases {
        let mut last = None;
        for (label, _) in &case.phases {
            let pos = match order.iter().position(|p| p == label) {
                Some(p) => p,
                None => {
                    order.push(label.clone());
                    order.len() - 1
                }
            };
            if last.is_some_and(|l| pos <= l) {
                return Err(FrdError::PhaseMismatch {
                    case_id: case.case_id.clone(),
                    msg: format!("phase \"{label}\" appears out of order (expected order {order:?})"),
                });
            }
            last = Some(pos);
        }
    }
    Ok(order)
}

/// Per-case curves and per-phase mean and sample standard deviation. Cases
/// lacking a phase do not contribute to that phase.
pub fn kinetics_curves<T: Real>(
    cases: &[KineticsCase<T>],
    normalized: bool,
) -> Result<(Vec<PhaseSeries>, KineticsAggregate)> {
    let order = phase_order(cases)?;
    let series = cases
        .iter()
        .map(|case| {
            let values = case
                .phases
                .iter()
                .map(|(_, img)| {
                    let v =
                        if normalized { normalized_region_mean(img, &case.mask) } else { region_mean(img, &case.mask) };
                    v.map(Real::as_f64)
                })
                .collect::<Result<Vec<f64>>>()
                .map_err(|e| e.for_image(&case.case_id))?;
            Ok(PhaseSeries {
                case_id: case.case_id.clone(),
                phase_labels: case.phases.iter().map(|(l, _)| l.clone()).collect(),
                values,
                normalized,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let phases = order
        .iter()
        .map(|phase| {
            let mut vals: Vec<f64> = series
                .iter()
                .filter_map(|s| s.phase_labels.iter().position(|l| l == phase).map(|k| s.values[k]))
                .collect();
            vals.sort_by(f64::total_cmp);
            let n = vals.len();
            let mean = vals.iter().sum::<f64>() / n as f64;
            let std = if n > 1 {
                (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
            } else {
                0.0
            };
            PhaseStat { phase: phase.clone(), mean, std, n }
        })
        .collect();
    Ok((series, KineticsAggregate { phases }))
}

/// Reads a `case_id,phase,image_path,mask_path` table. Relative paths resolve
/// against the table's folder; the mask may be given on any row of a case.
pub fn load_case_table(path: &Path) -> Result<Vec<CaseTableRow>> {
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let bad = |line: usize, msg: String| FrdError::Manifest { path: path.to_path_buf(), line, msg };
    let text = std::fs::read_to_string(path).map_err(|e| FrdError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = records.next().ok_or_else(|| bad(1, "missing header".into()))??;
    if header.iter().collect::<Vec<_>>() != CASE_TABLE_HEADER {
        return Err(bad(1, format!("header must be `{}`", CASE_TABLE_HEADER.join(","))));
    }
    let resolve = |p: &str| if Path::new(p).is_absolute() { PathBuf::from(p) } else { base.join(p) };
    let mut rows = Vec::new();
    for (k, record) in records.enumerate() {
        let record = record?;
        let (case_id, phase, image) = (record[0].trim(), record[1].trim(), record[2].trim());
        if case_id.is_empty() || phase.is_empty() || image.is_empty() {
            return Err(bad(k + 2, "case_id, phase and image_path are required".into()));
        }
        rows.push(CaseTableRow {
            case_id: case_id.to_owned(),
            phase: phase.to_owned(),
            image_path: resolve(image),
            mask_path: Some(record[3].trim()).filter(|s| !s.is_empty()).map(resolve),
        });
    }
    Ok(rows)
}

/// Loads the cases of a table in order of first appearance. Phase images
/// that do not exist are skipped and reported in the returned warnings.
pub fn load_cases<T: Real>(rows: &[CaseTableRow]) -> Result<(Vec<KineticsCase<T>>, Vec<String>)> {
    let mut ids: Vec<&str> = Vec::new();
    let mut grouped: HashMap<&str, Vec<&CaseTableRow>> = HashMap::new();
    for r in rows {
        if !grouped.contains_key(r.case_id.as_str()) {
            ids.push(&r.case_id);
        }
        grouped.entry(&r.case_id).or_default().push(r);
    }
    let mut warnings = Vec::new();
    let mut cases = Vec::new();
    for id in ids {
        let group = &grouped[id];
        let mut masks: Vec<&PathBuf> = group.iter().filter_map(|r| r.mask_path.as_ref()).collect();
        masks.dedup();
        let mask_path = match masks.as_slice() {
            [m] => *m,
            [] => return Err(FrdError::PhaseMismatch { case_id: id.to_owned(), msg: "no mask_path given".into() }),
            _ => return Err(FrdError::PhaseMismatch { case_id: id.to_owned(), msg: "conflicting mask paths".into() }),
        };
        let mask = load_mask(mask_path).map_err(|e| e.for_image(id))?;
        let mut phases = Vec::new();
        for r in group {
            if phases.iter().any(|(l, _): &(String, ImageGrid<T>)| *l == r.phase) {
                return Err(FrdError::PhaseMismatch {
                    case_id: id.to_owned(),
                    msg: format!("phase \"{}\" listed twice", r.phase),
                });
            }
            if !r.image_path.exists() {
                warnings.push(format!("case {id}: phase {} skipped, {} not found", r.phase, r.image_path.display()));
                continue;
            }
            let (image, _) = load_image::<T>(&r.image_path).map_err(|e| e.for_image(id))?;
            phases.push((r.phase.clone(), image));
        }
        if phases.is_empty() {
            warnings.push(format!("case {id}: no phase images found, case skipped"));
            continue;
        }
        cases.push(KineticsCase { case_id: id.to_owned(), phases, mask });
    }
    Ok((cases, warnings))
}

pub fn write_series_csv(path: &Path, series: &[PhaseSeries]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(SERIES_HEADER)?;
    for s in series {
        for (label, v) in s.phase_labels.iter().zip(&s.values) {
            w.write_record([
                s.case_id.as_str(),
                label,
                &format!("{v:.16e}"),
                if s.normalized { "true" } else { "false" },
            ])?;
        }
    }
    w.flush().map_err(|e| FrdError::io(path, e))
}

pub fn write_aggregate_csv(path: &Path, aggregate: &KineticsAggregate) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(AGGREGATE_HEADER)?;
    for p in &aggregate.phases {
        w.write_record([p.phase.clone(), format!("{:.16e}", p.mean), format!("{:.16e}", p.std), p.n.to_string()])?;
    }
    w.flush().map_err(|e| FrdError::io(path, e))
}

/// Mean value per phase; marker radius grows with the standard deviation.
pub fn kinetics_chart(aggregate: &KineticsAggregate, normalized: bool) -> Chart {
    let max_std = aggregate.phases.iter().map(|p| p.std).fold(0.0, f64::max);
    let radius = |std: f64| if max_std > 0.0 { 3.0 + 9.0 * std / max_std } else { 3.0 };
    Chart {
        title: "Tumor region contrast kinetics".into(),
        description: None,
        x_label: "phase".into(),
        y_label: if normalized { "tumor / tumor-free mean intensity".into() } else { "tumor mean intensity".into() },
        log_x: false,
        log_y: false,
        x_categories: Some(aggregate.phases.iter().map(|p| p.phase.clone()).collect()),
        series: vec![Series {
            label: "mean (marker size: std)".into(),
            points: aggregate.phases.iter().enumerate().map(|(k, p)| (k as f64, p.mean, radius(p.std))).collect(),
        }],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(values: &[f64]) -> ImageGrid<f64> {
        ImageGrid::new(vec![1, values.len()], values.to_vec()).unwrap()
    }

    fn mask(bits: &[bool]) -> RoiMask {
        RoiMask::new(vec![1, bits.len()], bits.to_vec()).unwrap()
    }

    #[test]
    fn region_means() {
        let m = mask(&[true, false, false, false]);
        assert_eq!(region_mean(&grid(&[3.0; 4]), &m).unwrap(), 3.0);
        assert_eq!(region_mean(&grid(&[5.0, 1.0, 2.0, 3.0]), &m).unwrap(), 5.0);
        assert_eq!(normalized_region_mean(&grid(&[3.0; 4]), &m).unwrap(), 1.0);
        let m2 = mask(&[true, true, false, false]);
        assert_eq!(normalized_region_mean(&grid(&[6.0, 6.0, 1.0, 3.0]), &m2).unwrap(), 3.0);
        assert!(normalized_region_mean(&grid(&[1.0; 2]), &mask(&[true, true])).is_err());
        assert!(normalized_region_mean(&grid(&[1.0, 0.0]), &mask(&[true, false])).is_err());
    }

    fn case(id: &str, phases: &[(&str, f64)]) -> KineticsCase<f64> {
        KineticsCase {
            case_id: id.into(),
            phases: phases.iter().map(|&(l, v)| (l.to_owned(), grid(&[v, 1.0]))).collect(),
            mask: mask(&[true, false]),
        }
    }

    #[test]
    fn aggregate_uses_sample_std() {
        let (series, agg) = kinetics_curves(&[case("a", &[("pre", 10.0), ("P1", 30.0)])], false).unwrap();
        assert_eq!(series[0].values, vec![10.0, 30.0]);
        assert!(agg.phases.iter().all(|p| p.std == 0.0 && p.n == 1));
        let (_, agg) = kinetics_curves(&[case("a", &[("P1", 20.0)]), case("b", &[("P1", 40.0)])], false).unwrap();
        assert_eq!(agg.phases[0].mean, 30.0);
        assert!((agg.phases[0].std - 200f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn missing_phases_and_order_conflicts() {
        let cases = [case("a", &[("pre", 1.0), ("P1", 2.0), ("P2", 3.0)]), case("b", &[("pre", 1.0), ("P2", 5.0)])];
        let (_, agg) = kinetics_curves(&cases, false).unwrap();
        let counts: Vec<usize> = agg.phases.iter().map(|p| p.n).collect();
        assert_eq!(counts, vec![2, 1, 2]);
        let bad = [case("a", &[("pre", 1.0), ("P1", 2.0)]), case("b", &[("P1", 1.0), ("pre", 2.0)])];
        assert!(matches!(kinetics_curves(&bad, false), Err(FrdError::PhaseMismatch { case_id, .. }) if case_id == "b"));
    }
}
