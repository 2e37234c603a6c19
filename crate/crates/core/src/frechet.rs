//! Normalization, Gaussian fitting and the Fréchet distance between feature
//! distributions, plus the paired-MSE baseline.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{FrdError, Result};
use crate::features::{feature_names, FeatureVector};
use crate::fingerprint::fingerprint;
use crate::grid::ImageGrid;
use crate::linalg::{psd_sqrt, SquareMatrix};
use crate::scalar::Real;

/// Upper end of the calibrated feature range.
pub const CALIBRATION_MAX: f64 = 7.456;

/// Diagonal loading used when the distance is not finite on the first try.
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Totals in `[-NEGATIVE_CLAMP, 0)` are reported as zero.
pub const NEGATIVE_CLAMP: f64 = 1e-8;

/// N images by F named features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<T> {
    names: Vec<String>,
    ids: Vec<String>,
    rows: Vec<Vec<T>>,
}

impl<T: Real> FeatureMatrix<T> {
    pub fn new(names: Vec<String>, ids: Vec<String>, rows: Vec<Vec<T>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(FrdError::InvalidParameter("feature matrix has no rows".into()));
        }
        if ids.len() != rows.len() {
            return Err(FrdError::DimensionMismatch(ids.len(), rows.len()));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != names.len()) {
            return Err(FrdError::DimensionMismatch(r.len(), names.len()));
        }
        Ok(Self { names, ids, rows })
    }

    /// Unnamed matrix; columns are called `f0`, `f1`, ... and rows `r0`, ...
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        let names = (0..width).map(|k| format!("f{k}")).collect();
        let ids = (0..rows.len()).map(|k| format!("r{k}")).collect();
        Self::new(names, ids, rows)
    }

    pub fn from_vectors(vectors: Vec<FeatureVector<T>>) -> Result<Self> {
        let (ids, rows) = vectors.into_iter().map(|v| (v.image_id, v.values)).unzip();
        Self::new(feature_names(), ids, rows)
    }

    pub fn feature_names(&self) -> &[String] {
        &self.names
    }

    pub fn image_ids(&self) -> &[String] {
        &self.ids
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.names.len()
    }

    pub fn column(&self, k: usize) -> impl Iterator<Item = T> + '_ {
        self.rows.iter().map(move |r| r[k])
    }

    fn check_names(&self, other: &Self) -> Result<()> {
        match (0..self.names.len().max(other.names.len())).find(|&k| self.names.get(k) != other.names.get(k)) {
            Some(k) => Err(FrdError::FeatureNameMismatch(k)),
            None => Ok(()),
        }
    }

    fn map_rows(&self, f: impl Fn(usize, T) -> T) -> Self {
        let rows = self.rows.iter().map(|r| r.iter().enumerate().map(|(k, &v)| f(k, v)).collect()).collect();
        Self { names: self.names.clone(), ids: self.ids.clone(), rows }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationMode {
    /// Bounds over the union of both sets.
    #[default]
    Joint,
    /// Each set scaled by its own bounds.
    PerDataset,
    /// Bounds from the real set; synthetic values are clamped into range.
    ReferenceReal,
}

impl NormalizationMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Joint => "joint",
            Self::PerDataset => "per-dataset",
            Self::ReferenceReal => "reference-real",
        }
    }
}

impl fmt::Display for NormalizationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NormalizationMode {
    type Err = FrdError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "joint" => Ok(Self::Joint),
            "per-dataset" => Ok(Self::PerDataset),
            "reference-real" => Ok(Self::ReferenceReal),
            other => Err(FrdError::InvalidParameter(format!("unknown normalization mode \"{other}\""))),
        }
    }
}

/// Per-feature `(min, max)` used for scaling. In per-dataset mode `bounds`
/// holds the real set's bounds and `synth_bounds` the synthetic set's.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationBounds<T> {
    pub bounds: Vec<(T, T)>,
    pub synth_bounds: Option<Vec<(T, T)>>,
    pub calibration_max: T,
}

impl<T: Real> NormalizationBounds<T> {
    /// Features whose real-side bounds collapse to a single value.
    pub fn degenerate(&self) -> Vec<bool> {
        self.bounds.iter().map(|&(lo, hi)| lo == hi).collect()
    }
}

fn column_bounds<T: Real>(sets: &[&FeatureMatrix<T>], k: usize) -> (T, T) {
    sets.iter().flat_map(|m| m.column(k)).fold((T::infinity(), T::neg_infinity()), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

fn scale_with<T: Real>(m: &FeatureMatrix<T>, bounds: &[(T, T)], clamp: bool) -> FeatureMatrix<T> {
    let top = T::lit(CALIBRATION_MAX);
    m.map_rows(|k, v| {
        let (lo, hi) = bounds[k];
        if hi <= lo {
            return T::zero();
        }
        let scaled = (v - lo) / (hi - lo) * top;
        if clamp {
            scaled.max(T::zero()).min(top)
        } else {
            scaled
        }
    })
}

/// Min-max normalizes each feature and scales it to `[0, 7.456]`.
/// Features with `max == min` map to 0.
pub fn normalize_and_calibrate<T: Real>(
    real: &FeatureMatrix<T>,
    synth: &FeatureMatrix<T>,
    mode: NormalizationMode,
) -> Result<(FeatureMatrix<T>, FeatureMatrix<T>, NormalizationBounds<T>)> {
    real.check_names(synth)?;
    let f = real.n_features();
    let each = |sets: &[&FeatureMatrix<T>]| (0..f).map(|k| column_bounds(sets, k)).collect::<Vec<_>>();
    let calibration_max = T::lit(CALIBRATION_MAX);
    Ok(match mode {
        NormalizationMode::Joint => {
            let b = each(&[real, synth]);
            let out = (scale_with(real, &b, false), scale_with(synth, &b, false));
            (out.0, out.1, NormalizationBounds { bounds: b, synth_bounds: None, calibration_max })
        }
        NormalizationMode::PerDataset => {
            let (br, bs) = (each(&[real]), each(&[synth]));
            let out = (scale_with(real, &br, false), scale_with(synth, &bs, false));
            (out.0, out.1, NormalizationBounds { bounds: br, synth_bounds: Some(bs), calibration_max })
        }
        NormalizationMode::ReferenceReal => {
            let b = each(&[real]);
            let out = (scale_with(real, &b, false), scale_with(synth, &b, true));
            (out.0, out.1, NormalizationBounds { bounds: b, synth_bounds: None, calibration_max })
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianSummary<T> {
    pub mean: Vec<T>,
    pub covariance: SquareMatrix<T>,
    pub n: usize,
}

/// Column means and the 1/(N-1) sample covariance (zero when N = 1).
///
/// Rows are summed in a canonical sorted order so that the result does not
/// depend on row order, to the last bit.
pub fn fit_gaussian<T: Real>(features: &FeatureMatrix<T>) -> Result<GaussianSummary<T>> {
    let n = features.n_rows();
    let d = features.n_features();
    if n == 0 {
        return Err(FrdError::InvalidParameter("cannot fit a Gaussian to zero rows".into()));
    }
    let mut rows: Vec<&Vec<T>> = features.rows().iter().collect();
    rows.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.as_f64().total_cmp(&y.as_f64()))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let count = T::from_count(n);
    let mut mean = vec![T::zero(); d];
    for r in &rows {
        for (m, &v) in mean.iter_mut().zip(r.iter()) {
            *m = *m + v;
        }
    }
    for m in &mut mean {
        *m = *m / count;
    }
    let mut cov = SquareMatrix::zeros(d);
    if n > 1 {
        let mut centered = vec![T::zero(); d];
        for r in &rows {
            for ((c, &v), &m) in centered.iter_mut().zip(r.iter()).zip(&mean) {
                *c = v - m;
            }
            for i in 0..d {
                let ci = centered[i];
                if ci == T::zero() {
                    continue;
                }
                for j in i..d {
                    cov[(i, j)] = cov[(i, j)] + ci * centered[j];
                }
            }
        }
        let denom = T::from_count(n - 1);
        for i in 0..d {
            for j in i..d {
                let v = cov[(i, j)] / denom;
                cov[(i, j)] = v;
                cov[(j, i)] = v;
            }
        }
    }
    Ok(GaussianSummary { mean, covariance: cov, n })
}

/// Principal square root of the product `A B` for symmetric PSD `A`, `B`,
/// evaluated through the symmetric similar form `sqrt(sqrt(A) B sqrt(A))`.
/// The two roots share the same trace, which is all the distance needs.
pub fn sqrtm_psd<T: Real>(a: &SquareMatrix<T>, b: &SquareMatrix<T>) -> Result<SquareMatrix<T>> {
    if a.size() != b.size() {
        return Err(FrdError::DimensionMismatch(a.size(), b.size()));
    }
    let ra = psd_sqrt(a)?;
    psd_sqrt(&ra.matmul(b).matmul(&ra).symmetrized())
}

/// Fréchet distance with its decomposition `value = mean_term + trace_term`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrechetTerms<T> {
    pub value: T,
    pub mean_term: T,
    pub trace_term: T,
    /// Diagonal loading that was needed; zero when the first attempt succeeded.
    pub epsilon_applied: T,
}

/// `|mu_a - mu_b|^2 + tr(S_a + S_b - 2 (S_a S_b)^(1/2))`.
///
/// If the square root fails or yields a non-finite trace, `epsilon` is added
/// to both diagonals and the computation is retried once.
pub fn frechet_distance<T: Real>(
    a: &GaussianSummary<T>,
    b: &GaussianSummary<T>,
    epsilon: T,
) -> Result<FrechetTerms<T>> {
    if a.mean.len() != b.mean.len() {
        return Err(FrdError::DimensionMismatch(a.mean.len(), b.mean.len()));
    }
    if a.covariance.size() != a.mean.len() || b.covariance.size() != b.mean.len() {
        return Err(FrdError::DimensionMismatch(a.covariance.size(), a.mean.len()));
    }
    let mean_term: T = a.mean.iter().zip(&b.mean).map(|(&x, &y)| (x - y) * (x - y)).sum();
    let attempt = |eps: T| -> Result<T> {
        let (sa, sb) = (a.covariance.add_diagonal(eps), b.covariance.add_diagonal(eps));
        let root = sqrtm_psd(&sa, &sb)?;
        let t = sa.trace() + sb.trace() - T::lit(2.0) * root.trace();
        if t.is_finite() {
            Ok(t)
        } else {
            Err(FrdError::NonFiniteDistance(t.as_f64()))
        }
    };
    let (mut trace_term, epsilon_applied) = match attempt(T::zero()) {
        Ok(t) => (t, T::zero()),
        Err(_) => match attempt(epsilon) {
            Ok(t) => (t, epsilon),
            Err(_) => return Err(FrdError::NonFiniteDistance(epsilon.as_f64())),
        },
    };
    let mut value = mean_term + trace_term;
    if !value.is_finite() {
        return Err(FrdError::NonFiniteDistance(epsilon_applied.as_f64()));
    }
    if value < T::zero() {
        let scale = a.covariance.trace().abs() + b.covariance.trace().abs();
        let tol = T::lit(NEGATIVE_CLAMP).max(T::lit(1e3) * T::epsilon() * scale);
        if value < -tol {
            return Err(FrdError::NegativeEigenvalue(value.as_f64()));
        }
        trace_term = -mean_term;
        value = mean_term + trace_term;
    }
    Ok(FrechetTerms { value, mean_term, trace_term, epsilon_applied })
}

/// The distance report written by `compare`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrdReport {
    pub frd: f64,
    pub mean_term: f64,
    pub trace_term: f64,
    pub n_real: usize,
    pub n_synth: usize,
    pub normalization_mode: NormalizationMode,
    pub epsilon_applied: f64,
    pub calibration_max: f64,
    pub config_fingerprint: String,
    pub feature_bounds: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrdOptions {
    pub mode: NormalizationMode,
    pub epsilon: f64,
}

impl Default for FrdOptions {
    fn default() -> Self {
        Self { mode: NormalizationMode::Joint, epsilon: DEFAULT_EPSILON }
    }
}

/// Normalizes, fits both Gaussians and measures their Fréchet distance.
/// The report's fingerprint covers `options`; callers with a wider
/// configuration overwrite it.
pub fn frd<T: Real>(real: &FeatureMatrix<T>, synth: &FeatureMatrix<T>, options: &FrdOptions) -> Result<FrdReport> {
    let (nr, ns, bounds) = normalize_and_calibrate(real, synth, options.mode)?;
    let (gr, gs) = (fit_gaussian(&nr)?, fit_gaussian(&ns)?);
    let terms = frechet_distance(&gr, &gs, T::lit(options.epsilon))?;
    Ok(FrdReport {
        frd: terms.value.as_f64(),
        mean_term: terms.mean_term.as_f64(),
        trace_term: terms.trace_term.as_f64(),
        n_real: real.n_rows(),
        n_synth: synth.n_rows(),
        normalization_mode: options.mode,
        epsilon_applied: terms.epsilon_applied.as_f64(),
        calibration_max: CALIBRATION_MAX,
        config_fingerprint: fingerprint(options),
        feature_bounds: bounds.bounds.iter().map(|&(lo, hi)| [lo.as_f64(), hi.as_f64()]).collect(),
    })
}

/// Mean and sample standard deviation of per-pair mean squared differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseSummary {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

pub fn mse_paired<T: Real>(a: &[ImageGrid<T>], b: &[ImageGrid<T>]) -> Result<MseSummary> {
    if a.len() != b.len() {
        return Err(FrdError::DimensionMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(FrdError::InvalidParameter("no image pairs".into()));
    }
    let per_pair = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            if x.shape() != y.shape() {
                return Err(FrdError::ShapeMismatch(x.shape().to_vec(), y.shape().to_vec()));
            }
            let sum: f64 = x.data().iter().zip(y.data()).map(|(&p, &q)| (p.as_f64() - q.as_f64()).powi(2)).sum();
            Ok(sum / x.len() as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    let n = per_pair.len();
    let mean = per_pair.iter().sum::<f64>() / n as f64;
    let std =
        if n > 1 { (per_pair.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
    Ok(MseSummary { mean, std, n })
}
