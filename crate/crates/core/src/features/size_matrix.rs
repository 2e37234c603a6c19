//! Features of the run-length, size-zone and dependence matrices.
//!
//! All three tabulate counts by gray level `i` and a size-like column `j`
//! (run length, zone size, dependence + 1), so they share one set of
//! emphasis and non-uniformity statistics. `Nz` is the matrix total and `Np`
//! the in-ROI voxel count.

use crate::error::{FrdError, Result};
use crate::features::names::{GLDM, GLRLM, GLSZM};
use crate::features::values::{ClassBuilder, ClassValues};
use crate::scalar::{xlog2x, Real};
use crate::texture::{CountMatrix, Gldm, Glrlm, Glszm};

struct SizeStats<T> {
    small: T,
    large: T,
    gln: T,
    glnn: T,
    sn: T,
    snn: T,
    percentage: T,
    gl_variance: T,
    size_variance: T,
    entropy: T,
    low: T,
    high: T,
    small_low: T,
    small_high: T,
    large_low: T,
    large_high: T,
}

fn size_stats<T: Real>(counts: &CountMatrix, voxels: usize, kind: &'static str) -> Result<SizeStats<T>> {
    let total = counts.total();
    if total == 0 {
        return Err(FrdError::EmptyMatrix(kind));
    }
    let nz = T::lit(total as f64);
    let mut per_level = vec![T::zero(); counts.levels()];
    let mut per_size = vec![T::zero(); counts.columns()];
    let (mut small, mut large, mut low, mut high) = (T::zero(), T::zero(), T::zero(), T::zero());
    let (mut small_low, mut small_high, mut large_low, mut large_high) = (T::zero(), T::zero(), T::zero(), T::zero());
    let (mut mu_i, mut mu_j, mut entropy) = (T::zero(), T::zero(), T::zero());
    for (i, j, c) in counts.nonzero() {
        let c = T::lit(c as f64);
        let (i2, j2) = (T::from_count(i * i), T::from_count(j * j));
        per_level[i - 1] = per_level[i - 1] + c;
        per_size[j - 1] = per_size[j - 1] + c;
        small = small + c / j2;
        large = large + c * j2;
        low = low + c / i2;
        high = high + c * i2;
        small_low = small_low + c / (i2 * j2);
        small_high = small_high + c * i2 / j2;
        large_low = large_low + c * j2 / i2;
        large_high = large_high + c * i2 * j2;
        let p = c / nz;
        mu_i = mu_i + p * T::from_count(i);
        mu_j = mu_j + p * T::from_count(j);
        entropy = entropy - xlog2x(p);
    }
    let (mut gl_variance, mut size_variance) = (T::zero(), T::zero());
    for (i, j, c) in counts.nonzero() {
        let p = T::lit(c as f64) / nz;
        gl_variance = gl_variance + p * (T::from_count(i) - mu_i).powi(2);
        size_variance = size_variance + p * (T::from_count(j) - mu_j).powi(2);
    }
    let gln = per_level.iter().map(|&v| v * v).sum::<T>() / nz;
    let sn = per_size.iter().map(|&v| v * v).sum::<T>() / nz;
    Ok(SizeStats {
        small: small / nz,
        large: large / nz,
        gln,
        glnn: gln / nz,
        sn,
        snn: sn / nz,
        percentage: nz / T::from_count(voxels),
        gl_variance,
        size_variance,
        entropy,
        low: low / nz,
        high: high / nz,
        small_low: small_low / nz,
        small_high: small_high / nz,
        large_low: large_low / nz,
        large_high: large_high / nz,
    })
}

/// Run-length features of one direction.
pub fn single_glrlm_features<T: Real>(m: &Glrlm) -> Result<ClassValues<T>> {
    let s = size_stats::<T>(m.counts(), m.roi_count(), "GLRLM")?;
    let mut b = ClassBuilder::new(&GLRLM);
    b.set("ShortRunEmphasis", s.small);
    b.set("LongRunEmphasis", s.large);
    b.set("GrayLevelNonUniformity", s.gln);
    b.set("GrayLevelNonUniformityNormalized", s.glnn);
    b.set("RunLengthNonUniformity", s.sn);
    b.set("RunLengthNonUniformityNormalized", s.snn);
    b.set("RunPercentage", s.percentage);
    b.set("GrayLevelVariance", s.gl_variance);
    b.set("RunVariance", s.size_variance);
    b.set("RunEntropy", s.entropy);
    b.set("LowGrayLevelRunEmphasis", s.low);
    b.set("HighGrayLevelRunEmphasis", s.high);
    b.set("ShortRunLowGrayLevelEmphasis", s.small_low);
    b.set("ShortRunHighGrayLevelEmphasis", s.small_high);
    b.set("LongRunLowGrayLevelEmphasis", s.large_low);
    b.set("LongRunHighGrayLevelEmphasis", s.large_high);
    Ok(b.finish())
}

/// Run-length features averaged over directions.
pub fn glrlm_features<T: Real>(matrices: &[Glrlm]) -> Result<ClassValues<T>> {
    if matrices.is_empty() {
        return Err(FrdError::EmptyMatrix("GLRLM"));
    }
    let parts = matrices.iter().map(single_glrlm_features).collect::<Result<Vec<_>>>()?;
    Ok(ClassValues::average(&GLRLM, &parts))
}

pub fn glszm_features<T: Real>(m: &Glszm) -> Result<ClassValues<T>> {
    let s = size_stats::<T>(m.counts(), m.roi_count(), "GLSZM")?;
    let mut b = ClassBuilder::new(&GLSZM);
    b.set("SmallAreaEmphasis", s.small);
    b.set("LargeAreaEmphasis", s.large);
    b.set("GrayLevelNonUniformity", s.gln);
    b.set("GrayLevelNonUniformityNormalized", s.glnn);
    b.set("SizeZoneNonUniformity", s.sn);
    b.set("SizeZoneNonUniformityNormalized", s.snn);
    b.set("ZonePercentage", s.percentage);
    b.set("GrayLevelVariance", s.gl_variance);
    b.set("ZoneVariance", s.size_variance);
    b.set("ZoneEntropy", s.entropy);
    b.set("LowGrayLevelZoneEmphasis", s.low);
    b.set("HighGrayLevelZoneEmphasis", s.high);
    b.set("SmallAreaLowGrayLevelEmphasis", s.small_low);
    b.set("SmallAreaHighGrayLevelEmphasis", s.small_high);
    b.set("LargeAreaLowGrayLevelEmphasis", s.large_low);
    b.set("LargeAreaHighGrayLevelEmphasis", s.large_high);
    Ok(b.finish())
}

/// Dependence features; the dependence enters size-weighted terms as `d + 1`.
pub fn gldm_features<T: Real>(m: &Gldm) -> Result<ClassValues<T>> {
    let voxels = m.counts().total() as usize;
    let s = size_stats::<T>(m.counts(), voxels, "GLDM")?;
    let mut b = ClassBuilder::new(&GLDM);
    b.set("SmallDependenceEmphasis", s.small);
    b.set("LargeDependenceEmphasis", s.large);
    b.set("GrayLevelNonUniformity", s.gln);
    b.set("DependenceNonUniformity", s.sn);
    b.set("DependenceNonUniformityNormalized", s.snn);
    b.set("GrayLevelVariance", s.gl_variance);
    b.set("DependenceVariance", s.size_variance);
    b.set("DependenceEntropy", s.entropy);
    b.set("LowGrayLevelEmphasis", s.low);
    b.set("HighGrayLevelEmphasis", s.high);
    b.set("SmallDependenceLowGrayLevelEmphasis", s.small_low);
    b.set("SmallDependenceHighGrayLevelEmphasis", s.small_high);
    b.set("LargeDependenceLowGrayLevelEmphasis", s.large_low);
    b.set("LargeDependenceHighGrayLevelEmphasis", s.large_high);
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::texture::{build_gldm, build_glrlm, build_glszm, DiscretizedGrid};

    fn constant3() -> DiscretizedGrid {
        DiscretizedGrid::from_levels(&[3, 3], vec![1; 9], 1).unwrap()
    }

    #[test]
    fn unit_runs() {
        let g = DiscretizedGrid::from_levels(&[3, 3], vec![1, 2, 1, 2, 1, 2, 1, 2, 1], 2).unwrap();
        let f = single_glrlm_features::<f64>(&build_glrlm(&g, &[0, 1]).unwrap()).unwrap();
        assert_eq!(f.get("ShortRunEmphasis"), Some(1.0));
        assert_eq!(f.get("LongRunEmphasis"), Some(1.0));
        assert_eq!(f.get("RunPercentage"), Some(1.0));
    }

    #[test]
    fn constant_grid_long_runs() {
        let f = single_glrlm_features::<f64>(&build_glrlm(&constant3(), &[0, 1]).unwrap()).unwrap();
        assert_eq!(f.get("LongRunEmphasis"), Some(9.0));
        assert_eq!(f.get("RunEntropy"), Some(0.0));
    }

    #[test]
    fn single_zone() {
        let f = glszm_features::<f64>(&build_glszm(&constant3())).unwrap();
        assert_eq!(f.get("LargeAreaEmphasis"), Some(81.0));
        assert_eq!(f.get("ZonePercentage"), Some(1.0 / 9.0));
        let g = DiscretizedGrid::from_levels(&[1, 3], vec![1, 2, 1], 2).unwrap();
        let f = glszm_features::<f64>(&build_glszm(&g)).unwrap();
        assert_eq!(f.get("SmallAreaEmphasis"), Some(1.0));
        assert_eq!(f.get("ZonePercentage"), Some(1.0));
    }

    #[test]
    fn dependence_histogram_of_constant_grid() {
        let f = gldm_features::<f64>(&build_gldm(&constant3(), 0)).unwrap();
        let expected = (81.0 + 4.0 * 36.0 + 4.0 * 16.0) / 9.0;
        assert!((f.get("LargeDependenceEmphasis").unwrap() - expected).abs() < 1e-12);
        let isolated = DiscretizedGrid::from_levels(&[3, 3], vec![1, 0, 1, 0, 0, 0, 1, 0, 1], 1).unwrap();
        let f = gldm_features::<f64>(&build_gldm(&isolated, 0)).unwrap();
        assert_eq!(f.get("SmallDependenceEmphasis"), Some(1.0));
    }
}
