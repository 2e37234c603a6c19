//! Co-occurrence features, computed per direction and averaged.
//!
//! `Ng` in Idmn/Idn is the number of discretization levels. Correlation of a
//! matrix with zero marginal variance is 1. Imc1 is 0 when both marginal
//! entropies vanish and Imc2 is 0 when `HXY2 - HXY` is below 1e-12. MCC uses
//! only occupied levels, treats eigenvalues below 1e-12 as zero, and is 1 for
//! a single occupied level.

use crate::error::{FrdError, Result};
use crate::features::names::GLCM;
use crate::features::values::{ClassBuilder, ClassValues};
use crate::linalg::{symmetric_eigen, SquareMatrix};
use crate::scalar::{xlog2x, Real};
use crate::texture::Glcm;

/// Averages per-direction features over all non-empty matrices.
pub fn glcm_features<T: Real>(matrices: &[Glcm]) -> Result<ClassValues<T>> {
    let parts: Vec<ClassValues<T>> = matrices.iter().filter(|m| !m.is_empty()).map(single_glcm_features).collect();
    if parts.is_empty() {
        return Err(FrdError::NoPairs);
    }
    Ok(ClassValues::average(&GLCM, &parts))
}

/// Features of one non-empty co-occurrence matrix.
pub fn single_glcm_features<T: Real>(glcm: &Glcm) -> ClassValues<T> {
    let ng = glcm.num_levels();
    let p = glcm.probabilities::<T>();
    let at = |i: usize, j: usize| p[i * ng + j];
    let level = |i: usize| T::from_count(i + 1);

    let px: Vec<T> = (0..ng).map(|i| (0..ng).map(|j| at(i, j)).sum()).collect();
    let py: Vec<T> = (0..ng).map(|j| (0..ng).map(|i| at(i, j)).sum()).collect();
    let mu_x: T = (0..ng).map(|i| level(i) * px[i]).sum();
    let mu_y: T = (0..ng).map(|j| level(j) * py[j]).sum();
    let sigma_x = (0..ng).map(|i| (level(i) - mu_x).powi(2) * px[i]).sum::<T>().sqrt();
    let sigma_y = (0..ng).map(|j| (level(j) - mu_y).powi(2) * py[j]).sum::<T>().sqrt();

    // p_{x+y}(k) at index k - 2, p_{x-y}(k) at index k
    let mut p_sum = vec![T::zero(); 2 * ng - 1];
    let mut p_diff = vec![T::zero(); ng];
    let mut acc = Sums::<T>::default();
    let ng_t = T::from_count(ng);
    for i in 0..ng {
        for j in 0..ng {
            let pij = at(i, j);
            if pij == T::zero() {
                continue;
            }
            let (li, lj) = (level(i), level(j));
            let d = (li - lj).abs();
            p_sum[i + j] = p_sum[i + j] + pij;
            p_diff[i.abs_diff(j)] = p_diff[i.abs_diff(j)] + pij;
            let centered = li + lj - mu_x - mu_y;
            acc.autocorrelation = acc.autocorrelation + pij * li * lj;
            acc.prominence = acc.prominence + pij * centered.powi(4);
            acc.shade = acc.shade + pij * centered.powi(3);
            acc.tendency = acc.tendency + pij * centered.powi(2);
            acc.contrast = acc.contrast + pij * d * d;
            acc.energy = acc.energy + pij * pij;
            acc.entropy = acc.entropy - xlog2x(pij);
            acc.hxy1 = acc.hxy1 - pij * (px[i] * py[j]).log2();
            acc.idm = acc.idm + pij / (T::one() + d * d);
            acc.idmn = acc.idmn + pij / (T::one() + d * d / (ng_t * ng_t));
            acc.id = acc.id + pij / (T::one() + d);
            acc.idn = acc.idn + pij / (T::one() + d / ng_t);
            acc.max_prob = acc.max_prob.max(pij);
            acc.sum_squares = acc.sum_squares + pij * (li - mu_x).powi(2);
        }
    }
    let hx = -px.iter().map(|&v| xlog2x(v)).sum::<T>();
    let hy = -py.iter().map(|&v| xlog2x(v)).sum::<T>();
    let mut hxy2 = T::zero();
    for &a in &px {
        for &b in &py {
            hxy2 = hxy2 - xlog2x(a * b);
        }
    }
    let hxy = acc.entropy;

    let diff_avg: T = p_diff.iter().enumerate().map(|(k, &v)| T::from_count(k) * v).sum();
    let diff_var: T = p_diff.iter().enumerate().map(|(k, &v)| (T::from_count(k) - diff_avg).powi(2) * v).sum();
    let inv_var: T = p_diff.iter().enumerate().skip(1).map(|(k, &v)| v / T::from_count(k * k)).sum();

    let correlation = if sigma_x > T::zero() && sigma_y > T::zero() {
        (acc.autocorrelation - mu_x * mu_y) / (sigma_x * sigma_y)
    } else {
        T::one()
    };
    let hmax = hx.max(hy);
    let imc1 = if hmax > T::zero() { (hxy - acc.hxy1) / hmax } else { T::zero() };
    let gap = hxy2 - hxy;
    let imc2 = if gap > T::lit(1e-12) { (T::one() - (T::lit(-2.0) * gap).exp()).sqrt() } else { T::zero() };

    let mut b = ClassBuilder::new(&GLCM);
    b.set("Autocorrelation", acc.autocorrelation);
    b.set("JointAverage", mu_x);
    b.set("ClusterProminence", acc.prominence);
    b.set("ClusterShade", acc.shade);
    b.set("ClusterTendency", acc.tendency);
    b.set("Contrast", acc.contrast);
    b.set("Correlation", correlation);
    b.set("DifferenceAverage", diff_avg);
    b.set("DifferenceEntropy", -p_diff.iter().map(|&v| xlog2x(v)).sum::<T>());
    b.set("DifferenceVariance", diff_var);
    b.set("JointEnergy", acc.energy);
    b.set("JointEntropy", hxy);
    b.set("Imc1", imc1);
    b.set("Imc2", imc2);
    b.set("Idm", acc.idm);
    b.set("Idmn", acc.idmn);
    b.set("Id", acc.id);
    b.set("Idn", acc.idn);
    b.set("InverseVariance", inv_var);
    b.set("MaximumProbability", acc.max_prob);
    b.set("SumAverage", p_sum.iter().enumerate().map(|(k, &v)| T::from_count(k + 2) * v).sum());
    b.set("SumEntropy", -p_sum.iter().map(|&v| xlog2x(v)).sum::<T>());
    b.set("SumSquares", acc.sum_squares);
    b.set("MCC", maximal_correlation(&p, &px, &py, ng));
    b.finish()
}

#[derive(Default)]
struct Sums<T> {
    autocorrelation: T,
    prominence: T,
    shade: T,
    tendency: T,
    contrast: T,
    energy: T,
    entropy: T,
    hxy1: T,
    idm: T,
    idmn: T,
    id: T,
    idn: T,
    max_prob: T,
    sum_squares: T,
}

/// Square root of the second largest eigenvalue of
/// `Q(i, j) = sum_k p(i, k) p(j, k) / (px(i) py(k))`, evaluated through the
/// similar symmetric matrix `M M^T` with `M = Dx^-1/2 P Dy^-1/2`.
fn maximal_correlation<T: Real>(p: &[T], px: &[T], py: &[T], ng: usize) -> T {
    let rows: Vec<usize> = (0..ng).filter(|&i| px[i] > T::zero()).collect();
    let cols: Vec<usize> = (0..ng).filter(|&j| py[j] > T::zero()).collect();
    if rows.len() < 2 {
        return T::one();
    }
    let m: Vec<Vec<T>> =
        rows.iter().map(|&i| cols.iter().map(|&j| p[i * ng + j] / (px[i] * py[j]).sqrt()).collect()).collect();
    let q = SquareMatrix::from_fn(rows.len(), |a, b| m[a].iter().zip(&m[b]).map(|(&x, &y)| x * y).sum::<T>());
    let mut values = symmetric_eigen(&q).values;
    values.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    let second = values[1];
    if second < T::lit(1e-12) {
        T::zero()
    } else {
        second.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::texture::{build_glcm, DiscretizedGrid};

    #[test]
    fn point_mass() {
        let g = DiscretizedGrid::from_levels(&[2, 2], vec![1; 4], 1).unwrap();
        let m = build_glcm(&g, &[0, 1], 1).unwrap();
        let f = single_glcm_features::<f64>(&m);
        assert_eq!(f.get("JointEnergy"), Some(1.0));
        assert_eq!(f.get("JointEntropy"), Some(0.0));
        assert_eq!(f.get("Contrast"), Some(0.0));
        assert_eq!(f.get("MaximumProbability"), Some(1.0));
        assert_eq!(f.get("Correlation"), Some(1.0));
        assert_eq!(f.get("InverseVariance"), Some(0.0));
        assert_eq!(f.get("DifferenceVariance"), Some(0.0));
        assert_eq!(f.get("MCC"), Some(1.0));
    }

    #[test]
    fn off_diagonal_pair() {
        // [1, 2] alone: P(1,2) = P(2,1) = 0.5
        let g = DiscretizedGrid::from_levels(&[1, 2], vec![1, 2], 2).unwrap();
        let m = build_glcm(&g, &[0, 1], 1).unwrap();
        let f = single_glcm_features::<f64>(&m);
        assert_eq!(f.get("Contrast"), Some(1.0));
        assert_eq!(f.get("Correlation"), Some(-1.0));
        assert_eq!(f.get("InverseVariance"), Some(1.0));
        assert!((f.get("MCC").unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn all_empty_is_an_error() {
        let g = DiscretizedGrid::from_levels(&[1, 1], vec![1], 1).unwrap();
        let m = build_glcm(&g, &[0, 1], 1).unwrap();
        assert!(matches!(glcm_features::<f64>(&[m]), Err(FrdError::NoPairs)));
    }
}
