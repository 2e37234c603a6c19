//! Intensity-histogram statistics over the region of interest.
//!
//! Moments use population (1/N) normalization. Percentiles interpolate
//! linearly between order statistics. Entropy and Uniformity are computed on
//! the discretized histogram. Voxel volume is taken as 1, so TotalEnergy
//! equals Energy. Skewness and Kurtosis of a constant region are 0; Kurtosis
//! is not excess kurtosis.

use crate::error::{FrdError, Result};
use crate::features::names::FIRST_ORDER;
use crate::features::values::{ClassBuilder, ClassValues};
use crate::grid::{ImageGrid, RoiMask};
use crate::scalar::{xlog2x, Real};
use crate::texture::{discretize, DiscretizedGrid};

pub fn first_order_features<T: Real>(
    image: &ImageGrid<T>,
    mask: Option<&RoiMask>,
    bin_count: u32,
) -> Result<ClassValues<T>> {
    let grid = discretize(image, mask, bin_count)?;
    first_order_with_grid(image, mask, &grid)
}

/// Same as [`first_order_features`], reusing an existing discretization.
pub(crate) fn first_order_with_grid<T: Real>(
    image: &ImageGrid<T>,
    mask: Option<&RoiMask>,
    grid: &DiscretizedGrid,
) -> Result<ClassValues<T>> {
    let mut x: Vec<T> =
        image.data().iter().enumerate().filter(|&(i, _)| mask.is_none_or(|m| m.contains(i))).map(|(_, &v)| v).collect();
    if x.is_empty() {
        return Err(FrdError::EmptyMask);
    }
    x.sort_by(|a, b| a.partial_cmp(b).expect("finite intensities"));
    let n = T::from_count(x.len());
    let mean = x.iter().copied().sum::<T>() / n;
    let central = |power: i32| x.iter().map(|&v| (v - mean).powi(power)).sum::<T>() / n;
    let variance = central(2);
    let (skewness, kurtosis) = if variance > T::zero() {
        (central(3) / variance.powf(T::lit(1.5)), central(4) / (variance * variance))
    } else {
        (T::zero(), T::zero())
    };
    let energy = x.iter().map(|&v| v * v).sum::<T>();
    let p10 = percentile(&x, 10.0);
    let p90 = percentile(&x, 90.0);
    let robust: Vec<T> = x.iter().copied().filter(|&v| v >= p10 && v <= p90).collect();
    let robust_mean = robust.iter().copied().sum::<T>() / T::from_count(robust.len());
    let rmad = robust.iter().map(|&v| (v - robust_mean).abs()).sum::<T>() / T::from_count(robust.len());

    let hist = grid.histogram();
    let total = T::from_count(grid.roi_count());
    let probs: Vec<T> = hist.iter().map(|&c| T::lit(c as f64) / total).collect();

    let mut b = ClassBuilder::new(&FIRST_ORDER);
    b.set("10Percentile", p10);
    b.set("90Percentile", p90);
    b.set("Energy", energy);
    b.set("TotalEnergy", energy);
    b.set("Entropy", -probs.iter().map(|&p| xlog2x(p)).sum::<T>());
    b.set("InterquartileRange", percentile(&x, 75.0) - percentile(&x, 25.0));
    b.set("Kurtosis", kurtosis);
    b.set("Maximum", x[x.len() - 1]);
    b.set("Mean", mean);
    b.set("MeanAbsoluteDeviation", x.iter().map(|&v| (v - mean).abs()).sum::<T>() / n);
    b.set("Median", percentile(&x, 50.0));
    b.set("Minimum", x[0]);
    b.set("Range", x[x.len() - 1] - x[0]);
    b.set("RobustMeanAbsoluteDeviation", rmad);
    b.set("RootMeanSquared", (energy / n).sqrt());
    b.set("Skewness", skewness);
    b.set("StandardDeviation", variance.sqrt());
    b.set("Uniformity", probs.iter().map(|&p| p * p).sum::<T>());
    b.set("Variance", variance);
    Ok(b.finish())
}

/// Linear interpolation at rank `q/100 * (n - 1)` of sorted values.
pub(crate) fn percentile<T: Real>(sorted: &[T], q: f64) -> T {
    let pos = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = T::lit(pos - lo as f64);
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}
