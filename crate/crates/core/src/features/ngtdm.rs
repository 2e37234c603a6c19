//! Neighbouring gray-tone difference features.
//!
//! `p_i = n_i / Nvp` over voxels with at least one neighbor and `Ngp` is the
//! number of levels with `p_i > 0`. Coarseness is capped at 1e6 when
//! `sum p_i s_i = 0`; Contrast is 0 with a single occupied level; Busyness
//! and Strength are 0 when their denominators vanish.

use crate::error::{FrdError, Result};
use crate::features::names::NGTDM;
use crate::features::values::{ClassBuilder, ClassValues};
use crate::scalar::Real;
use crate::texture::Ngtdm;

pub const COARSENESS_CAP: f64 = 1e6;

pub fn ngtdm_features<T: Real>(m: &Ngtdm<T>) -> Result<ClassValues<T>> {
    if m.is_empty() {
        return Err(FrdError::EmptyMatrix("NGTDM"));
    }
    let nvp = T::lit(m.valid_voxels() as f64);
    // (level, p_i, s_i) for occupied levels
    let occupied: Vec<(T, T, T)> = (1..=m.num_levels())
        .filter(|&l| m.n(l) > 0)
        .map(|l| (T::from_count(l), T::lit(m.n(l) as f64) / nvp, m.s(l)))
        .collect();
    let ngp = occupied.len();
    let s_total: T = occupied.iter().map(|o| o.2).sum();
    let ps_total: T = occupied.iter().map(|&(_, p, s)| p * s).sum();

    let coarseness = if ps_total > T::zero() { T::one() / ps_total } else { T::lit(COARSENESS_CAP) };
    let (mut spread, mut busy_den, mut complexity, mut strength_num) = (T::zero(), T::zero(), T::zero(), T::zero());
    for &(i, pi, si) in &occupied {
        for &(j, pj, sj) in &occupied {
            let d = i - j;
            spread = spread + pi * pj * d * d;
            busy_den = busy_den + (i * pi - j * pj).abs();
            complexity = complexity + d.abs() * (pi * si + pj * sj) / (pi + pj);
            strength_num = strength_num + (pi + pj) * d * d;
        }
    }
    let contrast = if ngp > 1 { spread / T::from_count(ngp * (ngp - 1)) * s_total / nvp } else { T::zero() };
    let busyness = if busy_den > T::zero() { ps_total / busy_den } else { T::zero() };
    let strength = if s_total > T::zero() { strength_num / s_total } else { T::zero() };

    let mut b = ClassBuilder::new(&NGTDM);
    b.set("Coarseness", coarseness);
    b.set("Contrast", contrast);
    b.set("Busyness", busyness);
    b.set("Complexity", complexity / nvp);
    b.set("Strength", strength);
    Ok(b.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::texture::{build_ngtdm, DiscretizedGrid};

    #[test]
    fn constant_grid_caps_coarseness() {
        let g = DiscretizedGrid::from_levels(&[3, 3], vec![1; 9], 1).unwrap();
        let f = ngtdm_features(&build_ngtdm::<f64>(&g)).unwrap();
        assert_eq!(f.get("Coarseness"), Some(COARSENESS_CAP));
        assert_eq!(f.get("Contrast"), Some(0.0));
        assert_eq!(f.get("Complexity"), Some(0.0));
        assert_eq!(f.get("Busyness"), Some(0.0));
        assert_eq!(f.get("Strength"), Some(0.0));
    }

    #[test]
    fn center_peak_matches_hand_computation() {
        let g = DiscretizedGrid::from_levels(&[3, 3], vec![1, 1, 1, 1, 2, 1, 1, 1, 1], 2).unwrap();
        let f = ngtdm_features(&build_ngtdm::<f64>(&g)).unwrap();
        let s1 = 4.0 / 3.0 + 4.0 / 5.0;
        let s2 = 1.0;
        let (p1, p2) = (8.0 / 9.0, 1.0 / 9.0);
        let ps = p1 * s1 + p2 * s2;
        let close = |name: &str, v: f64| {
            let got = f.get(name).unwrap();
            assert!((got - v).abs() < 1e-12 * v.abs().max(1.0), "{name}: {got} vs {v}");
        };
        close("Coarseness", 1.0 / ps);
        close("Contrast", (2.0 * p1 * p2) / 2.0 * (s1 + s2) / 9.0);
        close("Busyness", ps / (2.0 * (p1 - 2.0 * p2).abs()));
        close("Complexity", 2.0 * (p1 * s1 + p2 * s2) / (p1 + p2) / 9.0);
        close("Strength", 2.0 * (p1 + p2) / (s1 + s2));
    }

    #[test]
    fn empty_matrix_is_an_error() {
        let g = DiscretizedGrid::from_levels(&[1, 3], vec![1, 0, 1], 1).unwrap();
        assert!(matches!(ngtdm_features(&build_ngtdm::<f64>(&g)), Err(FrdError::EmptyMatrix("NGTDM"))));
    }
}
