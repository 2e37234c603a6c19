use frd_core::frechet::{fit_gaussian, frechet_distance, sqrtm_psd, FeatureMatrix, GaussianSummary};
use frd_core::linalg::SquareMatrix;
use frd_core::{frd, FrdOptions, NormalizationMode};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// `|mu_a - mu_b|^2 + tr(A) + tr(B) - 2 sum sqrt(eig(A B))`, with the
/// eigenvalues of the non-symmetric product taken directly.
fn reference_distance(mu_a: &[f64], a: &DMatrix<f64>, mu_b: &[f64], b: &DMatrix<f64>) -> f64 {
    let mean: f64 = mu_a.iter().zip(mu_b).map(|(x, y)| (x - y).powi(2)).sum();
    let roots: f64 = (a * b).complex_eigenvalues().iter().map(|z| z.re.max(0.0).sqrt()).sum();
    mean + a.trace() + b.trace() - 2.0 * roots
}

fn random_spd(rng: &mut StdRng, d: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d + 3, |_, _| rng.random_range(-1.0..1.0));
    &g * g.transpose() / (d + 3) as f64 + DMatrix::identity(d, d) * 0.05
}

fn summary(mean: Vec<f64>, cov: &DMatrix<f64>) -> GaussianSummary<f64> {
    let d = mean.len();
    GaussianSummary { mean, covariance: SquareMatrix::from_fn(d, |i, j| cov[(i, j)]), n: 100 }
}

fn random_matrix(rng: &mut StdRng, n: usize, d: usize, offset: f64) -> FeatureMatrix<f64> {
    let rows = (0..n).map(|_| (0..d).map(|k| offset + k as f64 + rng.random_range(0.0..2.0)).collect()).collect();
    FeatureMatrix::from_rows(rows).unwrap()
}

#[test]
fn distance_matches_product_eigenvalues() {
    let mut rng = StdRng::seed_from_u64(3);
    for d in [1, 2, 3, 5, 8, 13, 20] {
        for _ in 0..5 {
            let (a, b) = (random_spd(&mut rng, d), random_spd(&mut rng, d));
            let mu_a: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let mu_b: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let want = reference_distance(&mu_a, &a, &mu_b, &b);
            let got = frechet_distance(&summary(mu_a, &a), &summary(mu_b, &b), 1e-6).unwrap();
            let scale = a.trace() + b.trace() + want.abs();
            assert!((got.value - want).abs() <= 1e-9 * scale, "d={d}: {} vs {want}", got.value);
            assert_eq!(got.epsilon_applied, 0.0);
            assert!((got.mean_term + got.trace_term - got.value).abs() <= 1e-12 * scale);
        }
    }
}

#[test]
fn square_root_multiplies_back_to_the_symmetrized_product() {
    let mut rng = StdRng::seed_from_u64(8);
    for d in [2, 6, 15, 40] {
        let (a, b) = (random_spd(&mut rng, d), random_spd(&mut rng, d));
        let to_core = |m: &DMatrix<f64>| SquareMatrix::from_fn(d, |i, j| m[(i, j)]);
        let root = sqrtm_psd(&to_core(&a), &to_core(&b)).unwrap();
        let back = DMatrix::from_fn(d, d, |i, j| root[(i, j)]);
        let sqrt_a = a.clone().symmetric_eigen();
        let sqrt_a = &sqrt_a.eigenvectors
            * DMatrix::from_diagonal(&sqrt_a.eigenvalues.map(f64::sqrt))
            * sqrt_a.eigenvectors.transpose();
        let product = &sqrt_a * &b * &sqrt_a;
        assert!((&back * &back - &product).norm() < 1e-8, "d={d}");
    }
}

#[test]
fn rank_deficient_covariances_stay_non_negative() {
    let mut rng = StdRng::seed_from_u64(4);
    // fewer rows than features, as with small datasets
    let a = random_matrix(&mut rng, 6, 30, 0.0);
    let b = random_matrix(&mut rng, 6, 30, 0.0);
    let (ga, gb) = (fit_gaussian(&a).unwrap(), fit_gaussian(&b).unwrap());
    let d = frechet_distance(&ga, &gb, 1e-6).unwrap();
    assert!(d.value >= 0.0);
    let same = frechet_distance(&ga, &ga, 1e-6).unwrap();
    assert!(same.value.abs() < 1e-9, "{}", same.value);
}

#[test]
fn single_row_has_zero_covariance() {
    let m = FeatureMatrix::from_rows(vec![vec![1.0, 2.0, 3.0]]).unwrap();
    let g = fit_gaussian(&m).unwrap();
    assert_eq!(g.covariance.frobenius_norm(), 0.0);
    assert_eq!(g.mean, vec![1.0, 2.0, 3.0]);
}

#[test]
fn single_precision_agrees_with_double() {
    let mut rng = StdRng::seed_from_u64(5);
    let a = random_matrix(&mut rng, 40, 6, 0.0);
    let b = random_matrix(&mut rng, 40, 6, 0.3);
    let cast = |m: &FeatureMatrix<f64>| {
        FeatureMatrix::<f32>::from_rows(m.rows().iter().map(|r| r.iter().map(|&v| v as f32).collect()).collect())
            .unwrap()
    };
    let opts = FrdOptions::default();
    let wide = frd(&a, &b, &opts).unwrap().frd;
    let narrow = frd(&cast(&a), &cast(&b), &opts).unwrap().frd;
    assert!((wide - narrow).abs() < 1e-3 * wide.max(1.0), "{wide} vs {narrow}");
}

#[test]
fn every_mode_gives_zero_for_identical_sets() {
    let mut rng = StdRng::seed_from_u64(6);
    let a = random_matrix(&mut rng, 20, 5, 0.0);
    for mode in [NormalizationMode::Joint, NormalizationMode::PerDataset, NormalizationMode::ReferenceReal] {
        let r = frd(&a, &a, &FrdOptions { mode, epsilon: 1e-6 }).unwrap();
        assert!(r.frd.abs() < 1e-9, "{mode}: {}", r.frd);
    }
}

fn shuffled(m: &FeatureMatrix<f64>, order: &[usize]) -> FeatureMatrix<f64> {
    let rows = order.iter().map(|&k| m.rows()[k].clone()).collect();
    let ids = order.iter().map(|&k| m.image_ids()[k].clone()).collect();
    FeatureMatrix::new(m.feature_names().to_vec(), ids, rows).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn symmetric_and_permutation_invariant(seed in any::<u64>(), n in 3usize..25, d in 1usize..8, shift in 0.0f64..2.0) {
        let mut rng = StdRng::seed_from_u64(seed);
        let a = random_matrix(&mut rng, n, d, 0.0);
        let b = random_matrix(&mut rng, n + 2, d, shift);
        let opts = FrdOptions::default();
        let ab = frd(&a, &b, &opts).unwrap();
        let ba = frd(&b, &a, &opts).unwrap();
        prop_assert!(ab.frd >= 0.0);
        prop_assert!((ab.frd - ba.frd).abs() <= 1e-9 * ab.frd.max(1e-12));

        let mut order: Vec<usize> = (0..n).collect();
        order.reverse();
        order.rotate_left(seed as usize % n);
        let again = frd(&shuffled(&a, &order), &b, &opts).unwrap();
        prop_assert_eq!(ab.frd.to_bits(), again.frd.to_bits());
    }

    #[test]
    fn mean_shift_of_a_point_cloud(seed in any::<u64>(), delta in -3.0f64..3.0) {
        let mut rng = StdRng::seed_from_u64(seed);
        let d = 4;
        let mean: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let cov = random_spd(&mut rng, d);
        let moved: Vec<f64> = mean.iter().map(|m| m + delta).collect();
        let r = frechet_distance(&summary(mean, &cov), &summary(moved, &cov), 1e-6).unwrap();
        let want = d as f64 * delta * delta;
        prop_assert!((r.value - want).abs() <= 1e-9 * (want + cov.trace()));
    }
}
