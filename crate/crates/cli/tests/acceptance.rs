//! End-to-end acceptance checks. Prints one `[PASS]` or `[FAIL]` line per
//! criterion and exits non-zero if any fail.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use frd_core::features::{
    feature_names, gldm_features, glrlm_features, glszm_features, ngtdm_features, single_glcm_features, FEATURE_COUNT,
};
use frd_core::frechet::{
    fit_gaussian, frechet_distance, normalize_and_calibrate, FeatureMatrix, GaussianSummary, CALIBRATION_MAX,
};
use frd_core::io::{crop_window, tumor_crop, BoundingBox};
use frd_core::linalg::SquareMatrix;
use frd_core::perturbation::{PerturbationKind, PerturbationSpec};
use frd_core::phantom::{make_phantom, PhantomSpec};
use frd_core::texture::{
    build_glcm, build_gldm, build_glrlm, build_glszm, build_ngtdm, directions, CountMatrix, DiscretizedGrid,
};
use frd_core::{extract_all, frd, mse_paired, FeatureConfig, FrdError, FrdOptions, Image, NormalizationMode};
use frd_oracle as oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

type Check = Result<String, String>;
type Criterion = (&'static str, &'static str, Box<dyn Fn(&Path) -> Check>);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {{
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    }};
}

fn main() {
    let work = tempfile::tempdir().expect("temp dir");
    let criteria: Vec<Criterion> = vec![
        ("AC1", "feature catalog and runtime", Box::new(|_| ac1())),
        ("AC2", "brute-force oracle equivalence", Box::new(|_| ac2())),
        ("AC3", "Frechet distance correctness", Box::new(|_| ac3())),
        ("AC4", "calibration bound", Box::new(ac4)),
        ("AC5", "monotone perturbation sweep", Box::new(ac5)),
        ("AC6", "metric properties", Box::new(ac6)),
        ("AC7", "crop geometry", Box::new(|_| ac7())),
        ("AC8", "kinetics recovery", Box::new(ac8)),
        ("AC9", "deterministic outputs", Box::new(ac9)),
        ("AC10", "MSE baseline", Box::new(|_| ac10())),
    ];
    let mut failed = 0;
    for (id, title, check) in &criteria {
        let dir = work.path().join(id);
        fs::create_dir_all(&dir).expect("criterion dir");
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(|| check(&dir)))
            .unwrap_or_else(|p| Err(format!("panicked: {}", panic_text(&p))));
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {id} {title}: {detail} ({secs:.1}s)"),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {id} {title}: {why} ({secs:.1}s)");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

fn panic_text(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default()
}

fn frd_bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_frd")).args(args).output().expect("run frd")
}

fn frd_ok(args: &[&str]) -> Result<String, String> {
    let out = frd_bin(args);
    if !out.status.success() {
        return Err(format!(
            "`frd {}` exited {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr).trim()
        ));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

fn read_csv(path: &Path) -> Result<Vec<BTreeMap<String, String>>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    Ok(lines.map(|l| header.iter().map(|h| h.to_string()).zip(l.split(',').map(str::to_string)).collect()).collect())
}

fn phantom_image(shape: Vec<usize>, seed: u64, id: &str) -> (Image, frd_core::RoiMask) {
    let spec = PhantomSpec::new(1, shape, seed);
    let ph = make_phantom(&spec, id).expect("phantom");
    (ph.render(spec.lesion_boost, 1.0).expect("render"), ph.mask)
}

fn ac1() -> Check {
    let cfg = FeatureConfig::new(2);
    let (img, mask) = phantom_image(vec![224, 224], 3, "timing");
    let names = feature_names();
    ensure!(names.len() == FEATURE_COUNT && FEATURE_COUNT == 94, "{} features", names.len());
    let per_class: Vec<usize> = ["firstorder.", "glcm.", "glrlm.", "glszm.", "ngtdm.", "gldm."]
        .iter()
        .map(|c| names.iter().filter(|n| n.starts_with(c)).count())
        .collect();
    ensure!(per_class == [19, 24, 16, 16, 5, 14], "class sizes {per_class:?}");
    ensure!(feature_names() == names, "names differ between calls");

    let mut worst = 0.0f64;
    let mut first = None;
    for _ in 0..3 {
        let t = Instant::now();
        let v = extract_all("timing", &img, None, &cfg).map_err(|e| e.to_string())?;
        worst = worst.max(t.elapsed().as_secs_f64());
        let v2 = extract_all("timing", &img, Some(&mask), &cfg).map_err(|e| e.to_string())?;
        ensure!(v.values.len() == 94 && v2.values.len() == 94, "vector length");
        match &first {
            None => first = Some(v.values),
            Some(f) => ensure!(f == &v.values, "values differ between runs"),
        }
    }
    ensure!(worst < 1.0, "slowest 224x224 extraction took {worst:.3}s");
    Ok(format!("94 features split 19/24/16/16/5/14; slowest 224x224 extraction {:.0} ms", worst * 1e3))
}

fn close(a: f64, b: f64) -> bool {
    let d = (a - b).abs();
    d <= 1e-9 * a.abs().max(b.abs()) || d <= 1e-12
}

fn compare_features<'a>(
    what: &str,
    core: impl Iterator<Item = (&'a str, f64)>,
    reference: &oracle::Features,
    checked: &mut usize,
) -> Result<(), String> {
    let core: BTreeMap<&str, f64> = core.collect();
    ensure!(core.len() == reference.len(), "{what}: {} vs {} features", core.len(), reference.len());
    for (name, &want) in reference {
        let got = *core.get(name).ok_or_else(|| format!("{what}.{name} missing"))?;
        ensure!(close(got, want), "{what}.{name}: {got} vs reference {want}");
        *checked += 1;
    }
    Ok(())
}

fn sparse(m: &CountMatrix) -> oracle::Sparse {
    m.nonzero().map(|(i, j, c)| ((i, j), c)).collect()
}

fn oracle_grid(levels: &[u32], shape: &[usize], alpha: u32, checked: &mut usize) -> Result<(), String> {
    let ng = 3u32;
    let core = DiscretizedGrid::from_levels(shape, levels.to_vec(), ng).map_err(|e| e.to_string())?;
    let reference = oracle::LevelGrid::new(shape.to_vec(), levels.to_vec(), ng as usize);
    let dirs = directions(shape.len());

    for d in &dirs {
        let m = build_glcm(&core, d, 1).map_err(|e| e.to_string())?;
        let r = oracle::glcm(&reference, d, 1);
        for i in 1..=ng as usize {
            for j in 1..=ng as usize {
                ensure!(m.count(i, j) as f64 == r[(i - 1, j - 1)], "glcm {shape:?} {d:?} cell ({i},{j})");
            }
        }
        if !m.is_empty() {
            compare_features("glcm", single_glcm_features::<f64>(&m).iter(), &oracle::glcm_features(&r), checked)?;
        }
    }
    let runs: Vec<_> =
        dirs.iter().map(|d| build_glrlm(&core, d).map_err(|e| e.to_string())).collect::<Result<_, _>>()?;
    let mut run_ref = Vec::new();
    for (m, d) in runs.iter().zip(&dirs) {
        let r = oracle::glrlm(&reference, d);
        ensure!(sparse(m.counts()) == r, "glrlm {shape:?} {d:?}");
        run_ref.push(oracle::glrlm_features(&r, &reference));
    }
    let f = glrlm_features::<f64>(&runs).map_err(|e| e.to_string())?;
    compare_features("glrlm", f.iter(), &oracle::average(&run_ref), checked)?;

    let zones = build_glszm(&core);
    let zr = oracle::glszm(&reference);
    ensure!(sparse(zones.counts()) == zr, "glszm {shape:?}");
    let f = glszm_features::<f64>(&zones).map_err(|e| e.to_string())?;
    compare_features("glszm", f.iter(), &oracle::glszm_features(&zr, &reference), checked)?;

    let dep = build_gldm(&core, alpha);
    let dr = oracle::gldm(&reference, alpha);
    ensure!(sparse(dep.counts()) == dr, "gldm {shape:?} alpha {alpha}");
    let f = gldm_features::<f64>(&dep).map_err(|e| e.to_string())?;
    compare_features("gldm", f.iter(), &oracle::gldm_features(&dr, &reference), checked)?;

    let ng_m = build_ngtdm::<f64>(&core);
    let (s, n) = oracle::ngtdm(&reference);
    for l in 1..=ng as usize {
        ensure!(ng_m.n(l) == n[l - 1] && close(ng_m.s(l), s[l - 1]), "ngtdm {shape:?} level {l}");
    }
    match ngtdm_features(&ng_m) {
        Ok(f) => compare_features("ngtdm", f.iter(), &oracle::ngtdm_features(&s, &n), checked)?,
        Err(FrdError::EmptyMatrix(_)) => ensure!(n.iter().all(|&c| c == 0), "ngtdm reported empty"),
        Err(e) => return Err(e.to_string()),
    }
    Ok(())
}

fn ac2() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut grids = 0;
    let mut checked = 0;
    let shapes: Vec<Vec<usize>> = {
        let mut s = Vec::new();
        for h in 1..=4 {
            for w in 1..=4 {
                if h * w > 1 {
                    s.push(vec![h, w]);
                }
            }
        }
        for a in 1..=3 {
            for b in 1..=3 {
                for c in 2..=3 {
                    s.push(vec![a, b, c]);
                }
            }
        }
        s
    };
    for round in 0..20 {
        for shape in &shapes {
            let n: usize = shape.iter().product();
            let outside = [0.0, 0.15, 0.35][round % 3];
            let levels: Vec<u32> = loop {
                let l: Vec<u32> =
                    (0..n).map(|_| if rng.random_bool(outside) { 0 } else { rng.random_range(1..=3) }).collect();
                if l.iter().any(|&v| v > 0) {
                    break l;
                }
            };
            oracle_grid(&levels, shape, (round % 2) as u32, &mut checked)?;
            grids += 1;
        }
    }
    ensure!(grids >= 500, "only {grids} grids");
    Ok(format!("{grids} random grids (2D up to 4x4, 3D up to 3x3x3), {checked} feature values within 1e-9"))
}

fn gaussian(mean: Vec<f64>, cov: Vec<Vec<f64>>) -> GaussianSummary<f64> {
    GaussianSummary { mean, covariance: SquareMatrix::from_rows(&cov).unwrap(), n: 0 }
}

fn ac3() -> Check {
    // (a) a sampled set against itself
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let rows: Vec<Vec<f64>> = (0..50).map(|_| (0..6).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()).collect();
    let g = fit_gaussian(&FeatureMatrix::from_rows(rows).unwrap()).map_err(|e| e.to_string())?;
    let same = frechet_distance(&g, &g, 1e-6).map_err(|e| e.to_string())?.value;
    ensure!(same.abs() <= 1e-8, "FD(A, A) = {same}");

    // (b) one dimension, closed form (0 - 2)^2 + 1 + 4 - 2 * 2 = 5
    let one = frechet_distance(&gaussian(vec![0.0], vec![vec![1.0]]), &gaussian(vec![2.0], vec![vec![4.0]]), 1e-6)
        .map_err(|e| e.to_string())?
        .value;
    ensure!((one - 5.0).abs() <= 1e-9, "1-D case gave {one}");

    // (c) identity covariances
    let eye = |d: usize| (0..d).map(|i| (0..d).map(|j| f64::from(i == j)).collect()).collect::<Vec<Vec<f64>>>();
    let delta = [0.5, -1.0, 2.0, 0.0, 3.0];
    let id = frechet_distance(&gaussian(vec![0.0; 5], eye(5)), &gaussian(delta.to_vec(), eye(5)), 1e-6)
        .map_err(|e| e.to_string())?
        .value;
    let norm2: f64 = delta.iter().map(|d| d * d).sum();
    ensure!((id - norm2).abs() <= 1e-9, "identity case {id} vs {norm2}");

    // (d) N = 10 000 samples from two correlated Gaussians
    let l_a = [[1.0, 0.0, 0.0, 0.0], [0.5, 1.2, 0.0, 0.0], [0.3, -0.4, 0.8, 0.0], [0.0, 0.2, 0.1, 1.5]];
    let l_b = [[2.0, 0.0, 0.0, 0.0], [-0.3, 0.7, 0.0, 0.0], [0.6, 0.1, 1.4, 0.0], [0.2, 0.0, -0.5, 0.6]];
    let (mu_a, mu_b) = ([0.0, 1.0, -1.0, 2.0], [1.5, -0.5, 0.5, 0.0]);
    let cov = |l: &[[f64; 4]; 4]| -> Vec<Vec<f64>> {
        (0..4).map(|i| (0..4).map(|j| (0..4).map(|k| l[i][k] * l[j][k]).sum()).collect()).collect()
    };
    let exact = frechet_distance(&gaussian(mu_a.to_vec(), cov(&l_a)), &gaussian(mu_b.to_vec(), cov(&l_b)), 1e-6)
        .map_err(|e| e.to_string())?
        .value;
    let mut draw = |l: &[[f64; 4]; 4], mu: &[f64; 4]| -> FeatureMatrix<f64> {
        let rows = (0..10_000)
            .map(|_| {
                let z: Vec<f64> = (0..4).map(|_| rng.sample(StandardNormal)).collect();
                (0..4).map(|i| mu[i] + (0..4).map(|k| l[i][k] * z[k]).sum::<f64>()).collect()
            })
            .collect();
        FeatureMatrix::from_rows(rows).unwrap()
    };
    let (sa, sb) = (draw(&l_a, &mu_a), draw(&l_b, &mu_b));
    let sampled = frechet_distance(&fit_gaussian(&sa).unwrap(), &fit_gaussian(&sb).unwrap(), 1e-6)
        .map_err(|e| e.to_string())?
        .value;
    let rel = (sampled - exact).abs() / exact;
    ensure!(rel <= 0.05, "sampled {sampled} vs analytic {exact} ({:.2}%)", rel * 100.0);
    Ok(format!(
        "FD(A,A)={same:.1e}, 1-D={one}, identity={id}, sampled {sampled:.4} vs analytic {exact:.4} ({:.2}%)",
        rel * 100.0
    ))
}

fn extract_set(images: &[(Image, frd_core::RoiMask)], cfg: &FeatureConfig) -> FeatureMatrix<f64> {
    let vectors = images
        .iter()
        .enumerate()
        .map(|(k, (img, mask))| extract_all(&format!("img{k}"), img, Some(mask), cfg).expect("extract"))
        .collect();
    FeatureMatrix::from_vectors(vectors).expect("matrix")
}

fn phantom_set(count: usize, shape: &[usize], seed: u64) -> Vec<(Image, frd_core::RoiMask)> {
    let spec = PhantomSpec::new(count, shape.to_vec(), seed);
    (0..count)
        .map(|k| {
            let ph = make_phantom(&spec, &format!("ph{k}")).unwrap();
            (ph.render(spec.lesion_boost, 1.0).unwrap(), ph.mask)
        })
        .collect()
}

fn noisy(set: &[(Image, frd_core::RoiMask)], scale: f64) -> Vec<(Image, frd_core::RoiMask)> {
    let spec = PerturbationSpec::new(PerturbationKind::Noise, scale, 9);
    set.iter().enumerate().map(|(k, (img, m))| (spec.apply(img, &format!("ph{k}")).unwrap().image, m.clone())).collect()
}

fn ac4(_: &Path) -> Check {
    let cfg = FeatureConfig::new(2);
    let real = phantom_set(12, &[48, 48], 4);
    let synth = noisy(&real, 20.0);
    let (fr, fs) = (extract_set(&real, &cfg), extract_set(&synth, &cfg));
    let mut total = 0usize;
    for mode in [NormalizationMode::Joint, NormalizationMode::PerDataset, NormalizationMode::ReferenceReal] {
        let (a, b, _) = normalize_and_calibrate(&fr, &fs, mode).map_err(|e| e.to_string())?;
        for v in a.rows().iter().chain(b.rows()).flatten() {
            ensure!((0.0..=CALIBRATION_MAX).contains(v), "{mode}: value {v} outside [0, {CALIBRATION_MAX}]");
            total += 1;
        }
    }
    Ok(format!("{total} normalized values across three modes all in [0, {CALIBRATION_MAX}]"))
}

fn sweep(dir: &Path, count: usize, shape: &str) -> Result<String, String> {
    let data = dir.join(format!("phantoms_{shape}"));
    frd_ok(&["phantom", "--out-dir", p(&data), "--count", &count.to_string(), "--shape", shape])?;
    let csv = dir.join(format!("sweep_{shape}.csv"));
    frd_ok(&["validate", "--manifest", p(&data.join("manifest.csv")), "--out", p(&csv), "--no-plot"])?;
    let rows = read_csv(&csv)?;
    let mut summary = Vec::new();
    for kind in ["noise", "blur"] {
        let values: Vec<f64> =
            rows.iter().filter(|r| r["kind"] == kind).map(|r| r["frd"].parse::<f64>().unwrap()).collect();
        ensure!(values.len() == 5, "{shape} {kind}: {} rows", values.len());
        ensure!(values.windows(2).all(|w| w[0] < w[1]), "{shape} {kind} not strictly increasing: {values:?}");
        summary.push(format!("{kind} {:.3}->{:.2}", values[0], values[4]));
    }
    Ok(format!("{shape}: {}", summary.join(", ")))
}

fn ac5(dir: &Path) -> Check {
    let two = sweep(dir, 30, "64,64")?;
    let three = sweep(dir, 15, "32,32,32")?;
    Ok(format!("{two}; {three}"))
}

fn ac6(dir: &Path) -> Check {
    let cfg = FeatureConfig::new(2);
    let real = phantom_set(10, &[48, 48], 6);
    let (fr, fs) = (extract_set(&real, &cfg), extract_set(&noisy(&real, 10.0), &cfg));
    let opts = FrdOptions::default();
    let ab = frd(&fr, &fs, &opts).map_err(|e| e.to_string())?.frd;
    let ba = frd(&fs, &fr, &opts).map_err(|e| e.to_string())?.frd;
    ensure!((ab - ba).abs() <= 1e-9 * ab.max(1.0), "asymmetric: {ab} vs {ba}");

    let order: Vec<usize> = vec![3, 7, 0, 9, 1, 5, 2, 8, 4, 6];
    let permuted = FeatureMatrix::new(
        fr.feature_names().to_vec(),
        order.iter().map(|&k| fr.image_ids()[k].clone()).collect(),
        order.iter().map(|&k| fr.rows()[k].clone()).collect(),
    )
    .unwrap();
    let pr = frd(&permuted, &fs, &opts).map_err(|e| e.to_string())?.frd;
    ensure!(pr.to_bits() == ab.to_bits(), "permutation changed FRD: {ab} vs {pr}");

    let data = dir.join("data");
    frd_ok(&["phantom", "--out-dir", p(&data), "--count", "8", "--shape", "48,48"])?;
    let feats = dir.join("features.csv");
    frd_ok(&["extract", "--manifest", p(&data.join("manifest.csv")), "--out", p(&feats)])?;
    let stdout = frd_ok(&["compare", "--real", p(&feats), "--synth", p(&feats)])?;
    let self_frd: f64 = stdout.lines().last().unwrap_or_default().trim().parse().map_err(|e| format!("{e}"))?;
    ensure!(self_frd.abs() <= 1e-6, "CLI self-comparison gave {self_frd}");
    Ok(format!("FRD(A,B)={ab:.6} = FRD(B,A); permutation bit-exact; CLI self-FRD {self_frd}"))
}

fn ac7() -> Check {
    let img = Image::from_fn(vec![448, 448], |c| (c[0] * 448 + c[1]) as f64).unwrap();
    let center = BoundingBox::new(vec![200, 210], vec![240, 250]).unwrap();
    let out = tumor_crop(&img, &center).map_err(|e| e.to_string())?;
    ensure!(out.shape() == [224, 224], "448x448 crop gave {:?}", out.shape());

    let corners = [
        ([0, 0], [(0, 224), (0, 224)]),
        ([0, 430], [(0, 224), (224, 448)]),
        ([430, 0], [(224, 448), (0, 224)]),
        ([430, 430], [(224, 448), (224, 448)]),
    ];
    for (lo, want) in corners {
        let b = BoundingBox::new(lo.to_vec(), vec![lo[0] + 18, lo[1] + 18]).unwrap();
        let w = crop_window(&[448, 448], &b).map_err(|e| e.to_string())?;
        ensure!(w == want, "corner {lo:?}: window {w:?}");
        let c = tumor_crop(&img, &b).map_err(|e| e.to_string())?;
        ensure!(c.get(&[0, 0]) == img.get(&[want[0].0, want[1].0]), "corner {lo:?} content");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let trials = 5000;
    for _ in 0..trials {
        let shape = [rng.random_range(4..700usize), rng.random_range(4..700usize)];
        let lo: Vec<usize> = shape.iter().map(|&s| rng.random_range(0..s)).collect();
        let hi: Vec<usize> = lo.iter().zip(&shape).map(|(&l, &s)| rng.random_range(l + 1..=s)).collect();
        let b = BoundingBox::new(lo.clone(), hi.clone()).unwrap();
        let w = crop_window(&shape, &b).map_err(|e| e.to_string())?;
        for axis in 0..2 {
            let (start, end) = w[axis];
            let target = shape[axis].div_ceil(2);
            ensure!(end <= shape[axis], "window {w:?} leaves {shape:?}");
            ensure!(start <= lo[axis] && hi[axis] <= end, "window {w:?} misses bbox {lo:?}..{hi:?}");
            if hi[axis] - lo[axis] <= target {
                ensure!(end - start == target, "window {w:?} is not half of {shape:?}");
            }
        }
    }
    Ok(format!("448x448 -> 224x224, four corners clamp, {trials} random boxes contained"))
}

fn ac8(dir: &Path) -> Check {
    let multipliers = [1.0, 3.0, 2.5, 2.0];
    let data = dir.join("series");
    frd_ok(&["phantom", "--out-dir", p(&data), "--count", "8", "--shape", "64,64", "--phases", "1,3,2.5,2"])?;
    let out = dir.join("kinetics");
    frd_ok(&["kinetics", "--cases", p(&data.join("cases.csv")), "--out-dir", p(&out), "--normalized", "--no-plot"])?;
    let rows = read_csv(&out.join("kinetics_aggregate.csv"))?;
    ensure!(rows.len() == 4, "{} phases in the aggregate", rows.len());
    let means: Vec<f64> = rows.iter().map(|r| r["mean"].parse().unwrap()).collect();
    let mut shape = Vec::new();
    for (k, (&m, &want)) in means.iter().zip(&multipliers).enumerate() {
        let got = m / means[0];
        let want = want / multipliers[0];
        ensure!((got - want).abs() <= 0.1 * want, "phase {} ratio {got:.3} vs {want}", rows[k]["phase"]);
        shape.push(format!("{got:.3}"));
    }
    Ok(format!("normalized curve relative to phase 0: [{}] vs [1, 3, 2.5, 2]", shape.join(", ")))
}

fn hash_tree(root: &Path) -> BTreeMap<PathBuf, String> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let digest = Sha256::digest(fs::read(&path).unwrap());
                let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), hex);
            }
        }
    }
    out
}

fn ac9(dir: &Path) -> Check {
    let base = dir.join("inputs");
    frd_ok(&["phantom", "--out-dir", p(&base.join("data")), "--count", "6", "--shape", "40,40", "--seed", "11"])?;
    frd_ok(&["phantom", "--out-dir", p(&base.join("vol")), "--count", "3", "--shape", "16,16,16", "--seed", "11"])?;
    let manifest = base.join("data/manifest.csv");
    let real = base.join("real.csv");
    frd_ok(&["extract", "--manifest", p(&manifest), "--out", p(&real)])?;

    let out = dir.join("out");
    let o = |name: &str| out.join(name).to_str().unwrap().to_owned();
    let commands: Vec<Vec<String>> = vec![
        vec![
            "phantom".into(),
            "--out-dir".into(),
            o("phantom"),
            "--count".into(),
            "4".into(),
            "--seed".into(),
            "5".into(),
        ],
        vec![
            "phantom".into(),
            "--out-dir".into(),
            o("series"),
            "--count".into(),
            "3".into(),
            "--phases".into(),
            "1,2,1.5".into(),
        ],
        vec![
            "perturb".into(),
            "--manifest".into(),
            p(&manifest).into(),
            "--kind".into(),
            "noise".into(),
            "--scale".into(),
            "10".into(),
            "--out-dir".into(),
            o("noise"),
            "--seed".into(),
            "3".into(),
        ],
        vec![
            "perturb".into(),
            "--manifest".into(),
            p(&base.join("vol/manifest.csv")).into(),
            "--kind".into(),
            "noise".into(),
            "--scale".into(),
            "5".into(),
            "--out-dir".into(),
            o("noise3d"),
        ],
        vec![
            "perturb".into(),
            "--manifest".into(),
            p(&manifest).into(),
            "--kind".into(),
            "blur".into(),
            "--scale".into(),
            "10".into(),
            "--out-dir".into(),
            o("blur"),
        ],
        vec!["extract".into(), "--manifest".into(), p(&manifest).into(), "--out".into(), o("features.csv")],
        vec![
            "compare".into(),
            "--real".into(),
            p(&real).into(),
            "--synth".into(),
            p(&real).into(),
            "--out".into(),
            o("report.json"),
        ],
        vec![
            "validate".into(),
            "--manifest".into(),
            p(&manifest).into(),
            "--out".into(),
            o("sweep.csv"),
            "--scales".into(),
            "1,10,50".into(),
        ],
    ];
    let run_all = || -> Result<BTreeMap<PathBuf, String>, String> {
        if out.exists() {
            fs::remove_dir_all(&out).unwrap();
        }
        fs::create_dir_all(&out).unwrap();
        for args in &commands {
            let args: Vec<&str> = args.iter().map(String::as_str).collect();
            frd_ok(&args)?;
        }
        let series = out.join("series");
        frd_ok(&["kinetics", "--cases", p(&series.join("cases.csv")), "--out-dir", p(&out.join("kinetics"))])?;
        Ok(hash_tree(&out))
    };
    let first = run_all()?;
    let second = run_all()?;
    ensure!(first.len() == second.len(), "file sets differ: {} vs {}", first.len(), second.len());
    for (path, h) in &first {
        ensure!(second.get(path) == Some(h), "{} differs between runs", path.display());
    }
    Ok(format!("{} output files from {} commands hash identically on rerun", first.len(), commands.len() + 1))
}

fn ac10() -> Check {
    let imgs: Vec<Image> =
        (0..4).map(|k| Image::from_fn(vec![8, 8], |c| (c[0] * 3 + c[1] * k) as f64).unwrap()).collect();
    let same = mse_paired(&imgs, &imgs).map_err(|e| e.to_string())?;
    ensure!(same.mean == 0.0 && same.std == 0.0, "identical pairs gave {same:?}");
    let shifted: Vec<Image> = imgs
        .iter()
        .map(|i| Image::new(i.shape().to_vec(), i.data().iter().map(|v| v + 2.0).collect()).unwrap())
        .collect();
    let off = mse_paired(&imgs, &shifted).map_err(|e| e.to_string())?;
    ensure!(off.mean == 4.0 && off.std == 0.0, "offset-2 pairs gave {off:?}");
    Ok(format!("identical 0 +- 0, offset two {} +- {}", off.mean, off.std))
}
