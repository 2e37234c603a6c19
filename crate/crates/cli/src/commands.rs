//! Subcommand implementations.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use frd_core::features::{extract_entry, read_features_csv, write_features_csv, FeatureVector};
use frd_core::fingerprint::fingerprint;
use frd_core::frechet::{frd, FeatureMatrix};
use frd_core::io::{load_entry, load_manifest};
use frd_core::kinetics::{
    kinetics_chart, kinetics_curves, load_case_table, load_cases, write_aggregate_csv, write_series_csv,
};
use frd_core::perturbation::{perturb_dataset, validation_sweep, PerturbationKind, PerturbationSpec, SweepConfig};
use frd_core::phantom::{generate_phantoms, generate_phase_series, PhantomSpec};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::Settings;
use crate::Failure;

type Outcome = Result<(), Failure>;

/// Canonical description of a run; its hash is the config fingerprint.
fn run_config(command: &str, settings: &Settings, params: Value) -> Value {
    json!({ "command": command, "settings": settings, "params": params })
}

fn meta_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.file_name().unwrap_or_default().to_os_string();
    name.push(".meta.json");
    artifact.with_file_name(name)
}

/// Writes `<artifact>.meta.json` holding the fingerprint and effective config.
fn write_meta(artifact: &Path, config: &Value, extra: Value) -> anyhow::Result<()> {
    let mut meta = json!({
        "artifact": artifact.file_name().map(|n| n.to_string_lossy().into_owned()),
        "config_fingerprint": fingerprint(config),
        "config": config,
        "tool": format!("frd {}", env!("CARGO_PKG_VERSION")),
    });
    if let (Value::Object(m), Value::Object(e)) = (&mut meta, extra) {
        m.extend(e);
    }
    let path = meta_path(artifact);
    let text = serde_json::to_string_pretty(&meta)? + "\n";
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn path_str(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

fn ensure_parent(path: &Path) -> anyhow::Result<()> {
    match path.parent().filter(|p| !p.as_os_str().is_empty()) {
        Some(dir) => std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())),
        None => Ok(()),
    }
}

pub fn extract(settings: &Settings, manifest_path: &Path, out: &Path) -> Outcome {
    let manifest = load_manifest(manifest_path)?;
    let config = settings.features(manifest.dims);
    config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let results: Vec<_> = manifest
        .entries
        .par_iter()
        .map(|e| load_entry::<f64>(e).and_then(|l| extract_entry(&l, &config, settings.crop)))
        .collect();
    let failures: Vec<String> = results.iter().filter_map(|r| r.as_ref().err().map(|e| e.to_string())).collect();
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("{f}");
        }
        return Err(Failure::Data(anyhow!("{} of {} images failed", failures.len(), manifest.len())));
    }
    let rows: Vec<FeatureVector<f64>> = results.into_iter().map(Result::unwrap).collect();
    ensure_parent(out)?;
    write_features_csv(out, &rows)?;
    let rc = run_config(
        "extract",
        settings,
        json!({ "manifest": path_str(manifest_path), "out": path_str(out), "features": config }),
    );
    write_meta(out, &rc, json!({ "n_images": rows.len() }))?;
    println!("wrote {} feature rows to {}", rows.len(), out.display());
    Ok(())
}

/// Fingerprint recorded next to a features CSV, if any.
fn features_fingerprint(csv: &Path) -> Value {
    std::fs::read_to_string(meta_path(csv))
        .ok()
        .and_then(|t| serde_json::from_str::<Value>(&t).ok())
        .and_then(|m| m.get("config_fingerprint").cloned())
        .unwrap_or(Value::Null)
}

pub fn compare(settings: &Settings, real: &Path, synth: &Path, out: Option<&Path>) -> Outcome {
    let load = |p: &Path| -> Result<FeatureMatrix<f64>, Failure> {
        let rows = read_features_csv::<f64>(p).with_context(|| format!("reading {}", p.display()))?;
        if rows.is_empty() {
            return Err(Failure::Data(anyhow!("{} has no feature rows", p.display())));
        }
        Ok(FeatureMatrix::from_vectors(rows)?)
    };
    let (r, s) = (load(real)?, load(synth)?);
    let mut report = frd(&r, &s, &settings.frd_options())?;
    let rc = run_config(
        "compare",
        settings,
        json!({
            "normalization_mode": settings.norm_mode,
            "epsilon": settings.epsilon,
            "real_features": features_fingerprint(real),
            "synth_features": features_fingerprint(synth),
        }),
    );
    report.config_fingerprint = fingerprint(&rc);
    let text = serde_json::to_string_pretty(&report).map_err(anyhow::Error::from)? + "\n";
    match out {
        Some(p) => {
            ensure_parent(p)?;
            std::fs::write(p, &text).with_context(|| format!("writing {}", p.display()))?;
            println!("report: {}", p.display());
        }
        None => print!("{text}"),
    }
    println!("n_real: {}, n_synth: {}, mode: {}", report.n_real, report.n_synth, report.normalization_mode);
    println!("mean_term: {}", report.mean_term);
    println!("trace_term: {}", report.trace_term);
    if report.epsilon_applied > 0.0 {
        println!("regularized with epsilon {}", report.epsilon_applied);
    }
    println!("{}", report.frd);
    Ok(())
}

pub fn perturb(
    settings: &Settings,
    manifest_path: &Path,
    kind: PerturbationKind,
    scale: f64,
    out_dir: &Path,
) -> Outcome {
    let manifest = load_manifest(manifest_path)?;
    let spec = PerturbationSpec { kind, scale_pct: scale, seed: settings.seed, blur_divisor: settings.blur_divisor };
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let outcome = perturb_dataset(&manifest, &spec, out_dir)?;
    for id in &outcome.degenerate_ids {
        eprintln!("warning: image \"{id}\" has a constant intensity and was copied unchanged");
    }
    let rc = run_config(
        "perturb",
        settings,
        json!({ "manifest": path_str(manifest_path), "out_dir": path_str(out_dir), "spec": spec }),
    );
    write_meta(&outcome.manifest_path, &rc, json!({ "degenerate_ids": outcome.degenerate_ids }))?;
    println!("wrote {} perturbed images; manifest {}", outcome.manifest.len(), outcome.manifest_path.display());
    Ok(())
}

pub fn validate(settings: &Settings, manifest_path: &Path, out: &Path) -> Outcome {
    let manifest = load_manifest(manifest_path)?;
    let sweep = SweepConfig {
        kinds: settings.kinds.clone(),
        scales: settings.scales.clone(),
        features: settings.features(manifest.dims),
        frd: settings.frd_options(),
        seed: settings.seed,
        blur_divisor: settings.blur_divisor,
        crop: settings.crop,
    };
    if sweep.scales.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Failure::Usage(format!("scales {:?} must be strictly increasing", sweep.scales)));
    }
    let mut result = validation_sweep(&manifest, &sweep)?;
    let rc = run_config(
        "validate",
        settings,
        json!({ "manifest": path_str(manifest_path), "out": path_str(out), "sweep": sweep }),
    );
    result.config_fingerprint = fingerprint(&rc);
    ensure_parent(out)?;
    result.write_csv(out)?;
    write_meta(out, &rc, json!({ "monotone": result.is_monotone() }))?;
    if !settings.no_plot {
        let svg = out.with_extension("svg");
        std::fs::write(&svg, result.chart().to_svg()).with_context(|| format!("writing {}", svg.display()))?;
        write_meta(&svg, &rc, json!({}))?;
    }
    for row in &result.rows {
        println!("{} {:>6}% {}D frd {}", row.kind, row.scale_pct, row.dims, row.frd);
    }
    match result.first_violation() {
        Some((a, b)) => Err(Failure::Assertion(format!(
            "{}: FRD at {}% ({}) is not below FRD at {}% ({})",
            a.kind, a.scale_pct, a.frd, b.scale_pct, b.frd
        ))),
        None => Ok(()),
    }
}

pub fn kinetics(settings: &Settings, cases_path: &Path, out_dir: &Path, normalized: bool) -> Outcome {
    let table = load_case_table(cases_path)?;
    let (cases, warnings) = load_cases::<f64>(&table)?;
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    if cases.is_empty() {
        return Err(Failure::Data(anyhow!("no usable cases in {}", cases_path.display())));
    }
    let (series, aggregate) = kinetics_curves(&cases, normalized)?;
    std::fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let rc = run_config(
        "kinetics",
        settings,
        json!({ "cases": path_str(cases_path), "out_dir": path_str(out_dir), "normalized": normalized }),
    );
    let conventions = json!({ "std": "sample standard deviation, 1/(N-1); 0 for a single case", "warnings": warnings });
    let series_path = out_dir.join("kinetics.csv");
    write_series_csv(&series_path, &series)?;
    write_meta(&series_path, &rc, conventions.clone())?;
    let agg_path = out_dir.join("kinetics_aggregate.csv");
    write_aggregate_csv(&agg_path, &aggregate)?;
    write_meta(&agg_path, &rc, conventions)?;
    if !settings.no_plot {
        let svg = out_dir.join("kinetics.svg");
        let mut chart = kinetics_chart(&aggregate, normalized);
        chart.description = Some(format!("config_fingerprint {}", fingerprint(&rc)));
        std::fs::write(&svg, chart.to_svg()).with_context(|| format!("writing {}", svg.display()))?;
        write_meta(&svg, &rc, json!({}))?;
    }
    println!("{} series over {} phases", series.len(), aggregate.phases.len());
    for p in &aggregate.phases {
        println!("{} mean {} std {} n {}", p.phase, p.mean, p.std, p.n);
    }
    Ok(())
}

pub fn phantom(
    settings: &Settings,
    out_dir: &Path,
    count: usize,
    shape: Vec<usize>,
    boost: Option<f64>,
    phases: Option<Vec<f64>>,
) -> Outcome {
    let mut spec = PhantomSpec::new(count, shape, settings.seed);
    if let Some(b) = boost {
        spec.lesion_boost = b;
    }
    spec.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let rc = run_config("phantom", settings, json!({ "out_dir": path_str(out_dir), "spec": spec, "phases": phases }));
    match phases {
        Some(multipliers) => {
            let (table, rows) = generate_phase_series(&spec, &multipliers, out_dir)?;
            write_meta(&table, &rc, json!({}))?;
            println!("wrote {} cases x {} phases; case table {}", spec.count, multipliers.len(), table.display());
            debug_assert_eq!(rows.len(), spec.count * multipliers.len());
        }
        None => {
            let manifest = generate_phantoms(&spec, out_dir)?;
            let path = out_dir.join("manifest.csv");
            write_meta(&path, &rc, json!({}))?;
            println!("wrote {} phantoms; manifest {}", manifest.len(), path.display());
        }
    }
    Ok(())
}
