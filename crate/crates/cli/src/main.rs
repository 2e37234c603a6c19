//! `frd`: radiomics feature extraction, Fréchet radiomics distance, and the
//! perturbation, kinetics and phantom tooling around it.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 failed validation
//! assertion.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use frd_core::frechet::NormalizationMode;
use frd_core::perturbation::PerturbationKind;

use crate::config::{FileConfig, Overrides, Settings};

#[derive(Debug, Parser)]
#[command(name = "frd", version, about = "Fréchet radiomics distance between image datasets")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML file with default settings
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Base seed for noise perturbation and phantoms
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Gray-level bin count for discretization
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(2..))]
    bins: Option<u32>,
    /// Feature normalization: joint, per-dataset or reference-real
    #[arg(long, global = true, value_parser = parse_mode)]
    norm_mode: Option<NormalizationMode>,
    /// Worker threads (default: all cores)
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    threads: Option<u64>,
    /// Skip SVG output
    #[arg(long, global = true)]
    no_plot: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract the 94 features of every manifest image into a CSV
    Extract {
        /// Dataset manifest CSV (image_id,image_path,mask_path,bbox)
        #[arg(long)]
        manifest: PathBuf,
        /// Feature CSV to write
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        features: FeatureArgs,
    },
    /// Compute the FRD between two feature CSVs
    Compare {
        /// Feature CSV of the reference set
        #[arg(long)]
        real: PathBuf,
        /// Feature CSV of the set under test
        #[arg(long)]
        synth: PathBuf,
        /// Report JSON path (printed to stdout when omitted)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Diagonal loading used only if the matrix square root fails
        #[arg(long, value_parser = parse_positive)]
        epsilon: Option<f64>,
    },
    /// Write a noise- or blur-perturbed copy of a dataset
    Perturb {
        /// Dataset manifest CSV
        #[arg(long)]
        manifest: PathBuf,
        /// noise or blur
        #[arg(long, value_parser = parse_kind)]
        kind: PerturbationKind,
        /// Perturbation scale in percent, 0 to 100
        #[arg(long, value_parser = parse_scale)]
        scale: f64,
        /// Folder for perturbed images and the rewritten manifest
        #[arg(long)]
        out_dir: PathBuf,
        /// Blur sigma is scale% of the smallest extent divided by this
        #[arg(long, value_parser = parse_positive)]
        blur_divisor: Option<f64>,
    },
    /// Sweep perturbation scales and check that FRD grows strictly
    Validate {
        /// Dataset manifest CSV
        #[arg(long)]
        manifest: PathBuf,
        /// Sweep CSV path; the chart is written next to it as .svg
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated scales in percent
        #[arg(long, value_delimiter = ',', value_parser = parse_scale)]
        scales: Option<Vec<f64>>,
        /// Comma-separated kinds (default: noise,blur)
        #[arg(long, value_delimiter = ',', value_parser = parse_kind)]
        kinds: Option<Vec<PerturbationKind>>,
        /// Blur sigma is scale% of the smallest extent divided by this
        #[arg(long, value_parser = parse_positive)]
        blur_divisor: Option<f64>,
        #[command(flatten)]
        features: FeatureArgs,
    },
    /// Tumor-region contrast kinetics from a case table
    Kinetics {
        /// CSV with header case_id,phase,image_path,mask_path
        #[arg(long)]
        cases: PathBuf,
        /// Folder for per-case curves and the aggregate
        #[arg(long)]
        out_dir: PathBuf,
        /// Divide by the mean of the tumor-free voxels
        #[arg(long)]
        normalized: bool,
    },
    /// Generate a synthetic phantom dataset or phase series
    Phantom {
        /// Folder for the generated images, masks and manifest
        #[arg(long)]
        out_dir: PathBuf,
        /// Number of images to generate
        #[arg(long, default_value_t = 30)]
        count: usize,
        /// Comma-separated extents, two for PNG slices, three for NIfTI volumes
        #[arg(long, value_delimiter = ',', default_value = "64,64")]
        shape: Vec<usize>,
        /// Lesion intensity relative to the background
        #[arg(long, value_parser = parse_positive)]
        boost: Option<f64>,
        /// Per-phase lesion multipliers; writes a kinetics case table
        #[arg(long, value_delimiter = ',', value_parser = parse_positive)]
        phases: Option<Vec<f64>>,
    },
}

#[derive(Debug, Args)]
struct FeatureArgs {
    /// Crop 2D images to the tumor-centered half-size window when a bbox is given
    #[arg(long)]
    crop: bool,
    /// Largest level difference that still counts as dependent
    #[arg(long)]
    gldm_alpha: Option<u32>,
    /// Co-occurrence offset in voxels
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    glcm_distance: Option<u64>,
}

fn parse_mode(s: &str) -> Result<NormalizationMode, String> {
    s.parse().map_err(|e: frd_core::FrdError| e.to_string())
}

fn parse_kind(s: &str) -> Result<PerturbationKind, String> {
    s.parse().map_err(|e: frd_core::FrdError| e.to_string())
}

fn parse_scale(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=100.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("scale {v} is outside [0, 100]"))
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} must be a positive number"))
    }
}

/// Failure classes mapped to exit codes.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(anyhow::Error),
    Assertion(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

impl From<frd_core::FrdError> for Failure {
    fn from(e: frd_core::FrdError) -> Self {
        Failure::Data(e.into())
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let file = match &cli.global.config {
        Some(p) => FileConfig::load(p).map_err(|e| Failure::Usage(format!("{e:#}")))?,
        None => FileConfig::default(),
    };
    let mut flags = Overrides {
        seed: cli.global.seed,
        bins: cli.global.bins,
        norm_mode: cli.global.norm_mode,
        threads: cli.global.threads.map(|t| t as usize),
        no_plot: cli.global.no_plot,
        ..Overrides::default()
    };
    match &cli.command {
        Command::Extract { features, .. } => features.apply(&mut flags),
        Command::Validate { features, scales, kinds, blur_divisor, .. } => {
            features.apply(&mut flags);
            flags.scales = scales.clone();
            flags.kinds = kinds.clone();
            flags.blur_divisor = *blur_divisor;
        }
        Command::Compare { epsilon, .. } => flags.epsilon = *epsilon,
        Command::Perturb { blur_divisor, .. } => flags.blur_divisor = *blur_divisor,
        Command::Kinetics { .. } | Command::Phantom { .. } => {}
    }
    let settings = Settings::resolve(flags, file);
    if settings.bins < 2 {
        return Err(Failure::Usage(format!("bins must be at least 2, got {}", settings.bins)));
    }
    if let Some(n) = settings.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot configure {n} threads: {e}")))?;
    }
    match cli.command {
        Command::Extract { manifest, out, .. } => commands::extract(&settings, &manifest, &out),
        Command::Compare { real, synth, out, .. } => commands::compare(&settings, &real, &synth, out.as_deref()),
        Command::Perturb { manifest, kind, scale, out_dir, .. } => {
            commands::perturb(&settings, &manifest, kind, scale, &out_dir)
        }
        Command::Validate { manifest, out, .. } => commands::validate(&settings, &manifest, &out),
        Command::Kinetics { cases, out_dir, normalized } => commands::kinetics(&settings, &cases, &out_dir, normalized),
        Command::Phantom { out_dir, count, shape, boost, phases } => {
            commands::phantom(&settings, &out_dir, count, shape, boost, phases)
        }
    }
}

impl FeatureArgs {
    fn apply(&self, flags: &mut Overrides) {
        flags.crop = self.crop;
        flags.gldm_alpha = self.gldm_alpha;
        flags.glcm_distance = self.glcm_distance.map(|d| d as usize);
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Assertion(msg)) => {
            eprintln!("validation failed: {msg}");
            ExitCode::from(3)
        }
    }
}
