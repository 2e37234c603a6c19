//! Effective run settings: command-line flags override the TOML config
//! file, which overrides the defaults.

use std::path::Path;

use anyhow::{Context, Result};
use frd_core::features::FeatureConfig;
use frd_core::frechet::{FrdOptions, NormalizationMode, DEFAULT_EPSILON};
use frd_core::perturbation::{PerturbationKind, DEFAULT_BLUR_DIVISOR, DEFAULT_SCALES};
use serde::{Deserialize, Serialize};

/// Keys accepted in the `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub bins: Option<u32>,
    pub norm_mode: Option<NormalizationMode>,
    pub threads: Option<usize>,
    pub no_plot: Option<bool>,
    pub gldm_alpha: Option<u32>,
    pub glcm_distance: Option<usize>,
    pub epsilon: Option<f64>,
    pub blur_divisor: Option<f64>,
    pub crop: Option<bool>,
    pub scales: Option<Vec<f64>>,
    pub kinds: Option<Vec<PerturbationKind>>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Settings shared by all subcommands after merging flags, file and defaults.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub seed: u64,
    pub bins: u32,
    pub norm_mode: NormalizationMode,
    /// Never part of the fingerprint: results do not depend on it.
    #[serde(skip)]
    pub threads: Option<usize>,
    pub no_plot: bool,
    pub gldm_alpha: u32,
    pub glcm_distance: usize,
    pub epsilon: f64,
    pub blur_divisor: f64,
    pub crop: bool,
    pub scales: Vec<f64>,
    pub kinds: Vec<PerturbationKind>,
}

/// Values given on the command line; `None` means not given.
#[derive(Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub bins: Option<u32>,
    pub norm_mode: Option<NormalizationMode>,
    pub threads: Option<usize>,
    pub no_plot: bool,
    pub gldm_alpha: Option<u32>,
    pub glcm_distance: Option<usize>,
    pub epsilon: Option<f64>,
    pub blur_divisor: Option<f64>,
    pub crop: bool,
    pub scales: Option<Vec<f64>>,
    pub kinds: Option<Vec<PerturbationKind>>,
}

impl Settings {
    pub fn resolve(flags: Overrides, file: FileConfig) -> Self {
        Self {
            seed: flags.seed.or(file.seed).unwrap_or(0),
            bins: flags.bins.or(file.bins).unwrap_or(32),
            norm_mode: flags.norm_mode.or(file.norm_mode).unwrap_or_default(),
            threads: flags.threads.or(file.threads),
            no_plot: flags.no_plot || file.no_plot.unwrap_or(false),
            gldm_alpha: flags.gldm_alpha.or(file.gldm_alpha).unwrap_or(0),
            glcm_distance: flags.glcm_distance.or(file.glcm_distance).unwrap_or(1),
            epsilon: flags.epsilon.or(file.epsilon).unwrap_or(DEFAULT_EPSILON),
            blur_divisor: flags.blur_divisor.or(file.blur_divisor).unwrap_or(DEFAULT_BLUR_DIVISOR),
            crop: flags.crop || file.crop.unwrap_or(false),
            scales: flags.scales.or(file.scales).unwrap_or_else(|| DEFAULT_SCALES.to_vec()),
            kinds: flags.kinds.or(file.kinds).unwrap_or_else(|| PerturbationKind::ALL.to_vec()),
        }
    }

    pub fn features(&self, dims: usize) -> FeatureConfig {
        FeatureConfig { bin_count: self.bins, gldm_alpha: self.gldm_alpha, glcm_distance: self.glcm_distance, dims }
    }

    pub fn frd_options(&self) -> FrdOptions {
        FrdOptions { mode: self.norm_mode, epsilon: self.epsilon }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file: FileConfig = toml::from_str("bins = 16\nseed = 5\nnorm_mode = \"per-dataset\"\n").unwrap();
        let s = Settings::resolve(Overrides { bins: Some(8), ..Overrides::default() }, file);
        assert_eq!((s.bins, s.seed, s.norm_mode, s.glcm_distance), (8, 5, NormalizationMode::PerDataset, 1));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("binz = 3").is_err());
    }
}
