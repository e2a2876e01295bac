//! Sweep configuration: a flat-section TOML file mirrored by command-line
//! flags, with flags taking precedence over file values.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use detroute_core::{ApMode, DifficultPolicy, EvalConfig, HarnessConfig, LatencySource, SvrConfig};
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub paths: PathsSection,
    #[serde(default)]
    pub latency: LatencySection,
    #[serde(default)]
    pub svr: SvrSection,
    #[serde(default)]
    pub harness: HarnessSection,
    #[serde(default)]
    pub eval: EvalSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    pub dataset: Option<PathBuf>,
    pub fast_run: Option<PathBuf>,
    pub slow_run: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub scores: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencySection {
    pub fast_constant: Option<f64>,
    pub fast_file: Option<PathBuf>,
    pub slow_constant: Option<f64>,
    pub slow_file: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvrSection {
    pub nu: Option<f64>,
    pub c: Option<f64>,
    pub tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessSection {
    pub fractions: Option<Vec<f64>>,
    pub repeats: Option<usize>,
    pub seed: Option<u64>,
    pub predictor_cost: Option<f64>,
    pub charge_predictor_always: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalSection {
    pub ap_mode: Option<String>,
    pub iou_threshold: Option<f64>,
    pub count_difficult: Option<bool>,
    pub score_threshold: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

/// Option-typed mirror of the eval flags shared by several subcommands.
#[derive(Debug, Clone, Copy, Default, clap::Args)]
pub struct EvalFlags {
    /// AP integration mode: continuous | 11pt
    #[arg(long, value_name = "MODE")]
    pub ap_mode: Option<String>,
    /// IoU threshold for matching (default 0.5)
    #[arg(long, value_name = "T")]
    pub iou_threshold: Option<f64>,
    /// Count difficult-flagged ground truths like normal objects
    #[arg(long)]
    pub count_difficult: bool,
    /// Drop detections scored below this value before evaluation
    #[arg(long, value_name = "S")]
    pub score_threshold: Option<f64>,
}

pub fn resolve_eval_config(flags: &EvalFlags, file: &EvalSection) -> Result<EvalConfig> {
    let mut config = EvalConfig::default();
    let mode = flags.ap_mode.as_deref().or(file.ap_mode.as_deref());
    if let Some(mode) = mode {
        config.ap_mode = mode.parse::<ApMode>()?;
    }
    if let Some(t) = flags.iou_threshold.or(file.iou_threshold) {
        config.iou_threshold = t;
    }
    if flags.count_difficult || file.count_difficult.unwrap_or(false) {
        config.difficult_policy = DifficultPolicy::CountNormally;
    }
    if let Some(s) = flags.score_threshold.or(file.score_threshold) {
        config.score_threshold = Some(s);
    }
    config.validate()?;
    Ok(config)
}

#[derive(Debug, Clone, Copy, Default, clap::Args)]
pub struct SvrFlags {
    /// nu parameter in (0, 1] (default 0.5)
    #[arg(long)]
    pub nu: Option<f64>,
    /// Regularization trade-off C (default 1.0)
    #[arg(long)]
    pub c: Option<f64>,
    /// Solver convergence tolerance (default 1e-6)
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Iteration cap before the solver reports non-convergence
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

pub fn resolve_svr_config(flags: &SvrFlags, file: &SvrSection) -> Result<SvrConfig> {
    let mut config = SvrConfig::default();
    if let Some(v) = flags.nu.or(file.nu) {
        config.nu = v;
    }
    if let Some(v) = flags.c.or(file.c) {
        config.c = v;
    }
    if let Some(v) = flags.tolerance.or(file.tolerance) {
        config.tolerance = v;
    }
    if let Some(v) = flags.max_iterations.or(file.max_iterations) {
        config.max_iterations = v;
    }
    config.validate()?;
    Ok(config)
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct HarnessFlags {
    /// Comma-separated easy fractions to sweep (default 1.0,0.75,0.5,0.25,0.0)
    #[arg(long, value_name = "F,F,...", value_delimiter = ',')]
    pub fractions: Option<Vec<f64>>,
    /// Random-baseline repeats per fraction (default 5)
    #[arg(long)]
    pub repeats: Option<usize>,
    /// Base seed; repeats use seed, seed+1, ...
    #[arg(long)]
    pub seed: Option<u64>,
    /// Predictor cost in seconds per image (default 0.05)
    #[arg(long, value_name = "S")]
    pub predictor_cost: Option<f64>,
    /// Charge the predictor cost at the endpoint fractions too
    #[arg(long)]
    pub charge_predictor_always: bool,
}

pub fn resolve_harness_config(
    flags: &HarnessFlags,
    file: &HarnessSection,
    eval: EvalConfig,
) -> Result<HarnessConfig> {
    let mut config = HarnessConfig {
        eval,
        ..HarnessConfig::default()
    };
    if let Some(f) = flags.fractions.clone().or_else(|| file.fractions.clone()) {
        config.fractions = f;
    }
    if let Some(r) = flags.repeats.or(file.repeats) {
        config.repeats = r;
    }
    if let Some(s) = flags.seed.or(file.seed) {
        config.seed = s;
    }
    if let Some(p) = flags.predictor_cost.or(file.predictor_cost) {
        config.predictor_cost = p;
    }
    if flags.charge_predictor_always || file.charge_predictor_always.unwrap_or(false) {
        config.charge_predictor_always = true;
    }
    config.validate()?;
    Ok(config)
}

/// Latency flags for one detector run; a constant and a per-image file are
/// mutually exclusive.
pub fn resolve_latency(
    constant: Option<f64>,
    file_path: Option<&Path>,
    file_constant: Option<f64>,
    file_file: Option<&Path>,
    which: &str,
) -> Result<LatencySource> {
    let constant = constant.or(file_constant);
    let path = file_path.or(file_file);
    match (constant, path) {
        (Some(_), Some(_)) => {
            bail!("{which}: give either a constant latency or a latency file, not both")
        }
        (Some(seconds), None) => Ok(LatencySource::Constant(seconds)),
        (None, Some(p)) => Ok(LatencySource::PerImage(
            detroute_core::load_latencies(p)?,
        )),
        (None, None) => bail!("{which}: a latency source is required (constant or file)"),
    }
}

pub fn require_path(
    flag: Option<PathBuf>,
    file: Option<PathBuf>,
    what: &str,
) -> Result<PathBuf> {
    flag.or(file)
        .with_context(|| format!("missing required input: {what}"))
}
