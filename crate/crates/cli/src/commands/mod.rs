//! Subcommand implementations.

pub mod benchmark;
pub mod evaluate;
pub mod render_tree;
pub mod serve;
pub mod train;

use std::path::PathBuf;

use crate::config::Settings;
use crate::CliError;

/// Flags shared by the evaluation-style commands; every flag overrides the
/// config file, which overrides the defaults.
#[derive(Debug, Clone, clap::Args)]
pub struct CommonOpts {
    /// Config file (key = value); also honoured via VERITEX_CONFIG.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Stability tolerance for probability movements.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Root seed; all component seeds derive from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Perturbation mode: deterministic | stochastic.
    #[arg(long)]
    pub mode: Option<String>,
    /// Neutrality band as a fraction of the largest |z|.
    #[arg(long)]
    pub zeta: Option<f64>,
    /// Tie-break order for technique selection (comma separated).
    #[arg(long)]
    pub priority: Option<String>,
    /// Perturbation statistics: training | local.
    #[arg(long)]
    pub stat_source: Option<String>,
    /// Neighbors drawn by the local surrogate.
    #[arg(long)]
    pub lime_samples: Option<usize>,
    /// Coalitions sampled by the Shapley estimator.
    #[arg(long)]
    pub shap_coalitions: Option<usize>,
    /// Column shuffles per feature for permutation importance.
    #[arg(long)]
    pub pi_repeats: Option<usize>,
}

pub fn resolve_settings(opts: &CommonOpts) -> Result<Settings, CliError> {
    let mut s = Settings::load(opts.config.as_deref())?;
    if let Some(v) = opts.delta {
        s.delta = v;
    }
    if let Some(v) = opts.seed {
        s.seed = v;
    }
    if let Some(mode) = &opts.mode {
        match mode.as_str() {
            "deterministic" => s.stochastic = false,
            "stochastic" => s.stochastic = true,
            other => return Err(CliError::Usage(format!("unknown mode '{other}'"))),
        }
    }
    if let Some(v) = opts.zeta {
        s.zeta = v;
    }
    if let Some(p) = &opts.priority {
        s.priority = p.split(',').map(|t| t.trim().to_string()).collect();
    }
    if let Some(src) = &opts.stat_source {
        match src.as_str() {
            "training" => s.local_stats = false,
            "local" => s.local_stats = true,
            other => return Err(CliError::Usage(format!("unknown stat_source '{other}'"))),
        }
    }
    if let Some(v) = opts.lime_samples {
        s.lime_samples = v;
    }
    if let Some(v) = opts.shap_coalitions {
        s.shap_coalitions = v;
    }
    if let Some(v) = opts.pi_repeats {
        s.pi_repeats = v;
    }
    Ok(s)
}

pub fn split_csv(list: &str) -> Vec<String> {
    list.split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}
