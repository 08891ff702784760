//! Run settings: defaults, config-file overrides, flag overrides.
//!
//! The config file is a simple `key = value` list. Its path comes from
//! `--config` or the `VERITEX_CONFIG` environment variable; individual
//! command-line flags always win over file values.

use std::path::Path;

use veritex_core::importance::{LimeParams, ShapParams};
use veritex_core::investigator::{InvestigateConfig, NeutralityBand, PerturbMode, StatSource};
use veritex_core::selector::{default_priority, EvalConfig};

use crate::CliError;

#[derive(Debug, Clone)]
pub struct Settings {
    pub delta: f64,
    pub seed: u64,
    pub stochastic: bool,
    pub stochastic_repeats: usize,
    pub zeta: f64,
    pub zeta_absolute: Option<f64>,
    pub ridge_lambda: f64,
    pub kernel_width: Option<f64>,
    pub lime_samples: usize,
    pub shap_coalitions: usize,
    pub pi_repeats: usize,
    pub priority: Vec<String>,
    pub local_stats: bool,
    pub sample: usize,
    /// Report `w_j * v_j` instead of the raw coefficient for intrinsic
    /// importances.
    pub intrinsic_product: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            delta: 0.01,
            seed: 0,
            stochastic: false,
            stochastic_repeats: 5,
            zeta: 1e-6,
            zeta_absolute: None,
            ridge_lambda: 1e-3,
            kernel_width: None,
            lime_samples: 1000,
            shap_coalitions: 512,
            pi_repeats: 5,
            priority: default_priority(),
            local_stats: false,
            sample: 50,
            intrinsic_product: false,
        }
    }
}

impl Settings {
    /// Load settings from a config file, if one is given or set in the
    /// environment.
    pub fn load(explicit_path: Option<&Path>) -> Result<Settings, CliError> {
        let mut settings = Settings::default();
        let env_path = std::env::var("VERITEX_CONFIG").ok();
        let path = explicit_path
            .map(|p| p.to_path_buf())
            .or_else(|| env_path.map(std::path::PathBuf::from));
        if let Some(path) = path {
            let text = std::fs::read_to_string(&path).map_err(|e| {
                CliError::Usage(format!("cannot read config {}: {e}", path.display()))
            })?;
            settings.apply_file(&text)?;
        }
        Ok(settings)
    }

    fn apply_file(&mut self, text: &str) -> Result<(), CliError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Usage(format!(
                    "config line {}: expected 'key = value'",
                    lineno + 1
                ))
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| CliError::Usage(format!("config line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("bad value '{value}' for {key}"))
        }
        match key {
            "delta" => self.delta = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "mode" => match value {
                "deterministic" => self.stochastic = false,
                "stochastic" => self.stochastic = true,
                other => return Err(format!("unknown mode '{other}'")),
            },
            "stochastic_repeats" => self.stochastic_repeats = parse(key, value)?,
            "zeta" => self.zeta = parse(key, value)?,
            "zeta_absolute" => self.zeta_absolute = Some(parse(key, value)?),
            "ridge_lambda" => self.ridge_lambda = parse(key, value)?,
            "kernel_width" => self.kernel_width = Some(parse(key, value)?),
            "lime_samples" => self.lime_samples = parse(key, value)?,
            "shap_coalitions" => self.shap_coalitions = parse(key, value)?,
            "pi_repeats" => self.pi_repeats = parse(key, value)?,
            "priority" => {
                self.priority = value.split(',').map(|s| s.trim().to_string()).collect();
            }
            "stat_source" => match value {
                "training" => self.local_stats = false,
                "local" => self.local_stats = true,
                other => return Err(format!("unknown stat_source '{other}'")),
            },
            "sample" => self.sample = parse(key, value)?,
            "intrinsic_form" => match value {
                "coefficient" => self.intrinsic_product = false,
                "product" => self.intrinsic_product = true,
                other => return Err(format!("unknown intrinsic_form '{other}'")),
            },
            other => return Err(format!("unknown key '{other}'")),
        }
        Ok(())
    }

    pub fn investigate_config(&self) -> InvestigateConfig {
        InvestigateConfig {
            delta: self.delta,
            mode: if self.stochastic {
                PerturbMode::Stochastic { seed: self.seed }
            } else {
                PerturbMode::Deterministic
            },
            stochastic_repeats: self.stochastic_repeats,
            band: match self.zeta_absolute {
                Some(abs) => NeutralityBand::Absolute(abs),
                None => NeutralityBand::RelativeToMax(self.zeta),
            },
            stat_source: if self.local_stats {
                StatSource::LocalNeighborhood
            } else {
                StatSource::TrainingSet
            },
        }
    }

    pub fn eval_config(&self) -> EvalConfig {
        EvalConfig {
            investigate: self.investigate_config(),
            priority: self.priority.clone(),
            root_seed: self.seed,
        }
    }

    pub fn lime_params(&self) -> LimeParams {
        LimeParams {
            n_samples: self.lime_samples,
            kernel_width: self.kernel_width,
            ridge_lambda: self.ridge_lambda,
        }
    }

    pub fn shap_params(&self) -> ShapParams {
        ShapParams {
            n_coalitions: self.shap_coalitions,
        }
    }
}
