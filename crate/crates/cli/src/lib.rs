//! Library side of the command-line tool: settings, technique parsing,
//! the benchmark harness, and the command implementations.

use std::io::BufReader;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use veritex_core::datamodel::{load_dataset, DataError, Dataset, Instance, Schema};
use veritex_core::importance::{ImportanceVector, IntrinsicForm, TechniqueSpec};
use veritex_core::models::{ModelError, Predictor};

pub mod benchmark;
pub mod commands;
pub mod config;

use config::Settings;

/// Command failure, split by exit-code class: usage errors exit 2,
/// runtime errors exit 3.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) | CliError::Runtime(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for CliError {}

macro_rules! runtime_from {
    ($($ty:ty),*) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> CliError {
                CliError::Runtime(e.to_string())
            }
        })*
    };
}

runtime_from!(
    DataError,
    ModelError,
    std::io::Error,
    serde_json::Error,
    veritex_core::importance::TechniqueError,
    veritex_core::investigator::InvestigateError,
    veritex_core::argumentation::ArgError,
    veritex_core::selector::EvalError
);

/// Load a dataset from its CSV and schema paths.
pub fn read_dataset(data: &Path, schema: &Path, delimiter: char) -> Result<Dataset, CliError> {
    let schema_text = std::fs::read_to_string(schema)
        .map_err(|e| CliError::Usage(format!("cannot read schema {}: {e}", schema.display())))?;
    let schema = Schema::parse(&schema_text)?;
    let file = std::fs::File::open(data)
        .map_err(|e| CliError::Usage(format!("cannot open dataset {}: {e}", data.display())))?;
    Ok(load_dataset(BufReader::new(file), &schema, delimiter)?)
}

/// Parse technique names into specs. Accepted: `intrinsic`, `pi` (alias
/// `permutation`), `lime`, `shap` (alias `kernel-shap`), and
/// `external:<file.json>` for importances computed elsewhere.
pub fn parse_techniques(
    names: &[String],
    settings: &Settings,
) -> Result<Vec<TechniqueSpec>, CliError> {
    if names.is_empty() {
        return Err(CliError::Usage("no techniques given".into()));
    }
    names
        .iter()
        .map(|name| match name.as_str() {
            "intrinsic" => Ok(TechniqueSpec::Intrinsic(if settings.intrinsic_product {
                IntrinsicForm::CoefficientTimesValue
            } else {
                IntrinsicForm::Coefficient
            })),
            "pi" | "permutation" => Ok(TechniqueSpec::Permutation {
                repeats: settings.pi_repeats,
            }),
            "lime" => Ok(TechniqueSpec::Lime(settings.lime_params())),
            "shap" | "kernel-shap" => Ok(TechniqueSpec::KernelShap(settings.shap_params())),
            other => {
                if let Some(path) = other.strip_prefix("external:") {
                    let text = std::fs::read_to_string(path).map_err(|e| {
                        CliError::Usage(format!("cannot read importance file {path}: {e}"))
                    })?;
                    let z = ImportanceVector::from_json(&text)?;
                    Ok(TechniqueSpec::External(z))
                } else {
                    Err(CliError::Usage(format!("unknown technique '{other}'")))
                }
            }
        })
        .collect()
}

/// Wrapper tracking the probability of the class the model predicts for a
/// fixed target instance: when that class is the negative one, the
/// monitored probability is `1 - p`.
pub struct PredictedClassMonitor {
    inner: Arc<dyn Predictor>,
    flip: bool,
    negated: Option<(Vec<f64>, f64)>,
    queries: AtomicU64,
}

impl PredictedClassMonitor {
    pub fn new(inner: Arc<dyn Predictor>, target: &Instance) -> Result<Self, ModelError> {
        let baseline = inner.predict_proba(target)?;
        let flip = baseline < 0.5;
        let negated = inner
            .coefficients()
            .map(|(w, b)| (w.iter().map(|v| -v).collect(), -b));
        Ok(PredictedClassMonitor {
            inner,
            flip,
            negated: if flip { negated } else { None },
            queries: AtomicU64::new(0),
        })
    }
}

impl Predictor for PredictedClassMonitor {
    fn predict_proba(&self, x: &Instance) -> Result<f64, ModelError> {
        self.queries.fetch_add(1, Ordering::Relaxed);
        let p = self.inner.predict_proba(x)?;
        Ok(if self.flip { 1.0 - p } else { p })
    }

    fn arity(&self) -> usize {
        self.inner.arity()
    }

    fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    fn coefficients(&self) -> Option<(&[f64], f64)> {
        if self.flip {
            self.negated.as_ref().map(|(w, b)| (w.as_slice(), *b))
        } else {
            self.inner.coefficients()
        }
    }
}
