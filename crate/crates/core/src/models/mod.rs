//! Probabilistic predictor contract and self-contained reference models.
//!
//! Every predictor exposes a single scalar: the probability of the positive
//! class. Predictors are deterministic and immutable after construction,
//! except for the query counter, which is safe under concurrent increments.

use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datamodel::Instance;

mod io;
mod subprocess;
mod train;

pub use io::{load_predictor, write_model_file, ModelFile, SelfTestCase};
pub use subprocess::SubprocessModel;
pub use train::{train_logistic, train_mlp};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("instance has {got} values but the model expects {expected}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("labels must be binary (0/1); found class {0}")]
    NonBinaryLabels(usize),
    #[error("dataset has no labels")]
    MissingLabels,
    #[error("invalid training parameter: {0}")]
    BadParameter(String),
    #[error("no scripted response for input {0:?}")]
    UnscriptedInput(Vec<f64>),
    #[error("model load error: {0}")]
    Load(String),
    #[error("subprocess predictor error: {0}")]
    Subprocess(String),
}

/// The contract the investigator queries: positive-class probability in [0, 1].
pub trait Predictor: Send + Sync {
    /// Probability of the positive class for `x`. Must be deterministic.
    fn predict_proba(&self, x: &Instance) -> Result<f64, ModelError>;

    /// Number of input features this model accepts.
    fn arity(&self) -> usize;

    /// Total `predict_proba` calls made against this instance.
    fn query_count(&self) -> u64;

    /// Linear coefficients `(weights, bias)` when the model is intrinsically
    /// interpretable as a linear scorer; `None` otherwise.
    fn coefficients(&self) -> Option<(&[f64], f64)> {
        None
    }
}

/// Numerically stable logistic sigmoid.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Logistic-linear model: `sigmoid(w . x + b)`.
#[derive(Debug)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    queries: AtomicU64,
}

impl LinearModel {
    pub fn new(weights: Vec<f64>, bias: f64) -> LinearModel {
        LinearModel {
            weights,
            bias,
            queries: AtomicU64::new(0),
        }
    }
}

impl Clone for LinearModel {
    fn clone(&self) -> Self {
        LinearModel::new(self.weights.clone(), self.bias)
    }
}

impl Predictor for LinearModel {
    fn predict_proba(&self, x: &Instance) -> Result<f64, ModelError> {
        if x.len() != self.weights.len() {
            return Err(ModelError::ArityMismatch {
                expected: self.weights.len(),
                got: x.len(),
            });
        }
        self.queries.fetch_add(1, Ordering::Relaxed);
        let z: f64 = self
            .weights
            .iter()
            .zip(x.values())
            .map(|(w, v)| w * v)
            .sum::<f64>()
            + self.bias;
        Ok(sigmoid(z))
    }

    fn arity(&self) -> usize {
        self.weights.len()
    }

    fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    fn coefficients(&self) -> Option<(&[f64], f64)> {
        Some((&self.weights, self.bias))
    }
}

/// One dense layer: `weights[out][in]`, one bias per output unit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn forward(&self, input: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(input).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect()
    }
}

/// Feed-forward network with rectifier hidden units and a sigmoid output.
#[derive(Debug)]
pub struct MlpModel {
    pub layers: Vec<Layer>,
    input_arity: usize,
    queries: AtomicU64,
}

impl MlpModel {
    /// `layers` must chain dimensionally and end in a single output unit.
    pub fn new(input_arity: usize, layers: Vec<Layer>) -> Result<MlpModel, ModelError> {
        let mut dim = input_arity;
        for (i, layer) in layers.iter().enumerate() {
            if layer.weights.iter().any(|row| row.len() != dim) {
                return Err(ModelError::Load(format!(
                    "layer {i} expects input width {dim}"
                )));
            }
            if layer.weights.len() != layer.bias.len() {
                return Err(ModelError::Load(format!(
                    "layer {i} has {} weight rows but {} biases",
                    layer.weights.len(),
                    layer.bias.len()
                )));
            }
            dim = layer.weights.len();
        }
        if dim != 1 {
            return Err(ModelError::Load(format!(
                "final layer must have one output unit, found {dim}"
            )));
        }
        Ok(MlpModel {
            layers,
            input_arity,
            queries: AtomicU64::new(0),
        })
    }

    /// Forward pass keeping every post-activation, used by the trainer.
    pub(crate) fn forward_trace(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut activations = vec![x.to_vec()];
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut z = layer.forward(activations.last().unwrap());
            if i < last {
                for v in &mut z {
                    *v = v.max(0.0);
                }
            } else {
                for v in &mut z {
                    *v = sigmoid(*v);
                }
            }
            activations.push(z);
        }
        activations
    }
}

impl Clone for MlpModel {
    fn clone(&self) -> Self {
        MlpModel {
            layers: self.layers.clone(),
            input_arity: self.input_arity,
            queries: AtomicU64::new(0),
        }
    }
}

impl Predictor for MlpModel {
    fn predict_proba(&self, x: &Instance) -> Result<f64, ModelError> {
        if x.len() != self.input_arity {
            return Err(ModelError::ArityMismatch {
                expected: self.input_arity,
                got: x.len(),
            });
        }
        self.queries.fetch_add(1, Ordering::Relaxed);
        Ok(*self
            .forward_trace(x.values())
            .last()
            .unwrap()
            .first()
            .unwrap())
    }

    fn arity(&self) -> usize {
        self.input_arity
    }

    fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}

/// Table-driven predictor replaying recorded responses.
///
/// Lookup matches an input against the recorded cases coordinate-wise within
/// `tolerance` (first match wins), falling back to `default` when no case
/// matches. Useful for replaying the behaviour of external models in tests
/// and demos.
#[derive(Debug)]
pub struct ScriptedModel {
    arity: usize,
    tolerance: f64,
    cases: Vec<(Vec<f64>, f64)>,
    default: Option<f64>,
    queries: AtomicU64,
}

impl ScriptedModel {
    pub fn new(
        arity: usize,
        tolerance: f64,
        cases: Vec<(Vec<f64>, f64)>,
        default: Option<f64>,
    ) -> Result<ScriptedModel, ModelError> {
        for (input, p) in &cases {
            if input.len() != arity {
                return Err(ModelError::ArityMismatch {
                    expected: arity,
                    got: input.len(),
                });
            }
            if !(0.0..=1.0).contains(p) {
                return Err(ModelError::Load(format!(
                    "scripted probability {p} outside [0, 1]"
                )));
            }
        }
        if let Some(p) = default {
            if !(0.0..=1.0).contains(&p) {
                return Err(ModelError::Load(format!(
                    "default probability {p} outside [0, 1]"
                )));
            }
        }
        Ok(ScriptedModel {
            arity,
            tolerance,
            cases,
            default,
            queries: AtomicU64::new(0),
        })
    }
}

impl Predictor for ScriptedModel {
    fn predict_proba(&self, x: &Instance) -> Result<f64, ModelError> {
        if x.len() != self.arity {
            return Err(ModelError::ArityMismatch {
                expected: self.arity,
                got: x.len(),
            });
        }
        self.queries.fetch_add(1, Ordering::Relaxed);
        for (input, p) in &self.cases {
            let matches = input
                .iter()
                .zip(x.values())
                .all(|(a, b)| (a - b).abs() <= self.tolerance);
            if matches {
                return Ok(*p);
            }
        }
        self.default
            .ok_or_else(|| ModelError::UnscriptedInput(x.values().to_vec()))
    }

    fn arity(&self) -> usize {
        self.arity
    }

    fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }
}
