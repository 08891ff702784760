//! Serialized model format: a JSON object with a kind tag, the weight
//! arrays, and an optional self-test block that is verified on load.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Layer, LinearModel, MlpModel, ModelError, Predictor, ScriptedModel};
use crate::datamodel::Instance;

/// Recorded reference output, checked within 1e-9 when the file is loaded.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelfTestCase {
    pub input: Vec<f64>,
    pub output: f64,
}

/// On-disk model layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelFile {
    Linear {
        weights: Vec<f64>,
        bias: f64,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        selftest: Vec<SelfTestCase>,
    },
    Mlp {
        layers: Vec<Layer>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        selftest: Vec<SelfTestCase>,
    },
    Scripted {
        arity: usize,
        tolerance: f64,
        cases: Vec<SelfTestCase>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        default: Option<f64>,
    },
}

impl ModelFile {
    pub fn from_linear(model: &LinearModel, selftest_inputs: &[Instance]) -> ModelFile {
        let selftest = record_selftest(model, selftest_inputs);
        ModelFile::Linear {
            weights: model.weights.clone(),
            bias: model.bias,
            selftest,
        }
    }

    pub fn from_mlp(model: &MlpModel, selftest_inputs: &[Instance]) -> ModelFile {
        let selftest = record_selftest(model, selftest_inputs);
        ModelFile::Mlp {
            layers: model.layers.clone(),
            selftest,
        }
    }

    pub fn into_predictor(self) -> Result<Arc<dyn Predictor>, ModelError> {
        match self {
            ModelFile::Linear {
                weights,
                bias,
                selftest,
            } => {
                let model = LinearModel::new(weights, bias);
                run_selftest(&model, &selftest)?;
                Ok(Arc::new(model))
            }
            ModelFile::Mlp { layers, selftest } => {
                let arity = layers
                    .first()
                    .and_then(|l| l.weights.first())
                    .map(|row| row.len())
                    .ok_or_else(|| ModelError::Load("mlp model has no layers".into()))?;
                let model = MlpModel::new(arity, layers)?;
                run_selftest(&model, &selftest)?;
                Ok(Arc::new(model))
            }
            ModelFile::Scripted {
                arity,
                tolerance,
                cases,
                default,
            } => {
                let cases = cases.into_iter().map(|c| (c.input, c.output)).collect();
                Ok(Arc::new(ScriptedModel::new(
                    arity, tolerance, cases, default,
                )?))
            }
        }
    }
}

fn record_selftest(model: &dyn Predictor, inputs: &[Instance]) -> Vec<SelfTestCase> {
    inputs
        .iter()
        .map(|x| SelfTestCase {
            input: x.values().to_vec(),
            output: model.predict_proba(x).expect("self-test input arity"),
        })
        .collect()
}

fn run_selftest(model: &dyn Predictor, cases: &[SelfTestCase]) -> Result<(), ModelError> {
    for case in cases {
        let got = model.predict_proba(&Instance(case.input.clone()))?;
        if (got - case.output).abs() > 1e-9 {
            return Err(ModelError::Load(format!(
                "self-test failed: input {:?} produced {got}, file records {}",
                case.input, case.output
            )));
        }
    }
    Ok(())
}

/// Load a predictor from its JSON file, verifying the self-test block.
pub fn load_predictor(path: &Path) -> Result<Arc<dyn Predictor>, ModelError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ModelError::Load(format!("{}: {e}", path.display())))?;
    let file: ModelFile = serde_json::from_str(&text)
        .map_err(|e| ModelError::Load(format!("{}: {e}", path.display())))?;
    file.into_predictor()
}

/// Write a model file as pretty-printed JSON.
pub fn write_model_file(path: &Path, file: &ModelFile) -> Result<(), ModelError> {
    let text = serde_json::to_string_pretty(file).map_err(|e| ModelError::Load(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| ModelError::Load(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::sigmoid;

    #[test]
    fn linear_roundtrip_preserves_predictions() {
        let model = LinearModel::new(vec![0.5, -1.25], 0.1);
        let probes = vec![Instance(vec![1.0, 2.0]), Instance(vec![-3.0, 0.5])];
        let file = ModelFile::from_linear(&model, &probes);

        let dir = std::env::temp_dir().join("veritex-model-roundtrip");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("linear.json");
        write_model_file(&path, &file).unwrap();
        let loaded = load_predictor(&path).unwrap();

        for x in &probes {
            assert_eq!(
                loaded.predict_proba(x).unwrap(),
                model.predict_proba(x).unwrap()
            );
        }
    }

    #[test]
    fn exported_coefficients_match_sigmoid_oracle() {
        // Coefficients as an external tool would export them.
        let json = r#"{"kind":"linear","weights":[2.0,-1.0],"bias":0.5}"#;
        let file: ModelFile = serde_json::from_str(json).unwrap();
        let model = file.into_predictor().unwrap();
        let x = Instance(vec![1.5, 2.0]);
        let expected = sigmoid(2.0 * 1.5 - 1.0 * 2.0 + 0.5);
        assert!((model.predict_proba(&x).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn mismatched_layer_dims_fail_to_load() {
        let json = r#"{
            "kind": "mlp",
            "layers": [
                {"weights": [[1.0, 2.0]], "bias": [0.0]},
                {"weights": [[1.0, 1.0]], "bias": [0.0]}
            ]
        }"#;
        let file: ModelFile = serde_json::from_str(json).unwrap();
        assert!(file.into_predictor().is_err());
    }

    #[test]
    fn failed_selftest_rejects_file() {
        let json = r#"{
            "kind": "linear",
            "weights": [1.0],
            "bias": 0.0,
            "selftest": [{"input": [0.0], "output": 0.9}]
        }"#;
        let file: ModelFile = serde_json::from_str(json).unwrap();
        match file.into_predictor() {
            Err(ModelError::Load(msg)) => assert!(msg.contains("self-test")),
            Err(other) => panic!("expected self-test failure, got {other}"),
            Ok(_) => panic!("expected self-test failure, got a predictor"),
        }
    }

    #[test]
    fn unknown_kind_tag_rejected() {
        let json = r#"{"kind":"forest","trees":[]}"#;
        assert!(serde_json::from_str::<ModelFile>(json).is_err());
    }
}
