//! Benchmark harness: mean percentage of untruthful feature importances per
//! (model, technique) over a sample of instances, plus an ensemble column
//! that per instance takes the technique with the fewest untruthful
//! features.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use veritex_core::datamodel::Dataset;
use veritex_core::importance::{TechniqueError, TechniqueSpec};
use veritex_core::investigator::{investigate, InvestigateConfig};
use veritex_core::models::Predictor;
use veritex_core::seed::derive_seed;

use crate::config::Settings;
use crate::CliError;

/// One model entering the benchmark.
pub struct BenchmarkModel {
    pub name: String,
    pub predictor: Arc<dyn Predictor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub model: String,
    /// Mean untruthful percentage per technique, `null` when the technique
    /// does not apply to the model (e.g. intrinsic on a non-linear model).
    pub cells: Vec<Option<f64>>,
    /// Per-instance best technique, averaged.
    pub ensemble: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSummary {
    pub dataset: String,
    pub seed: u64,
    pub delta: f64,
    pub sample_size: usize,
    pub instance_indices: Vec<usize>,
    pub techniques: Vec<String>,
    pub rows: Vec<BenchmarkRow>,
}

impl BenchmarkSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

/// Draw `sample` distinct instance indices, sorted for canonical output.
fn sample_indices(n_rows: usize, sample: usize, seed: u64) -> Vec<usize> {
    let mut indices: Vec<usize> = (0..n_rows).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "benchmark-sample"));
    indices.shuffle(&mut rng);
    indices.truncate(sample.min(n_rows));
    indices.sort_unstable();
    indices
}

/// Untruthful counts for one instance: one entry per technique, `None`
/// when the technique does not apply to the model.
type InstanceCounts = Vec<Option<usize>>;

fn evaluate_one(
    model: &dyn Predictor,
    model_name: &str,
    ds: &Dataset,
    index: usize,
    specs: &[TechniqueSpec],
    cfg: &InvestigateConfig,
    root_seed: u64,
) -> Result<InstanceCounts, CliError> {
    let x = ds.instance(index);
    let mut counts = Vec::with_capacity(specs.len());
    for spec in specs {
        let seed = derive_seed(root_seed, &format!("{model_name}/{index}/{}", spec.id()));
        match spec.compute(model, ds, &x, seed) {
            Ok(z) => {
                let report = investigate(model, &z, &x, ds, cfg)?;
                counts.push(Some(report.untruthful.len()));
            }
            Err(TechniqueError::NotLinear) => counts.push(None),
            Err(e) => return Err(e.into()),
        }
    }
    Ok(counts)
}

/// Run the benchmark over every (model, technique, sampled instance).
///
/// Instances are evaluated in parallel; the output ordering is canonical
/// (models in input order, sorted instance indices) regardless of
/// scheduling.
pub fn run_benchmark(
    ds: &Dataset,
    models: &[BenchmarkModel],
    technique_names: &[String],
    settings: &Settings,
    dataset_label: &str,
) -> Result<BenchmarkSummary, CliError> {
    if settings.sample == 0 {
        return Err(CliError::Usage("sample size must be >= 1".into()));
    }
    if models.is_empty() {
        return Err(CliError::Usage("no models given".into()));
    }
    let specs = crate::parse_techniques(technique_names, settings)?;
    let indices = sample_indices(ds.n_rows(), settings.sample, settings.seed);
    let cfg = settings.investigate_config();
    let n_features = ds.n_features() as f64;

    let mut rows = Vec::with_capacity(models.len());
    for model in models {
        let mut per_instance: Vec<Result<InstanceCounts, CliError>> =
            (0..indices.len()).map(|_| Ok(Vec::new())).collect();

        let workers = std::thread::available_parallelism()
            .map(|p| p.get())
            .unwrap_or(1)
            .min(8)
            .min(indices.len().max(1));
        let chunk = indices.len().div_ceil(workers);
        std::thread::scope(|scope| {
            for (idx_chunk, out_chunk) in indices.chunks(chunk).zip(per_instance.chunks_mut(chunk))
            {
                let predictor = Arc::clone(&model.predictor);
                let specs = &specs;
                let cfg = &cfg;
                let name = model.name.as_str();
                scope.spawn(move || {
                    for (slot, &index) in out_chunk.iter_mut().zip(idx_chunk) {
                        *slot = evaluate_one(
                            predictor.as_ref(),
                            name,
                            ds,
                            index,
                            specs,
                            cfg,
                            settings.seed,
                        );
                    }
                });
            }
        });

        let counts: Vec<InstanceCounts> =
            per_instance.into_iter().collect::<Result<Vec<_>, _>>()?;

        let cells: Vec<Option<f64>> = (0..specs.len())
            .map(|t| {
                let values: Vec<usize> = counts.iter().filter_map(|c| c[t]).collect();
                if values.is_empty() {
                    None
                } else {
                    let mean = values
                        .iter()
                        .map(|&u| u as f64 / n_features * 100.0)
                        .sum::<f64>()
                        / values.len() as f64;
                    Some(mean)
                }
            })
            .collect();

        let best_counts: Vec<usize> = counts
            .iter()
            .filter_map(|c| c.iter().flatten().min().copied())
            .collect();
        let ensemble = if best_counts.is_empty() {
            None
        } else {
            Some(
                best_counts
                    .iter()
                    .map(|&u| u as f64 / n_features * 100.0)
                    .sum::<f64>()
                    / best_counts.len() as f64,
            )
        };

        rows.push(BenchmarkRow {
            model: model.name.clone(),
            cells,
            ensemble,
        });
    }

    Ok(BenchmarkSummary {
        dataset: dataset_label.to_string(),
        seed: settings.seed,
        delta: settings.delta,
        sample_size: indices.len(),
        instance_indices: indices,
        techniques: technique_names.to_vec(),
        rows,
    })
}

fn display_name(id: &str) -> String {
    match id {
        "lime" => "LIME".into(),
        "shap" | "kernel-shap" => "SHAP".into(),
        "pi" | "permutation" => "PI".into(),
        "intrinsic" => "Intrinsic".into(),
        other => other.to_string(),
    }
}

fn cell_text(value: Option<f64>) -> String {
    match value {
        Some(pct) => format!("{pct:.2}%"),
        None => "-".into(),
    }
}

/// Fixed-width text table with two-decimal percentages.
pub fn render_table(summary: &BenchmarkSummary) -> String {
    let mut headers: Vec<String> = vec!["Model".into()];
    headers.extend(summary.techniques.iter().map(|t| display_name(t)));
    headers.push("Ensemble".into());

    let mut body: Vec<Vec<String>> = Vec::new();
    for row in &summary.rows {
        let mut line = vec![row.model.clone()];
        line.extend(row.cells.iter().map(|c| cell_text(*c)));
        line.push(cell_text(row.ensemble));
        body.push(line);
    }

    let widths: Vec<usize> = (0..headers.len())
        .map(|c| {
            body.iter()
                .map(|r| r[c].len())
                .chain(std::iter::once(headers[c].len()))
                .max()
                .unwrap()
        })
        .collect();

    let mut out = String::new();
    let mut write_row = |cells: &[String]| {
        let line = cells
            .iter()
            .enumerate()
            .map(|(c, cell)| format!("{cell:<width$}", width = widths[c]))
            .collect::<Vec<_>>()
            .join("  ");
        let _ = writeln!(out, "{}", line.trim_end());
    };
    write_row(&headers);
    for row in &body {
        write_row(row);
    }
    let _ = writeln!(
        out,
        "({} instances, seed {}, delta {})",
        summary.sample_size, summary.seed, summary.delta
    );
    out
}
