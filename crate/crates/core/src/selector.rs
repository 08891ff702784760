//! Maximum-truthful reduction and technique selection.
//!
//! Removes untruthful importances, re-examines the reduced interpretation,
//! and picks the technique with the fewest untruthful features among the
//! candidates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::argumentation::{
    build_tree, judge, mark, render_dialogue, ArgError, DialogueTurn, Judgement,
};
use crate::datamodel::{Dataset, Instance};
use crate::importance::{ImportanceVector, TechniqueError, TechniqueSpec};
use crate::investigator::{
    investigate, investigate_features, InvestigateConfig, InvestigateError, NeutralityBand,
    PerturbMode, TruthReport,
};
use crate::models::Predictor;
use crate::seed::derive_seed;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no techniques given")]
    NoTechniques,
    #[error("report/importance mismatch: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Technique(#[from] TechniqueError),
    #[error(transparent)]
    Investigate(#[from] InvestigateError),
    #[error(transparent)]
    Argumentation(#[from] ArgError),
}

/// An importance vector with its untruthful entries zeroed and flagged.
///
/// Positions are preserved; `excluded[j]` records which entries were
/// discarded. The neutrality band resolved on the original vector rides
/// along so re-examination classifies the kept entries exactly as the
/// original investigation did.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedImportance {
    pub vector: ImportanceVector,
    pub excluded: Vec<bool>,
    pub resolved_band: f64,
}

impl ReducedImportance {
    pub fn kept_features(&self) -> Vec<usize> {
        self.excluded
            .iter()
            .enumerate()
            .filter_map(|(j, &ex)| (!ex).then_some(j))
            .collect()
    }

    pub fn fully_excluded(&self) -> bool {
        self.excluded.iter().all(|&ex| ex)
    }
}

/// Zero out the untruthful entries of `z`, keeping truthful ones unchanged.
pub fn reduce(report: &TruthReport, z: &ImportanceVector) -> Result<ReducedImportance, EvalError> {
    if report.technique_id != z.technique_id {
        return Err(EvalError::Mismatch(format!(
            "report is for '{}' but importances are for '{}'",
            report.technique_id, z.technique_id
        )));
    }
    if report.evidence.len() != z.len() {
        return Err(EvalError::Mismatch(format!(
            "report covers {} features but the vector has {}",
            report.evidence.len(),
            z.len()
        )));
    }
    let resolved_band = NeutralityBand::default().resolve(&z.values);
    let mut vector = z.clone();
    let mut excluded = vec![false; z.len()];
    for j in &report.untruthful {
        vector.values[*j] = 0.0;
        excluded[*j] = true;
    }
    Ok(ReducedImportance {
        vector,
        excluded,
        resolved_band,
    })
}

/// Re-run the investigation restricted to the kept features and judge the
/// rebuilt tree. Excluded features are not re-tested. Returns the verdict
/// plus any warnings (empty interpretation, non-deterministic responses).
pub fn reexamine(
    model: &dyn Predictor,
    reduced: &ReducedImportance,
    x: &Instance,
    ds: &Dataset,
    config: &InvestigateConfig,
) -> Result<(Judgement, Vec<String>), EvalError> {
    let mut warnings = Vec::new();
    if reduced.fully_excluded() {
        warnings.push("all features were untruthful; the reduced interpretation is empty".into());
        return Ok((Judgement::Unwarranted, warnings));
    }

    let mut config = config.clone();
    if let PerturbMode::Stochastic { seed } = config.mode {
        config.mode = PerturbMode::Stochastic {
            seed: derive_seed(seed, "reexamine"),
        };
    }
    // Classify kept entries against the band of the original vector.
    config.band = NeutralityBand::Absolute(reduced.resolved_band);

    let kept = reduced.kept_features();
    let report = investigate_features(model, &reduced.vector, x, ds, &config, &kept)?;
    if !report.untruthful.is_empty() {
        warnings.push(format!(
            "features {:?} passed the original investigation but failed re-examination \
             (non-deterministic predictor responses)",
            report.untruthful.iter().collect::<Vec<_>>()
        ));
    }
    let verdict = judge(&mark(build_tree(&report)?));
    Ok((verdict, warnings))
}

/// Index of the candidate with the fewest untruthful features; ties break
/// by the configured priority order (first listed wins), then input order.
pub fn select_best(
    results: &[(String, TruthReport)],
    priority: &[String],
) -> Result<usize, EvalError> {
    if results.is_empty() {
        return Err(EvalError::NoTechniques);
    }
    let rank = |id: &str| {
        priority
            .iter()
            .position(|p| p == id)
            .unwrap_or(priority.len())
    };
    Ok((0..results.len())
        .min_by_key(|&i| (results[i].1.untruthful.len(), rank(&results[i].0), i))
        .unwrap())
}

/// Default technique priority for tie-breaking.
pub fn default_priority() -> Vec<String> {
    ["intrinsic", "pi", "lime", "shap"]
        .into_iter()
        .map(String::from)
        .collect()
}

/// One technique's full evaluation record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechniqueOutcome {
    pub technique_id: String,
    pub importance: ImportanceVector,
    pub report: TruthReport,
    pub untruthful_count: usize,
    /// Judgement of the technique's own tree, before any reduction.
    pub verdict: Judgement,
}

/// Result of evaluating one instance across candidate techniques.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub chosen_technique: String,
    pub final_judgement: Judgement,
    pub reduced: ReducedImportance,
    pub outcomes: Vec<TechniqueOutcome>,
    pub dialogue: Vec<DialogueTurn>,
    pub warnings: Vec<String>,
}

impl EvaluationResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("evaluation result serializes")
    }

    pub fn from_json(text: &str) -> Result<EvaluationResult, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Evaluation settings: investigation config, tie-break priority, and the
/// root seed all per-technique seeds are derived from.
#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub investigate: InvestigateConfig,
    pub priority: Vec<String>,
    pub root_seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            investigate: InvestigateConfig::default(),
            priority: default_priority(),
            root_seed: 0,
        }
    }
}

/// Run every technique, investigate each interpretation, select the most
/// truthful one, reduce it, re-examine, and assemble the justification.
pub fn evaluate_instance(
    model: &dyn Predictor,
    techniques: &[TechniqueSpec],
    x: &Instance,
    ds: &Dataset,
    config: &EvalConfig,
) -> Result<EvaluationResult, EvalError> {
    if techniques.is_empty() {
        return Err(EvalError::NoTechniques);
    }

    let mut outcomes = Vec::with_capacity(techniques.len());
    for spec in techniques {
        let seed = derive_seed(config.root_seed, &format!("technique-{}", spec.id()));
        let importance = spec.compute(model, ds, x, seed)?;
        let report = investigate(model, &importance, x, ds, &config.investigate)?;
        let verdict = judge(&mark(build_tree(&report)?));
        outcomes.push(TechniqueOutcome {
            technique_id: report.technique_id.clone(),
            untruthful_count: report.untruthful.len(),
            importance,
            report,
            verdict,
        });
    }

    let pairs: Vec<(String, TruthReport)> = outcomes
        .iter()
        .map(|o| (o.technique_id.clone(), o.report.clone()))
        .collect();
    let best = select_best(&pairs, &config.priority)?;
    let chosen = &outcomes[best];

    let reduced = reduce(&chosen.report, &chosen.importance)?;
    let (final_judgement, warnings) = reexamine(model, &reduced, x, ds, &config.investigate)?;

    let tree = mark(build_tree(&chosen.report)?);
    let dialogue = render_dialogue(&tree, &chosen.report);

    Ok(EvaluationResult {
        chosen_technique: chosen.technique_id.clone(),
        final_judgement,
        reduced,
        outcomes,
        dialogue,
        warnings,
    })
}
