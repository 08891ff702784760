//! The truthfulness investigator: 2 x |F| perturbation tests per technique.
//!
//! For each feature the investigator derives the claimed direction of
//! influence from the importance value, perturbs the feature up and down by
//! one distribution-sized step, queries the model, and classifies the
//! observed probability movement against the expected one. The resulting
//! [`TruthReport`] carries the evidence the argumentation engine consumes.

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datamodel::{Dataset, FeatureKind, FeatureMeta, Instance};
use crate::importance::ImportanceVector;
use crate::models::{ModelError, Predictor};
use crate::seed::derive_seed;

#[derive(Debug, Error)]
pub enum InvestigateError {
    #[error("arity mismatch: model/importances/instance/dataset disagree ({0})")]
    Arity(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Claimed direction of a feature's influence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Imp {
    Positive,
    Negative,
    Neutral,
}

impl Imp {
    pub fn word(self) -> &'static str {
        match self {
            Imp::Positive => "Positive",
            Imp::Negative => "Negative",
            Imp::Neutral => "Neutral",
        }
    }
}

/// Direction a feature's value is altered in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Alt {
    Increasing,
    Decreasing,
}

impl Alt {
    pub fn word(self) -> &'static str {
        match self {
            Alt::Increasing => "Increasing",
            Alt::Decreasing => "Decreasing",
        }
    }

    pub fn participle(self) -> &'static str {
        match self {
            Alt::Increasing => "Increased",
            Alt::Decreasing => "Decreased",
        }
    }
}

/// Observed or expected movement of the output probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exp {
    Increasing,
    Decreasing,
    RemainingStable,
}

impl Exp {
    pub fn word(self) -> &'static str {
        match self {
            Exp::Increasing => "Increasing",
            Exp::Decreasing => "Decreasing",
            Exp::RemainingStable => "Remaining Stable",
        }
    }

    pub fn participle(self) -> &'static str {
        match self {
            Exp::Increasing => "Increased",
            Exp::Decreasing => "Decreased",
            Exp::RemainingStable => "Remaining Stable",
        }
    }
}

/// Classify a probability movement: stable within `delta`, otherwise the
/// sign of the change.
pub fn classify_direction(p_before: f64, p_after: f64, delta: f64) -> Exp {
    debug_assert!(delta >= 0.0);
    let diff = p_after - p_before;
    if diff.abs() <= delta {
        Exp::RemainingStable
    } else if diff > 0.0 {
        Exp::Increasing
    } else {
        Exp::Decreasing
    }
}

/// Expectation table: what the probability should do when a feature with
/// influence `imp` has its value altered in direction `alt`.
pub fn expected_direction(imp: Imp, alt: Alt) -> Exp {
    match (imp, alt) {
        (Imp::Positive, Alt::Increasing) => Exp::Increasing,
        (Imp::Positive, Alt::Decreasing) => Exp::Decreasing,
        (Imp::Negative, Alt::Increasing) => Exp::Decreasing,
        (Imp::Negative, Alt::Decreasing) => Exp::Increasing,
        (Imp::Neutral, _) => Exp::RemainingStable,
    }
}

/// Neutrality band: importances within the band are classified Neutral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NeutralityBand {
    /// Band = factor * max |z_j| over the vector.
    RelativeToMax(f64),
    Absolute(f64),
}

impl Default for NeutralityBand {
    fn default() -> Self {
        NeutralityBand::RelativeToMax(1e-6)
    }
}

impl NeutralityBand {
    pub fn resolve(&self, values: &[f64]) -> f64 {
        match self {
            NeutralityBand::RelativeToMax(factor) => {
                let max = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
                factor * max
            }
            NeutralityBand::Absolute(band) => *band,
        }
    }
}

/// Classify an importance value against the resolved neutrality band.
pub fn classify_importance(z: f64, band: f64) -> Imp {
    if z.abs() <= band {
        Imp::Neutral
    } else if z > 0.0 {
        Imp::Positive
    } else {
        Imp::Negative
    }
}

/// How perturbation steps are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PerturbMode {
    /// One step of exactly one std-dev per direction.
    Deterministic,
    /// Gaussian steps `|eps|`, `eps ~ N(0, std^2)`, drawn from `seed`.
    Stochastic { seed: u64 },
}

/// Apply an alteration of size `step` to `v` respecting the feature kind.
///
/// Binary features snap to 1 (increase) or 0 (decrease); ordinal features
/// move one level, clamped at the ends; continuous features move by `step`.
pub fn alter_value(meta: &FeatureMeta, v: f64, alt: Alt, step: f64) -> f64 {
    match &meta.kind {
        FeatureKind::Continuous => match alt {
            Alt::Increasing => v + step,
            Alt::Decreasing => v - step,
        },
        FeatureKind::BinaryOneHot => match alt {
            Alt::Increasing => 1.0,
            Alt::Decreasing => 0.0,
        },
        FeatureKind::Ordinal { levels } => {
            let pos = levels
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| (*a - v).abs().total_cmp(&(*b - v).abs()))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let next = match alt {
                Alt::Increasing => (pos + 1).min(levels.len() - 1),
                Alt::Decreasing => pos.saturating_sub(1),
            };
            levels[next]
        }
    }
}

fn fallback_step(v: f64) -> f64 {
    v.abs().max(1.0) * 0.1
}

/// Perturb a feature value up or down based on its distribution.
pub fn perturb(meta: &FeatureMeta, v: f64, alt: Alt, mode: PerturbMode) -> f64 {
    let step = match mode {
        PerturbMode::Deterministic => {
            if meta.std_dev > 0.0 {
                meta.std_dev
            } else {
                fallback_step(v)
            }
        }
        PerturbMode::Stochastic { seed } => {
            if meta.std_dev > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let eps: f64 = rng.sample(StandardNormal);
                (eps * meta.std_dev).abs()
            } else {
                fallback_step(v)
            }
        }
    };
    alter_value(meta, v, alt, step)
}

/// One perturbation test: the alteration applied and what happened.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlterationRecord {
    pub alt: Alt,
    pub altered_value: f64,
    pub expected: Exp,
    pub observed: Exp,
    pub probability_before: f64,
    pub probability_after: f64,
}

impl AlterationRecord {
    pub fn matched(&self) -> bool {
        self.observed == self.expected
    }
}

/// Evidence for one feature: its claimed influence and both test records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureEvidence {
    pub feature_index: usize,
    pub feature_name: String,
    pub imp: Imp,
    /// Exactly two records: Increasing first, Decreasing second.
    pub records: Vec<AlterationRecord>,
}

impl FeatureEvidence {
    pub fn truthful(&self) -> bool {
        self.records.iter().all(AlterationRecord::matched)
    }

    pub fn record(&self, alt: Alt) -> &AlterationRecord {
        self.records
            .iter()
            .find(|r| r.alt == alt)
            .expect("evidence carries both alterations")
    }
}

/// Full verdict of an investigation: per-feature evidence plus the truthful
/// and untruthful index sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthReport {
    pub technique_id: String,
    pub evidence: Vec<FeatureEvidence>,
    pub truthful: BTreeSet<usize>,
    pub untruthful: BTreeSet<usize>,
}

impl TruthReport {
    pub fn from_evidence(technique_id: String, evidence: Vec<FeatureEvidence>) -> TruthReport {
        let mut truthful = BTreeSet::new();
        let mut untruthful = BTreeSet::new();
        for ev in &evidence {
            if ev.truthful() {
                truthful.insert(ev.feature_index);
            } else {
                untruthful.insert(ev.feature_index);
            }
        }
        TruthReport {
            technique_id,
            evidence,
            truthful,
            untruthful,
        }
    }

    pub fn n_features(&self) -> usize {
        self.evidence.len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("truth report serializes")
    }

    pub fn from_json(text: &str) -> Result<TruthReport, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Which distribution sizes the perturbations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StatSource {
    /// Training-set statistics from the dataset.
    #[default]
    TrainingSet,
    /// The neighborhood std recorded by a neighbor-generating technique,
    /// falling back to training statistics when none was recorded.
    LocalNeighborhood,
}

/// Investigation settings. `delta` is the absolute probability band within
/// which a change counts as Remaining Stable.
#[derive(Debug, Clone)]
pub struct InvestigateConfig {
    pub delta: f64,
    pub mode: PerturbMode,
    /// Repeats with majority vote in stochastic mode.
    pub stochastic_repeats: usize,
    pub band: NeutralityBand,
    pub stat_source: StatSource,
}

impl Default for InvestigateConfig {
    fn default() -> Self {
        InvestigateConfig {
            delta: 0.01,
            mode: PerturbMode::Deterministic,
            stochastic_repeats: 5,
            band: NeutralityBand::default(),
            stat_source: StatSource::TrainingSet,
        }
    }
}

/// Run the perturbation tests for every feature.
///
/// Deterministic mode issues exactly `2 * |F| + 1` predictor queries: one
/// baseline plus one per (feature, alteration).
pub fn investigate(
    model: &dyn Predictor,
    z: &ImportanceVector,
    x: &Instance,
    ds: &Dataset,
    config: &InvestigateConfig,
) -> Result<TruthReport, InvestigateError> {
    let all: Vec<usize> = (0..ds.n_features()).collect();
    investigate_features(model, z, x, ds, config, &all)
}

/// Run the perturbation tests for a subset of features, e.g. after the
/// untruthful ones have been discarded.
pub fn investigate_features(
    model: &dyn Predictor,
    z: &ImportanceVector,
    x: &Instance,
    ds: &Dataset,
    config: &InvestigateConfig,
    features: &[usize],
) -> Result<TruthReport, InvestigateError> {
    if z.len() != ds.n_features() || x.len() != ds.n_features() {
        return Err(InvestigateError::Arity(format!(
            "|F|={} but importances={} and instance={}",
            ds.n_features(),
            z.len(),
            x.len()
        )));
    }
    let band = config.band.resolve(&z.values);
    let baseline = model.predict_proba(x)?;

    let mut evidence = Vec::with_capacity(features.len());
    for &j in features {
        let meta = effective_meta(
            ds.feature_stats(j)
                .map_err(|e| InvestigateError::Arity(e.to_string()))?,
            z,
            j,
            config.stat_source,
        );
        let imp = classify_importance(z.values[j], band);

        let mut records = Vec::with_capacity(2);
        for alt in [Alt::Increasing, Alt::Decreasing] {
            let expected = expected_direction(imp, alt);
            let record = match config.mode {
                PerturbMode::Deterministic => {
                    let altered = perturb(&meta, x.values()[j], alt, PerturbMode::Deterministic);
                    let after = model.predict_proba(&x.with_value(j, altered))?;
                    AlterationRecord {
                        alt,
                        altered_value: altered,
                        expected,
                        observed: classify_direction(baseline, after, config.delta),
                        probability_before: baseline,
                        probability_after: after,
                    }
                }
                PerturbMode::Stochastic { seed } => {
                    stochastic_record(model, &meta, x, j, alt, expected, baseline, seed, config)?
                }
            };
            records.push(record);
        }
        evidence.push(FeatureEvidence {
            feature_index: j,
            feature_name: meta.name.clone(),
            imp,
            records,
        });
    }
    Ok(TruthReport::from_evidence(z.technique_id.clone(), evidence))
}

fn effective_meta(
    meta: &FeatureMeta,
    z: &ImportanceVector,
    j: usize,
    source: StatSource,
) -> FeatureMeta {
    let mut meta = meta.clone();
    if source == StatSource::LocalNeighborhood {
        if let Some(local) = z.neighborhood_std.as_ref().and_then(|s| s.get(j)) {
            meta.std_dev = *local;
        }
    }
    meta
}

/// Stochastic mode: `k` independent draws per test, majority vote over the
/// observed classifications; the reported record is the first draw of the
/// majority class.
#[allow(clippy::too_many_arguments)]
fn stochastic_record(
    model: &dyn Predictor,
    meta: &FeatureMeta,
    x: &Instance,
    j: usize,
    alt: Alt,
    expected: Exp,
    baseline: f64,
    seed: u64,
    config: &InvestigateConfig,
) -> Result<AlterationRecord, InvestigateError> {
    let repeats = config.stochastic_repeats.max(1);
    let mut outcomes: Vec<(Exp, f64, f64)> = Vec::with_capacity(repeats);
    for rep in 0..repeats {
        let draw_seed = derive_seed(seed, &format!("perturb-{j}-{:?}-{rep}", alt));
        let altered = perturb(
            meta,
            x.values()[j],
            alt,
            PerturbMode::Stochastic { seed: draw_seed },
        );
        let after = model.predict_proba(&x.with_value(j, altered))?;
        outcomes.push((
            classify_direction(baseline, after, config.delta),
            altered,
            after,
        ));
    }
    let majority = [Exp::Increasing, Exp::Decreasing, Exp::RemainingStable]
        .into_iter()
        .max_by_key(|label| outcomes.iter().filter(|(o, _, _)| o == label).count())
        .unwrap();
    let (observed, altered_value, probability_after) = *outcomes
        .iter()
        .find(|(o, _, _)| *o == majority)
        .unwrap_or(&outcomes[0]);
    Ok(AlterationRecord {
        alt,
        altered_value,
        expected,
        observed,
        probability_before: baseline,
        probability_after,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::FeatureKind;
    use crate::importance::intrinsic_linear;
    use crate::importance::IntrinsicForm;
    use crate::models::{LinearModel, ScriptedModel};
    use proptest::prelude::*;

    fn continuous_meta(name: &str, std_dev: f64) -> FeatureMeta {
        FeatureMeta {
            name: name.into(),
            kind: FeatureKind::Continuous,
            mean: 0.0,
            std_dev,
            observed_min: -1.0,
            observed_max: 1.0,
        }
    }

    fn dataset_with_stds(stds: &[f64]) -> Dataset {
        // Two synthetic rows produce exactly the requested std per column:
        // {m - s, m + s} has population std s.
        let rows = vec![stds.iter().map(|s| -s).collect::<Vec<f64>>(), stds.to_vec()];
        Dataset::from_rows(
            (0..stds.len()).map(|j| format!("f{j}")).collect(),
            vec![FeatureKind::Continuous; stds.len()],
            rows,
            None,
        )
        .unwrap()
    }

    fn importance(values: Vec<f64>, baseline: f64) -> ImportanceVector {
        ImportanceVector {
            technique_id: "test".into(),
            values,
            baseline_probability: baseline,
            target_instance: None,
            neighborhood_std: None,
        }
    }

    #[test]
    fn tight_movement_remains_stable() {
        assert_eq!(
            classify_direction(0.7499, 0.7501, 0.01),
            Exp::RemainingStable
        );
        assert_eq!(classify_direction(0.70, 0.85, 0.01), Exp::Increasing);
        assert_eq!(classify_direction(0.5, 0.5, 0.0), Exp::RemainingStable);
        assert_eq!(classify_direction(0.85, 0.70, 0.01), Exp::Decreasing);
    }

    #[test]
    fn expectation_table_complete() {
        assert_eq!(
            expected_direction(Imp::Positive, Alt::Increasing),
            Exp::Increasing
        );
        assert_eq!(
            expected_direction(Imp::Positive, Alt::Decreasing),
            Exp::Decreasing
        );
        assert_eq!(
            expected_direction(Imp::Negative, Alt::Increasing),
            Exp::Decreasing
        );
        assert_eq!(
            expected_direction(Imp::Negative, Alt::Decreasing),
            Exp::Increasing
        );
        assert_eq!(
            expected_direction(Imp::Neutral, Alt::Increasing),
            Exp::RemainingStable
        );
        assert_eq!(
            expected_direction(Imp::Neutral, Alt::Decreasing),
            Exp::RemainingStable
        );
    }

    #[test]
    fn asymmetric_gaussian_steps_land_on_recorded_values() {
        // Two independent draws of |eps| around v = 1: up by 0.21, down by 0.15.
        let meta = continuous_meta("f1", 0.2);
        assert_eq!(alter_value(&meta, 1.0, Alt::Increasing, 0.21), 1.21);
        assert_eq!(alter_value(&meta, 1.0, Alt::Decreasing, 0.15), 0.85);
    }

    #[test]
    fn binary_feature_snaps_to_extremes() {
        let meta = FeatureMeta {
            name: "b".into(),
            kind: FeatureKind::BinaryOneHot,
            mean: 0.4,
            std_dev: 0.49,
            observed_min: 0.0,
            observed_max: 1.0,
        };
        assert_eq!(
            perturb(&meta, 0.0, Alt::Increasing, PerturbMode::Deterministic),
            1.0
        );
        assert_eq!(
            perturb(&meta, 0.0, Alt::Decreasing, PerturbMode::Deterministic),
            0.0
        );
        assert_eq!(
            perturb(&meta, 1.0, Alt::Increasing, PerturbMode::Deterministic),
            1.0
        );
    }

    #[test]
    fn ordinal_steps_clamp_at_ends() {
        let meta = FeatureMeta {
            name: "o".into(),
            kind: FeatureKind::Ordinal {
                levels: vec![1.0, 2.0, 3.0],
            },
            mean: 2.0,
            std_dev: 0.8,
            observed_min: 1.0,
            observed_max: 3.0,
        };
        assert_eq!(
            perturb(&meta, 3.0, Alt::Increasing, PerturbMode::Deterministic),
            3.0
        );
        assert_eq!(
            perturb(&meta, 3.0, Alt::Decreasing, PerturbMode::Deterministic),
            2.0
        );
        assert_eq!(
            perturb(&meta, 1.0, Alt::Decreasing, PerturbMode::Deterministic),
            1.0
        );
        assert_eq!(
            perturb(&meta, 2.0, Alt::Increasing, PerturbMode::Deterministic),
            3.0
        );
    }

    #[test]
    fn zero_variance_continuous_uses_fallback_step() {
        let meta = continuous_meta("z", 0.0);
        assert_eq!(
            perturb(&meta, 5.0, Alt::Increasing, PerturbMode::Deterministic),
            5.5
        );
        assert_eq!(
            perturb(&meta, 0.0, Alt::Decreasing, PerturbMode::Deterministic),
            -0.1
        );
    }

    #[test]
    fn stochastic_perturbation_deterministic_under_seed() {
        let meta = continuous_meta("f", 2.0);
        let mode = PerturbMode::Stochastic { seed: 99 };
        let a = perturb(&meta, 1.0, Alt::Increasing, mode);
        let b = perturb(&meta, 1.0, Alt::Increasing, mode);
        assert_eq!(a, b);
        assert!(a > 1.0);
    }

    #[test]
    fn positive_claim_with_stable_down_response_is_untruthful() {
        // Baseline 0.7; increase moves to 0.85 (matches), decrease stays
        // within delta (expected Decreasing): the feature fails.
        let sigma = 0.15;
        let ds = dataset_with_stds(&[sigma, 1.0]);
        let x = Instance(vec![1.0, 0.0]);
        let model = ScriptedModel::new(
            2,
            1e-9,
            vec![
                (vec![1.0, 0.0], 0.70),
                (vec![1.0 + sigma, 0.0], 0.85),
                (vec![1.0 - sigma, 0.0], 0.7005),
            ],
            Some(0.70),
        )
        .unwrap();
        let z = importance(vec![0.5, 0.0], 0.70);
        let report = investigate(&model, &z, &x, &ds, &InvestigateConfig::default()).unwrap();

        assert_eq!(report.untruthful, BTreeSet::from([0]));
        assert_eq!(report.truthful, BTreeSet::from([1]));
        let ev = &report.evidence[0];
        assert_eq!(ev.record(Alt::Increasing).observed, Exp::Increasing);
        assert!(ev.record(Alt::Increasing).matched());
        assert_eq!(ev.record(Alt::Decreasing).observed, Exp::RemainingStable);
        assert_eq!(ev.record(Alt::Decreasing).expected, Exp::Decreasing);
    }

    #[test]
    fn positive_claim_with_inverted_response_fails_both_tests() {
        // Value -0.445 pushed to 1.642 drops the probability from 0.8145 to
        // 0.0910; pushed to -2.532 raises it to 0.9817. Both contradict a
        // positive importance.
        let sigma = 2.087;
        let ds = dataset_with_stds(&[sigma]);
        let x = Instance(vec![-0.445]);
        let model = ScriptedModel::new(
            1,
            5e-3,
            vec![
                (vec![-0.445], 0.8145),
                (vec![1.642], 0.0910),
                (vec![-2.531], 0.9817),
            ],
            None,
        )
        .unwrap();
        let z = importance(vec![0.604], 0.8145);
        let report = investigate(&model, &z, &x, &ds, &InvestigateConfig::default()).unwrap();

        assert_eq!(report.untruthful, BTreeSet::from([0]));
        let ev = &report.evidence[0];
        assert_eq!(ev.record(Alt::Increasing).observed, Exp::Decreasing);
        assert_eq!(ev.record(Alt::Decreasing).observed, Exp::Increasing);
    }

    #[test]
    fn linear_models_with_intrinsic_importances_always_pass() {
        // Weights and instances are bounded so that every nonzero-weight
        // feature moves the probability by more than delta; under that
        // condition sigmoid monotonicity makes every feature truthful.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for trial in 0..100 {
            let n = rng.random_range(1..=5);
            let stds: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
            let ds = dataset_with_stds(&stds);
            let weights: Vec<f64> = (0..n)
                .map(|_| {
                    if rng.random::<f64>() < 0.25 {
                        0.0
                    } else {
                        let w: f64 = rng.random_range(0.5..1.2);
                        if rng.random::<bool>() {
                            w
                        } else {
                            -w
                        }
                    }
                })
                .collect();
            let model = LinearModel::new(weights, rng.random_range(-0.3..0.3));
            let x = Instance((0..n).map(|_| rng.random_range(-0.25..0.25)).collect());
            let z = intrinsic_linear(&model, &x, IntrinsicForm::Coefficient).unwrap();
            let report = investigate(&model, &z, &x, &ds, &InvestigateConfig::default()).unwrap();
            assert!(
                report.untruthful.is_empty(),
                "trial {trial}: untruthful {:?}",
                report.untruthful
            );
        }
    }

    #[test]
    fn deterministic_query_budget_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let n = rng.random_range(1..=10);
            let stds: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..2.0)).collect();
            let ds = dataset_with_stds(&stds);
            let weights: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let model = LinearModel::new(weights, 0.0);
            let x = Instance((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
            let z = intrinsic_linear(&model, &x, IntrinsicForm::Coefficient).unwrap();
            let before = model.query_count();
            investigate(&model, &z, &x, &ds, &InvestigateConfig::default()).unwrap();
            assert_eq!(model.query_count() - before, 2 * n as u64 + 1);
        }
    }

    #[test]
    fn anti_monotone_predictor_always_flagged() {
        // Probability falls when the feature rises, yet z claims positive.
        let sigma = 1.0;
        let ds = dataset_with_stds(&[sigma]);
        let x = Instance(vec![0.0]);
        let model = LinearModel::new(vec![-2.0], 0.0);
        let z = importance(vec![1.0], 0.5);
        let report = investigate(&model, &z, &x, &ds, &InvestigateConfig::default()).unwrap();
        assert_eq!(report.untruthful, BTreeSet::from([0]));
    }

    #[test]
    fn local_neighborhood_mode_substitutes_recorded_std() {
        let ds = dataset_with_stds(&[1.0]);
        let x = Instance(vec![0.0]);
        let model = LinearModel::new(vec![1.0], 0.0);
        let mut z = importance(vec![1.0], 0.5);
        z.neighborhood_std = Some(vec![3.0]);
        let config = InvestigateConfig {
            stat_source: StatSource::LocalNeighborhood,
            ..InvestigateConfig::default()
        };
        let report = investigate(&model, &z, &x, &ds, &config).unwrap();
        assert_eq!(
            report.evidence[0].record(Alt::Increasing).altered_value,
            3.0
        );

        // Without a recorded neighborhood the training std applies.
        let z_plain = importance(vec![1.0], 0.5);
        let report = investigate(&model, &z_plain, &x, &ds, &config).unwrap();
        assert_eq!(
            report.evidence[0].record(Alt::Increasing).altered_value,
            1.0
        );
    }

    #[test]
    fn stochastic_mode_majority_vote_is_reproducible() {
        let ds = dataset_with_stds(&[1.5]);
        let x = Instance(vec![0.0]);
        let model = LinearModel::new(vec![2.0], 0.0);
        let z = importance(vec![1.0], 0.5);
        let config = InvestigateConfig {
            mode: PerturbMode::Stochastic { seed: 3 },
            ..InvestigateConfig::default()
        };
        let a = investigate(&model, &z, &x, &ds, &config).unwrap();
        let b = investigate(&model, &z, &x, &ds, &config).unwrap();
        assert_eq!(a, b);
        assert!(a.untruthful.is_empty());
    }

    #[test]
    fn arity_disagreement_rejected() {
        let ds = dataset_with_stds(&[1.0, 1.0]);
        let model = LinearModel::new(vec![1.0, 1.0], 0.0);
        let z = importance(vec![1.0], 0.5);
        let err = investigate(
            &model,
            &z,
            &Instance(vec![0.0, 0.0]),
            &ds,
            &InvestigateConfig::default(),
        );
        assert!(matches!(err, Err(InvestigateError::Arity(_))));
    }

    #[test]
    fn report_json_roundtrip() {
        let ds = dataset_with_stds(&[1.0]);
        let model = LinearModel::new(vec![1.0], 0.0);
        let z = importance(vec![1.0], 0.5);
        let report = investigate(
            &model,
            &z,
            &Instance(vec![0.0]),
            &ds,
            &InvestigateConfig::default(),
        )
        .unwrap();
        let back = TruthReport::from_json(&report.to_json()).unwrap();
        assert_eq!(report, back);
    }

    proptest! {
        /// Negating every importance swaps each non-neutral expectation and
        /// leaves neutral features unchanged.
        #[test]
        fn negating_importances_mirrors_expectations(
            raw in proptest::collection::vec(-2.0_f64..2.0, 1..8),
        ) {
            let n = raw.len();
            let ds = dataset_with_stds(&vec![1.0; n]);
            let x = Instance(vec![0.0; n]);
            let model = LinearModel::new(vec![0.5; n], 0.0);
            let z_pos = importance(raw.clone(), 0.5);
            let z_neg = importance(raw.iter().map(|v| -v).collect(), 0.5);
            let cfg = InvestigateConfig::default();
            let a = investigate(&model, &z_pos, &x, &ds, &cfg).unwrap();
            let b = investigate(&model, &z_neg, &x, &ds, &cfg).unwrap();
            for (ea, eb) in a.evidence.iter().zip(&b.evidence) {
                for (ra, rb) in ea.records.iter().zip(&eb.records) {
                    let mirrored = match ra.expected {
                        Exp::Increasing => Exp::Decreasing,
                        Exp::Decreasing => Exp::Increasing,
                        Exp::RemainingStable => Exp::RemainingStable,
                    };
                    prop_assert_eq!(rb.expected, mirrored);
                }
            }
        }
    }
}
