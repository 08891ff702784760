//! Feature-importance techniques: intrinsic linear coefficients, permutation
//! importance, a local-surrogate explainer, and a coalition-sampling Shapley
//! estimator.
//!
//! Every technique produces an [`ImportanceVector`] `z_1..z_|F|` for a single
//! target instance. Stochastic techniques are deterministic under a fixed
//! seed, and independent of evaluation order.

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::datamodel::{Dataset, FeatureMeta, Instance};
use crate::linalg;
use crate::models::{ModelError, Predictor};

#[derive(Debug, Error)]
pub enum TechniqueError {
    #[error("technique requires an intrinsically linear model")]
    NotLinear,
    #[error("dataset has no labels, required for permutation scoring")]
    MissingLabels,
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error("surrogate system is singular even after regularization")]
    Singular,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Per-feature signed importances produced by one technique for one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceVector {
    #[serde(rename = "technique")]
    pub technique_id: String,
    #[serde(rename = "z")]
    pub values: Vec<f64>,
    #[serde(rename = "baseline")]
    pub baseline_probability: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub target_instance: Option<Vec<f64>>,
    /// Per-feature std of the generated neighborhood, recorded by the local
    /// surrogate for the investigator's local-statistics mode.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub neighborhood_std: Option<Vec<f64>>,
}

impl ImportanceVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("importance vector serializes")
    }

    pub fn from_json(text: &str) -> Result<ImportanceVector, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Which statistic a linear model reports as intrinsic importance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntrinsicForm {
    /// The raw coefficient `w_j`: the model's directional response to a
    /// change in the feature's value.
    #[default]
    Coefficient,
    /// The product `w_j * v_j`.
    CoefficientTimesValue,
}

/// Intrinsic importances of a linear model: `z_j = w_j` by default.
pub fn intrinsic_linear(
    model: &dyn Predictor,
    x: &Instance,
    form: IntrinsicForm,
) -> Result<ImportanceVector, TechniqueError> {
    let (weights, _bias) = model.coefficients().ok_or(TechniqueError::NotLinear)?;
    if weights.len() != x.len() {
        return Err(ModelError::ArityMismatch {
            expected: weights.len(),
            got: x.len(),
        }
        .into());
    }
    let values = match form {
        IntrinsicForm::Coefficient => weights.to_vec(),
        IntrinsicForm::CoefficientTimesValue => {
            weights.iter().zip(x.values()).map(|(w, v)| w * v).collect()
        }
    };
    let baseline = model.predict_proba(x)?;
    Ok(ImportanceVector {
        technique_id: "intrinsic".into(),
        values,
        baseline_probability: baseline,
        target_instance: Some(x.values().to_vec()),
        neighborhood_std: None,
    })
}

fn log_loss_score(
    model: &dyn Predictor,
    rows: &[Vec<f64>],
    targets: &[f64],
) -> Result<f64, TechniqueError> {
    let mut total = 0.0;
    for (row, &y) in rows.iter().zip(targets) {
        let p = model
            .predict_proba(&Instance(row.clone()))?
            .clamp(1e-12, 1.0 - 1e-12);
        total += -(y * p.ln() + (1.0 - y) * (1.0 - p).ln());
    }
    Ok(total / rows.len() as f64)
}

/// Deterministic perturbation step for a feature, mirroring the
/// investigator's scale: one std-dev, with a magnitude-based fallback for
/// zero-variance continuous features.
pub(crate) fn local_step(meta: &FeatureMeta, v: f64) -> f64 {
    if meta.std_dev > 0.0 {
        meta.std_dev
    } else {
        v.abs().max(1.0) * 0.1
    }
}

/// Permutation importance with a local sign.
///
/// Magnitude: mean over `repeats` of the log-loss degradation when column
/// `j` is shuffled across the dataset. Sign: central finite difference of
/// `predict_proba` at `x` along `j`, so the global magnitude carries the
/// local direction the perturbation tests need.
pub fn permutation_importance(
    model: &dyn Predictor,
    ds: &Dataset,
    x: &Instance,
    repeats: usize,
    seed: u64,
) -> Result<ImportanceVector, TechniqueError> {
    if repeats == 0 {
        return Err(TechniqueError::BadParameter("repeats must be >= 1".into()));
    }
    if ds.n_rows() == 0 {
        return Err(TechniqueError::BadParameter("dataset is empty".into()));
    }
    let labels = ds.labels.as_ref().ok_or(TechniqueError::MissingLabels)?;
    let targets: Vec<f64> = labels.iter().map(|&c| c.min(1) as f64).collect();

    let baseline_loss = log_loss_score(model, &ds.rows, &targets)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_features = ds.n_features();
    let mut values = Vec::with_capacity(n_features);

    for j in 0..n_features {
        let mut degradation = 0.0;
        for _ in 0..repeats {
            let mut column: Vec<f64> = ds.rows.iter().map(|r| r[j]).collect();
            column.shuffle(&mut rng);
            let permuted: Vec<Vec<f64>> = ds
                .rows
                .iter()
                .zip(&column)
                .map(|(row, &v)| {
                    let mut r = row.clone();
                    r[j] = v;
                    r
                })
                .collect();
            degradation += log_loss_score(model, &permuted, &targets)? - baseline_loss;
        }
        let magnitude = degradation / repeats as f64;

        let meta = &ds.features[j];
        let h = local_step(meta, x.values()[j]);
        let up = model.predict_proba(&x.with_value(j, x.values()[j] + h))?;
        let down = model.predict_proba(&x.with_value(j, x.values()[j] - h))?;
        let diff = up - down;
        let sign = if diff.abs() <= 1e-12 {
            0.0
        } else {
            diff.signum()
        };
        values.push(sign * magnitude.abs());
    }

    let baseline = model.predict_proba(x)?;
    Ok(ImportanceVector {
        technique_id: "pi".into(),
        values,
        baseline_probability: baseline,
        target_instance: Some(x.values().to_vec()),
        neighborhood_std: None,
    })
}

#[derive(Debug, Clone)]
pub struct LimeParams {
    pub n_samples: usize,
    /// Kernel width in standardized units; defaults to `0.75 * sqrt(|F|)`.
    pub kernel_width: Option<f64>,
    pub ridge_lambda: f64,
}

impl Default for LimeParams {
    fn default() -> Self {
        LimeParams {
            n_samples: 1000,
            kernel_width: None,
            ridge_lambda: 1e-3,
        }
    }
}

/// Local surrogate explainer: samples Gaussian neighbors around `x` in the
/// original feature space, weights them by proximity, and fits a
/// ridge-regularized weighted linear model to the predictor's outputs.
pub fn lime_like(
    model: &dyn Predictor,
    ds: &Dataset,
    x: &Instance,
    params: &LimeParams,
    seed: u64,
) -> Result<ImportanceVector, TechniqueError> {
    let n_features = ds.n_features();
    if params.n_samples < n_features + 1 {
        return Err(TechniqueError::BadParameter(format!(
            "n_samples must be >= |F|+1 = {}",
            n_features + 1
        )));
    }
    if params.kernel_width.is_some_and(|w| w <= 0.0) {
        return Err(TechniqueError::BadParameter(
            "kernel width must be > 0".into(),
        ));
    }
    let kernel_width = params
        .kernel_width
        .unwrap_or(0.75 * (n_features as f64).sqrt());

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scales: Vec<f64> = ds.features.iter().map(|f| f.std_dev).collect();

    let mut design: Vec<Vec<f64>> = Vec::with_capacity(params.n_samples);
    let mut responses: Vec<f64> = Vec::with_capacity(params.n_samples);
    let mut weights: Vec<f64> = Vec::with_capacity(params.n_samples);
    let mut neighbors: Vec<Vec<f64>> = Vec::with_capacity(params.n_samples);

    for _ in 0..params.n_samples {
        let mut neighbor = x.values().to_vec();
        let mut dist_sq = 0.0;
        for (j, scale) in scales.iter().enumerate() {
            let eps: f64 = rng.sample(StandardNormal);
            let offset = eps * scale;
            neighbor[j] += offset;
            if *scale > 0.0 {
                let standardized = offset / scale;
                dist_sq += standardized * standardized;
            }
        }
        let p = model.predict_proba(&Instance(neighbor.clone()))?;
        let mut row = Vec::with_capacity(n_features + 1);
        row.push(1.0);
        for (nv, xv) in neighbor.iter().zip(x.values()) {
            row.push(nv - xv);
        }
        design.push(row);
        responses.push(p);
        weights.push((-dist_sq / (kernel_width * kernel_width)).exp());
        neighbors.push(neighbor);
    }

    let beta = linalg::weighted_ridge(&design, &responses, &weights, params.ridge_lambda, true)
        .ok_or(TechniqueError::Singular)?;

    let neighborhood_std: Vec<f64> = (0..n_features)
        .map(|j| {
            let n = neighbors.len() as f64;
            let mean = neighbors.iter().map(|r| r[j]).sum::<f64>() / n;
            (neighbors.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n).sqrt()
        })
        .collect();

    let baseline = model.predict_proba(x)?;
    Ok(ImportanceVector {
        technique_id: "lime".into(),
        values: beta[1..].to_vec(),
        baseline_probability: baseline,
        target_instance: Some(x.values().to_vec()),
        neighborhood_std: Some(neighborhood_std),
    })
}

#[derive(Debug, Clone)]
pub struct ShapParams {
    pub n_coalitions: usize,
}

impl Default for ShapParams {
    fn default() -> Self {
        ShapParams { n_coalitions: 512 }
    }
}

/// Shapley kernel weight for a coalition of size `s` out of `m` features.
fn shapley_kernel(m: usize, s: usize) -> f64 {
    let mut binom = 1.0;
    for i in 0..s {
        binom *= (m - i) as f64 / (i + 1) as f64;
    }
    (m as f64 - 1.0) / (binom * s as f64 * (m - s) as f64)
}

/// Kernel-weighted coalition sampler for Shapley-style attributions.
///
/// Features outside a coalition are replaced by dataset means. Attributions
/// are solved from the Shapley-kernel weighted least squares with the
/// efficiency constraint enforced exactly, so they sum to
/// `f(x) - f(means)`. When the budget covers all `2^|F| - 2` proper
/// coalitions the result equals exact Shapley values.
pub fn kernel_shap_like(
    model: &dyn Predictor,
    ds: &Dataset,
    x: &Instance,
    params: &ShapParams,
    seed: u64,
) -> Result<ImportanceVector, TechniqueError> {
    let m = ds.n_features();
    if params.n_coalitions < 2 * m {
        return Err(TechniqueError::BadParameter(format!(
            "n_coalitions must be >= 2*|F| = {}",
            2 * m
        )));
    }
    let means = ds.feature_means();
    let fx = model.predict_proba(x)?;
    let f0 = model.predict_proba(&Instance(means.clone()))?;

    if m == 1 {
        return Ok(ImportanceVector {
            technique_id: "shap".into(),
            values: vec![fx - f0],
            baseline_probability: fx,
            target_instance: Some(x.values().to_vec()),
            neighborhood_std: None,
        });
    }

    // Coalition masks with their kernel weights; Some(weight) rows carry
    // explicit weights (exhaustive mode), None rows are implicitly weighted
    // through kernel-distributed sampling.
    let exhaustive = m <= 20 && params.n_coalitions >= (1usize << m) - 2;
    let mut masks: Vec<Vec<bool>> = Vec::new();
    let mut row_weights: Vec<f64> = Vec::new();

    if exhaustive {
        for bits in 1..(1u32 << m) - 1 {
            let mask: Vec<bool> = (0..m).map(|j| bits >> j & 1 == 1).collect();
            let size = mask.iter().filter(|&&b| b).count();
            masks.push(mask);
            row_weights.push(shapley_kernel(m, size));
        }
    } else {
        // Sample sizes from the kernel-induced distribution over coalition
        // sizes, then uniform subsets of that size.
        let size_weights: Vec<f64> = (1..m)
            .map(|s| (m as f64 - 1.0) / (s as f64 * (m - s) as f64))
            .collect();
        let total: f64 = size_weights.iter().sum();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut indices: Vec<usize> = (0..m).collect();
        for _ in 0..params.n_coalitions {
            let mut draw = rng.random::<f64>() * total;
            let mut size = 1;
            for (s, w) in (1..m).zip(&size_weights) {
                if draw < *w {
                    size = s;
                    break;
                }
                draw -= w;
                size = s;
            }
            indices.shuffle(&mut rng);
            let mut mask = vec![false; m];
            for &j in indices.iter().take(size) {
                mask[j] = true;
            }
            masks.push(mask);
            row_weights.push(1.0);
        }
    }

    let mut values_fn: Vec<f64> = Vec::with_capacity(masks.len());
    for mask in &masks {
        let mut probe = means.clone();
        for (j, &keep) in mask.iter().enumerate() {
            if keep {
                probe[j] = x.values()[j];
            }
        }
        values_fn.push(model.predict_proba(&Instance(probe))?);
    }

    // Enforce the efficiency constraint by eliminating the last feature:
    // phi_m = (fx - f0) - sum(others).
    let span = fx - f0;
    let p = m - 1;
    let mut design: Vec<Vec<f64>> = Vec::with_capacity(masks.len());
    let mut target: Vec<f64> = Vec::with_capacity(masks.len());
    for (mask, v) in masks.iter().zip(&values_fn) {
        let last = if mask[m - 1] { 1.0 } else { 0.0 };
        design.push(
            (0..p)
                .map(|j| (if mask[j] { 1.0 } else { 0.0 }) - last)
                .collect(),
        );
        target.push(v - f0 - last * span);
    }

    let mut beta = linalg::weighted_ridge(&design, &target, &row_weights, 0.0, false);
    if beta.is_none() {
        eprintln!("warning: shapley system underdetermined; retrying with ridge regularization");
        beta = linalg::weighted_ridge(&design, &target, &row_weights, 1e-8, false);
    }
    let beta = beta.ok_or(TechniqueError::Singular)?;

    let mut values = beta;
    let phi_last = span - values.iter().sum::<f64>();
    values.push(phi_last);

    Ok(ImportanceVector {
        technique_id: "shap".into(),
        values,
        baseline_probability: fx,
        target_instance: Some(x.values().to_vec()),
        neighborhood_std: None,
    })
}

/// A technique selection, carrying its parameters.
#[derive(Debug, Clone)]
pub enum TechniqueSpec {
    Intrinsic(IntrinsicForm),
    Permutation {
        repeats: usize,
    },
    Lime(LimeParams),
    KernelShap(ShapParams),
    /// Externally computed importances, evaluated as-is.
    External(ImportanceVector),
}

impl TechniqueSpec {
    pub fn id(&self) -> &str {
        match self {
            TechniqueSpec::Intrinsic(_) => "intrinsic",
            TechniqueSpec::Permutation { .. } => "pi",
            TechniqueSpec::Lime(_) => "lime",
            TechniqueSpec::KernelShap(_) => "shap",
            TechniqueSpec::External(z) => &z.technique_id,
        }
    }

    /// Compute the importance vector for `x`. The seed is derived per
    /// technique by the caller.
    pub fn compute(
        &self,
        model: &dyn Predictor,
        ds: &Dataset,
        x: &Instance,
        seed: u64,
    ) -> Result<ImportanceVector, TechniqueError> {
        match self {
            TechniqueSpec::Intrinsic(form) => intrinsic_linear(model, x, *form),
            TechniqueSpec::Permutation { repeats } => {
                permutation_importance(model, ds, x, *repeats, seed)
            }
            TechniqueSpec::Lime(params) => lime_like(model, ds, x, params, seed),
            TechniqueSpec::KernelShap(params) => kernel_shap_like(model, ds, x, params, seed),
            TechniqueSpec::External(z) => Ok(z.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datamodel::{Dataset, FeatureKind};
    use crate::models::LinearModel;

    fn dataset_from_rows(rows: Vec<Vec<f64>>, labels: Option<Vec<usize>>) -> Dataset {
        let n = rows[0].len();
        Dataset::from_rows(
            (0..n).map(|j| format!("f{j}")).collect(),
            vec![FeatureKind::Continuous; n],
            rows,
            labels,
        )
        .unwrap()
    }

    fn gaussian_dataset(n_features: usize, n_rows: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n_rows)
            .map(|_| {
                (0..n_features)
                    .map(|_| rng.sample::<f64, _>(StandardNormal))
                    .collect()
            })
            .collect();
        dataset_from_rows(rows, None)
    }

    struct ConstantModel(f64);
    impl Predictor for ConstantModel {
        fn predict_proba(&self, _x: &Instance) -> Result<f64, ModelError> {
            Ok(self.0)
        }
        fn arity(&self) -> usize {
            usize::MAX
        }
        fn query_count(&self) -> u64 {
            0
        }
    }

    #[test]
    fn intrinsic_returns_raw_coefficients() {
        let m = LinearModel::new(vec![2.0, -1.0, 0.0], 0.4);
        let x = Instance(vec![5.0, 6.0, 7.0]);
        let z = intrinsic_linear(&m, &x, IntrinsicForm::Coefficient).unwrap();
        assert_eq!(z.values, vec![2.0, -1.0, 0.0]);
        assert_eq!(z.baseline_probability, m.predict_proba(&x).unwrap());
    }

    #[test]
    fn intrinsic_product_form_behind_flag() {
        let m = LinearModel::new(vec![2.0, -1.0], 0.0);
        let x = Instance(vec![3.0, 4.0]);
        let z = intrinsic_linear(&m, &x, IntrinsicForm::CoefficientTimesValue).unwrap();
        assert_eq!(z.values, vec![6.0, -4.0]);
    }

    #[test]
    fn intrinsic_all_zero_weights_all_neutral() {
        let m = LinearModel::new(vec![0.0, 0.0], 0.0);
        let z =
            intrinsic_linear(&m, &Instance(vec![1.0, 2.0]), IntrinsicForm::Coefficient).unwrap();
        assert!(z.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn intrinsic_rejects_non_linear_models() {
        let m = ConstantModel(0.5);
        let err =
            intrinsic_linear(&m, &Instance(vec![1.0]), IntrinsicForm::Coefficient).unwrap_err();
        assert!(matches!(err, TechniqueError::NotLinear));
    }

    #[test]
    fn intrinsic_sign_agrees_with_finite_difference() {
        let m = LinearModel::new(vec![1.7], -0.2);
        let x = Instance(vec![0.3]);
        let z = intrinsic_linear(&m, &x, IntrinsicForm::Coefficient).unwrap();
        let up = m.predict_proba(&x.with_value(0, 0.3 + 1e-4)).unwrap();
        let down = m.predict_proba(&x.with_value(0, 0.3 - 1e-4)).unwrap();
        assert_eq!(z.values[0].signum(), (up - down).signum());
    }

    #[test]
    fn permutation_zero_weight_feature_near_zero() {
        let ds = {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let rows: Vec<Vec<f64>> = (0..60)
                .map(|_| vec![rng.sample(StandardNormal), rng.sample(StandardNormal)])
                .collect();
            let labels = rows.iter().map(|r| usize::from(r[0] > 0.0)).collect();
            dataset_from_rows(rows, Some(labels))
        };
        let m = LinearModel::new(vec![4.0, 0.0], 0.0);
        let x = Instance(vec![0.5, 0.5]);
        for seed in [1, 2, 3] {
            let z = permutation_importance(&m, &ds, &x, 10, seed).unwrap();
            assert!(z.values[1].abs() < 1e-3, "seed {seed}: {}", z.values[1]);
            assert!(z.values[0] > 0.0);
        }
    }

    #[test]
    fn permutation_matches_exhaustive_shuffle_oracle() {
        // 4-row dataset, single perfect feature; oracle averages the loss
        // degradation over all 4! = 24 column permutations.
        let rows = vec![vec![-2.0], vec![-1.0], vec![1.0], vec![2.0]];
        let labels = vec![0, 0, 1, 1];
        let ds = dataset_from_rows(rows.clone(), Some(labels.clone()));
        let m = LinearModel::new(vec![3.0], 0.0);

        let targets: Vec<f64> = labels.iter().map(|&c| c as f64).collect();
        let base = log_loss_score(&m, &rows, &targets).unwrap();
        let mut perms: Vec<Vec<usize>> = Vec::new();
        let mut idx = vec![0, 1, 2, 3];
        permute_all(&mut idx, 0, &mut perms);
        assert_eq!(perms.len(), 24);
        let oracle: f64 = perms
            .iter()
            .map(|perm| {
                let permuted: Vec<Vec<f64>> = perm.iter().map(|&i| vec![rows[i][0]]).collect();
                log_loss_score(&m, &permuted, &targets).unwrap() - base
            })
            .sum::<f64>()
            / 24.0;

        let z = permutation_importance(&m, &ds, &Instance(vec![0.5]), 600, 9).unwrap();
        assert!(z.values[0] > 0.0);
        assert!(
            (z.values[0] - oracle).abs() < 0.15 * oracle.abs().max(0.1),
            "impl {} vs oracle {oracle}",
            z.values[0]
        );
    }

    fn permute_all(idx: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == idx.len() {
            out.push(idx.clone());
            return;
        }
        for i in k..idx.len() {
            idx.swap(k, i);
            permute_all(idx, k + 1, out);
            idx.swap(k, i);
        }
    }

    #[test]
    fn permutation_zero_repeats_rejected() {
        let ds = dataset_from_rows(vec![vec![1.0]], Some(vec![1]));
        let m = LinearModel::new(vec![1.0], 0.0);
        assert!(matches!(
            permutation_importance(&m, &ds, &Instance(vec![1.0]), 0, 0),
            Err(TechniqueError::BadParameter(_))
        ));
    }

    #[test]
    fn lime_recovers_signs_of_linear_model() {
        let ds = gaussian_dataset(4, 100, 21);
        let weights = vec![1.5, -2.0, 0.4, -0.6];
        let m = LinearModel::new(weights.clone(), 0.1);
        let x = Instance(vec![0.2, -0.1, 0.4, 0.0]);
        let z = lime_like(&m, &ds, &x, &LimeParams::default(), 77).unwrap();
        for (j, w) in weights.iter().enumerate() {
            if w.abs() >= 0.1 {
                assert_eq!(z.values[j].signum(), w.signum(), "feature {j}");
            }
        }
        assert!(z.neighborhood_std.is_some());
    }

    #[test]
    fn lime_sign_recovery_rate_over_random_models() {
        // >= 95% sign agreement over 100 random linear models, |F| <= 8.
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        let mut checked = 0usize;
        let mut agreed = 0usize;
        for trial in 0..100 {
            let n_features = rng.random_range(2..=8);
            let ds = gaussian_dataset(n_features, 60, 1000 + trial);
            let weights: Vec<f64> = (0..n_features)
                .map(|_| rng.random_range(-2.0..2.0))
                .collect();
            let m = LinearModel::new(weights.clone(), rng.random_range(-0.5..0.5));
            let x = Instance(
                (0..n_features)
                    .map(|_| rng.random_range(-1.0..1.0))
                    .collect(),
            );
            let z = lime_like(&m, &ds, &x, &LimeParams::default(), 5000 + trial).unwrap();
            for (j, w) in weights.iter().enumerate() {
                if w.abs() >= 0.1 {
                    checked += 1;
                    if z.values[j].signum() == w.signum() {
                        agreed += 1;
                    }
                }
            }
        }
        let rate = agreed as f64 / checked as f64;
        assert!(
            rate >= 0.95,
            "sign recovery rate {rate} over {checked} features"
        );
    }

    #[test]
    fn lime_constant_predictor_yields_zeros() {
        let ds = gaussian_dataset(3, 50, 3);
        let m = ConstantModel(0.7);
        let z = lime_like(&m, &ds, &Instance(vec![0.0; 3]), &LimeParams::default(), 5).unwrap();
        for v in &z.values {
            assert!(v.abs() < 1e-6);
        }
    }

    #[test]
    fn lime_deterministic_under_seed() {
        let ds = gaussian_dataset(3, 40, 8);
        let m = LinearModel::new(vec![1.0, -1.0, 0.5], 0.0);
        let x = Instance(vec![0.1, 0.2, 0.3]);
        let a = lime_like(&m, &ds, &x, &LimeParams::default(), 31).unwrap();
        let b = lime_like(&m, &ds, &x, &LimeParams::default(), 31).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn lime_sample_budget_validated() {
        let ds = gaussian_dataset(4, 20, 2);
        let m = ConstantModel(0.5);
        let params = LimeParams {
            n_samples: 3,
            ..LimeParams::default()
        };
        assert!(lime_like(&m, &ds, &Instance(vec![0.0; 4]), &params, 0).is_err());
    }

    /// Brute-force Shapley values with mean imputation over all 2^m coalitions.
    fn exact_shapley(model: &dyn Predictor, ds: &Dataset, x: &Instance) -> Vec<f64> {
        let m = ds.n_features();
        let means = ds.feature_means();
        let value = |bits: u32| {
            let mut probe = means.clone();
            for j in 0..m {
                if bits >> j & 1 == 1 {
                    probe[j] = x.values()[j];
                }
            }
            model.predict_proba(&Instance(probe)).unwrap()
        };
        let factorial = |n: usize| (1..=n).map(|i| i as f64).product::<f64>();
        (0..m)
            .map(|j| {
                let mut phi = 0.0;
                for bits in 0..(1u32 << m) {
                    if bits >> j & 1 == 1 {
                        continue;
                    }
                    let s = bits.count_ones() as usize;
                    let coeff = factorial(s) * factorial(m - s - 1) / factorial(m);
                    phi += coeff * (value(bits | 1 << j) - value(bits));
                }
                phi
            })
            .collect()
    }

    #[test]
    fn exhaustive_mode_matches_brute_force_shapley() {
        let ds = gaussian_dataset(4, 80, 17);
        let m = LinearModel::new(vec![1.2, -0.8, 0.5, 2.0], -0.3);
        let x = Instance(vec![0.6, -0.2, 1.1, -0.9]);
        let params = ShapParams {
            n_coalitions: 1 << 4,
        };
        let z = kernel_shap_like(&m, &ds, &x, &params, 0).unwrap();
        let oracle = exact_shapley(&m, &ds, &x);
        for (got, want) in z.values.iter().zip(&oracle) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn shap_constant_predictor_all_zero() {
        let ds = gaussian_dataset(3, 30, 4);
        let m = ConstantModel(0.42);
        let z =
            kernel_shap_like(&m, &ds, &Instance(vec![1.0; 3]), &ShapParams::default(), 0).unwrap();
        for v in &z.values {
            assert!(v.abs() < 1e-9);
        }
    }

    #[test]
    fn shap_attributions_sum_to_probability_span() {
        let ds = gaussian_dataset(5, 60, 12);
        let m = LinearModel::new(vec![0.5, 1.0, -1.5, 0.3, -0.2], 0.1);
        let x = Instance(vec![1.0, -1.0, 0.5, 0.2, -0.4]);
        let z = kernel_shap_like(&m, &ds, &x, &ShapParams { n_coalitions: 64 }, 3).unwrap();
        let means = Instance(ds.feature_means());
        let span = m.predict_proba(&x).unwrap() - m.predict_proba(&means).unwrap();
        assert!((z.values.iter().sum::<f64>() - span).abs() < 1e-6);
    }

    #[test]
    fn shap_near_linear_regime_proportional_to_weight_times_offset() {
        // Small weights keep the sigmoid nearly linear, so attributions
        // approach w_j * (v_j - mean_j).
        let ds = gaussian_dataset(3, 200, 6);
        let weights = vec![0.05, -0.08, 0.03];
        let m = LinearModel::new(weights.clone(), 0.0);
        let x = Instance(vec![1.0, 0.8, -1.2]);
        let z = kernel_shap_like(&m, &ds, &x, &ShapParams { n_coalitions: 8 }, 0).unwrap();
        for j in 0..3 {
            let expected = 0.25 * weights[j] * (x.values()[j] - ds.features[j].mean);
            let rel = (z.values[j] - expected).abs() / expected.abs();
            assert!(rel < 0.10, "feature {j}: {} vs {expected}", z.values[j]);
        }
    }

    #[test]
    fn shap_deterministic_under_seed() {
        let ds = gaussian_dataset(6, 50, 14);
        let m = LinearModel::new(vec![1.0, -1.0, 0.5, 0.2, -0.7, 0.9], 0.0);
        let x = Instance(vec![0.1; 6]);
        let params = ShapParams { n_coalitions: 40 };
        let a = kernel_shap_like(&m, &ds, &x, &params, 19).unwrap();
        let b = kernel_shap_like(&m, &ds, &x, &params, 19).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn shap_coalition_budget_validated() {
        let ds = gaussian_dataset(4, 20, 2);
        let m = ConstantModel(0.5);
        let params = ShapParams { n_coalitions: 7 };
        assert!(kernel_shap_like(&m, &ds, &Instance(vec![0.0; 4]), &params, 0).is_err());
    }

    #[test]
    fn importance_vector_json_roundtrip() {
        let z = ImportanceVector {
            technique_id: "lime".into(),
            values: vec![0.5, -0.25],
            baseline_probability: 0.7,
            target_instance: Some(vec![1.0, 2.0]),
            neighborhood_std: Some(vec![0.9, 1.1]),
        };
        let back = ImportanceVector::from_json(&z.to_json()).unwrap();
        assert_eq!(z, back);
    }

    #[test]
    fn external_vector_import_minimal_keys() {
        let json = r#"{"technique":"ext","z":[1.0,-1.0],"baseline":0.6}"#;
        let z = ImportanceVector::from_json(json).unwrap();
        assert_eq!(z.values, vec![1.0, -1.0]);
        assert_eq!(z.baseline_probability, 0.6);
        assert!(z.neighborhood_std.is_none());
    }
}
