//! Full-batch gradient-descent trainers for the reference models.
//!
//! Determinism outranks speed here: fixed seeds, no shuffling, no early
//! stopping. Both trainers return the per-epoch log-loss history alongside
//! the model.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{sigmoid, Layer, LinearModel, MlpModel, ModelError};
use crate::datamodel::Dataset;

fn binary_targets(ds: &Dataset) -> Result<Vec<f64>, ModelError> {
    let labels = ds.labels.as_ref().ok_or(ModelError::MissingLabels)?;
    for &c in labels {
        if c > 1 {
            return Err(ModelError::NonBinaryLabels(c));
        }
    }
    Ok(labels.iter().map(|&c| c as f64).collect())
}

fn log_loss(probs: &[f64], targets: &[f64]) -> f64 {
    let n = probs.len() as f64;
    probs
        .iter()
        .zip(targets)
        .map(|(&p, &y)| {
            let p = p.clamp(1e-12, 1.0 - 1e-12);
            -(y * p.ln() + (1.0 - y) * (1.0 - p).ln())
        })
        .sum::<f64>()
        / n
}

/// Train a logistic-linear model by full-batch gradient descent from zero
/// weights. Returns the model and the log-loss after each epoch.
pub fn train_logistic(
    ds: &Dataset,
    epochs: usize,
    lr: f64,
) -> Result<(LinearModel, Vec<f64>), ModelError> {
    if epochs == 0 {
        return Err(ModelError::BadParameter("epochs must be >= 1".into()));
    }
    if lr <= 0.0 {
        return Err(ModelError::BadParameter("learning rate must be > 0".into()));
    }
    let targets = binary_targets(ds)?;
    let n = ds.n_rows() as f64;
    let arity = ds.n_features();

    let mut weights = vec![0.0; arity];
    let mut bias = 0.0;
    let mut losses = Vec::with_capacity(epochs);

    for _ in 0..epochs {
        let probs: Vec<f64> = ds
            .rows
            .iter()
            .map(|row| {
                let z: f64 = weights.iter().zip(row).map(|(w, v)| w * v).sum::<f64>() + bias;
                sigmoid(z)
            })
            .collect();

        let mut grad_w = vec![0.0; arity];
        let mut grad_b = 0.0;
        for (i, row) in ds.rows.iter().enumerate() {
            let err = probs[i] - targets[i];
            for (g, v) in grad_w.iter_mut().zip(row) {
                *g += err * v;
            }
            grad_b += err;
        }
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w -= lr * g / n;
        }
        bias -= lr * grad_b / n;

        losses.push(log_loss(&probs, &targets));
    }

    Ok((LinearModel::new(weights, bias), losses))
}

/// Train a feed-forward network (rectifier hidden units, sigmoid output) by
/// full-batch gradient descent. With `hidden = []` the architecture, the
/// zero initialization and the updates all reduce to `train_logistic`.
pub fn train_mlp(
    ds: &Dataset,
    hidden: &[usize],
    epochs: usize,
    lr: f64,
    seed: u64,
) -> Result<(MlpModel, Vec<f64>), ModelError> {
    if epochs == 0 {
        return Err(ModelError::BadParameter("epochs must be >= 1".into()));
    }
    if lr <= 0.0 {
        return Err(ModelError::BadParameter("learning rate must be > 0".into()));
    }
    if hidden.contains(&0) {
        return Err(ModelError::BadParameter("hidden layer of width 0".into()));
    }
    let targets = binary_targets(ds)?;
    let n = ds.n_rows() as f64;
    let arity = ds.n_features();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dims = vec![arity];
    dims.extend_from_slice(hidden);
    dims.push(1);

    let mut layers = Vec::with_capacity(dims.len() - 1);
    for w in dims.windows(2) {
        let (fan_in, fan_out) = (w[0], w[1]);
        let layer = if hidden.is_empty() {
            // No hidden layers: zero init, matching the logistic trainer.
            Layer {
                weights: vec![vec![0.0; fan_in]; fan_out],
                bias: vec![0.0; fan_out],
            }
        } else {
            let scale = 1.0 / (fan_in as f64).sqrt();
            Layer {
                weights: (0..fan_out)
                    .map(|_| {
                        (0..fan_in)
                            .map(|_| rng.random_range(-scale..scale))
                            .collect()
                    })
                    .collect(),
                bias: vec![0.0; fan_out],
            }
        };
        layers.push(layer);
    }

    let mut model = MlpModel::new(arity, layers)?;
    let mut losses = Vec::with_capacity(epochs);

    for _ in 0..epochs {
        let n_layers = model.layers.len();
        let mut grad_w: Vec<Vec<Vec<f64>>> = model
            .layers
            .iter()
            .map(|l| vec![vec![0.0; l.weights[0].len()]; l.weights.len()])
            .collect();
        let mut grad_b: Vec<Vec<f64>> = model
            .layers
            .iter()
            .map(|l| vec![0.0; l.bias.len()])
            .collect();
        let mut probs = Vec::with_capacity(ds.n_rows());

        for (i, row) in ds.rows.iter().enumerate() {
            let activations = model.forward_trace(row);
            let p = activations[n_layers][0];
            probs.push(p);

            // Output delta for sigmoid + log-loss.
            let mut delta = vec![p - targets[i]];
            for l in (0..n_layers).rev() {
                let input = &activations[l];
                for (u, d) in delta.iter().enumerate() {
                    for (k, v) in input.iter().enumerate() {
                        grad_w[l][u][k] += d * v;
                    }
                    grad_b[l][u] += d;
                }
                if l > 0 {
                    let mut prev = vec![0.0; input.len()];
                    for (u, d) in delta.iter().enumerate() {
                        for (k, w) in model.layers[l].weights[u].iter().enumerate() {
                            prev[k] += d * w;
                        }
                    }
                    // Rectifier derivative on the post-activation trace.
                    for (k, v) in input.iter().enumerate() {
                        if *v <= 0.0 {
                            prev[k] = 0.0;
                        }
                    }
                    delta = prev;
                }
            }
        }

        for (l, layer) in model.layers.iter_mut().enumerate() {
            for (u, row) in layer.weights.iter_mut().enumerate() {
                for (k, w) in row.iter_mut().enumerate() {
                    *w -= lr * grad_w[l][u][k] / n;
                }
                layer.bias[u] -= lr * grad_b[l][u] / n;
            }
        }

        losses.push(log_loss(&probs, &targets));
    }

    Ok((model, losses))
}
