//! `train`: fit a reference model and write it with a self-test block.

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use veritex_core::datamodel::{Dataset, Instance};
use veritex_core::models::{train_logistic, train_mlp, ModelFile, Predictor};

use crate::{read_dataset, CliError};

#[derive(Debug, clap::Args)]
pub struct TrainArgs {
    /// Dataset CSV path.
    #[arg(long)]
    pub data: PathBuf,
    /// Schema file declaring each column's kind.
    #[arg(long)]
    pub schema: PathBuf,
    /// Field delimiter.
    #[arg(long, default_value = ",")]
    pub delimiter: char,
    /// Model kind: logistic | mlp.
    #[arg(long = "model-kind", default_value = "logistic")]
    pub model_kind: String,
    /// Hidden layer widths for mlp, e.g. "8,4".
    #[arg(long)]
    pub hidden: Option<String>,
    #[arg(long, default_value_t = 400)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fraction of rows held out for the printed F1 score.
    #[arg(long, default_value_t = 0.2)]
    pub holdout: f64,
    /// Output model file.
    #[arg(long)]
    pub out: PathBuf,
}

fn f1_score(model: &dyn Predictor, rows: &[Vec<f64>], labels: &[usize]) -> Result<f64, CliError> {
    let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
    for (row, &y) in rows.iter().zip(labels) {
        let p = model.predict_proba(&Instance(row.clone()))?;
        let pred = usize::from(p >= 0.5);
        match (pred, y) {
            (1, 1) => tp += 1.0,
            (1, 0) => fp += 1.0,
            (0, 1) => fn_ += 1.0,
            _ => {}
        }
    }
    if tp == 0.0 {
        return Ok(0.0);
    }
    Ok(2.0 * tp / (2.0 * tp + fp + fn_))
}

pub fn run(args: &TrainArgs) -> Result<i32, CliError> {
    if !(0.0..1.0).contains(&args.holdout) {
        return Err(CliError::Usage("holdout must be in [0, 1)".into()));
    }
    let ds = read_dataset(&args.data, &args.schema, args.delimiter)?;
    let labels = ds
        .labels
        .clone()
        .ok_or_else(|| CliError::Usage("training requires a label column".into()))?;

    // Deterministic split.
    let mut indices: Vec<usize> = (0..ds.n_rows()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    indices.shuffle(&mut rng);
    let holdout_n = ((ds.n_rows() as f64) * args.holdout) as usize;
    let (test_idx, train_idx) = indices.split_at(holdout_n);

    let train_rows: Vec<Vec<f64>> = train_idx.iter().map(|&i| ds.rows[i].clone()).collect();
    let train_labels: Vec<usize> = train_idx.iter().map(|&i| labels[i]).collect();
    let train_ds = Dataset::from_rows(
        ds.features.iter().map(|f| f.name.clone()).collect(),
        ds.features.iter().map(|f| f.kind.clone()).collect(),
        train_rows,
        Some(train_labels),
    )?;

    let selftest: Vec<Instance> = train_ds
        .rows
        .iter()
        .take(5)
        .cloned()
        .map(Instance)
        .collect();

    let (file, f1) = match args.model_kind.as_str() {
        "logistic" => {
            let (model, _) = train_logistic(&train_ds, args.epochs, args.lr)?;
            let f1 = eval_f1(&model, &ds, &labels, test_idx, train_idx)?;
            (ModelFile::from_linear(&model, &selftest), f1)
        }
        "mlp" => {
            let hidden: Vec<usize> = match &args.hidden {
                Some(list) => list
                    .split(',')
                    .map(|s| {
                        s.trim()
                            .parse()
                            .map_err(|_| CliError::Usage(format!("bad hidden width '{s}'")))
                    })
                    .collect::<Result<_, _>>()?,
                None => vec![8],
            };
            let (model, _) = train_mlp(&train_ds, &hidden, args.epochs, args.lr, args.seed)?;
            let f1 = eval_f1(&model, &ds, &labels, test_idx, train_idx)?;
            (ModelFile::from_mlp(&model, &selftest), f1)
        }
        other => {
            return Err(CliError::Usage(format!("unknown model kind '{other}'")));
        }
    };

    veritex_core::models::write_model_file(&args.out, &file)?;
    println!("wrote {}", args.out.display());
    println!("held-out F1: {f1:.4}");
    Ok(0)
}

fn eval_f1(
    model: &dyn Predictor,
    ds: &Dataset,
    labels: &[usize],
    test_idx: &[usize],
    train_idx: &[usize],
) -> Result<f64, CliError> {
    // With no holdout, report training F1.
    let idx = if test_idx.is_empty() {
        train_idx
    } else {
        test_idx
    };
    let rows: Vec<Vec<f64>> = idx.iter().map(|&i| ds.rows[i].clone()).collect();
    let labels: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
    f1_score(model, &rows, &labels)
}
