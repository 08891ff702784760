//! `evaluate`: run the techniques on one instance, investigate, select,
//! reduce, and write the result artifacts.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use veritex_core::argumentation::{build_tree, dialogue_text, export_tree, mark, ExportFormat};
use veritex_core::datamodel::{Dataset, Instance};
use veritex_core::models::{load_predictor, Predictor, SubprocessModel};
use veritex_core::selector::{evaluate_instance, EvaluationResult};
use veritex_core::Judgement;

use super::{resolve_settings, split_csv, CommonOpts};
use crate::{parse_techniques, read_dataset, CliError, PredictedClassMonitor};

#[derive(Debug, clap::Args)]
pub struct EvaluateArgs {
    /// Serialized model file.
    #[arg(long, conflicts_with = "subprocess")]
    pub model: Option<PathBuf>,
    /// Shell command speaking the line protocol (one CSV request line in,
    /// one probability line out); used instead of a model file.
    #[arg(long)]
    pub subprocess: Option<String>,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long, default_value = ",")]
    pub delimiter: char,
    /// Row index of the instance to explain.
    #[arg(long, conflicts_with = "values")]
    pub index: Option<usize>,
    /// Inline instance values, comma separated.
    #[arg(long)]
    pub values: Option<String>,
    /// Techniques to evaluate, comma separated
    /// (intrinsic, pi, lime, shap, external:<file>).
    #[arg(long, default_value = "intrinsic,pi,lime,shap")]
    pub techniques: String,
    /// Probability the tests monitor: positive | predicted.
    #[arg(long, default_value = "positive")]
    pub monitor: String,
    /// Directory for result.json, dialogue.txt and the tree exports.
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonOpts,
}

pub fn resolve_instance(ds: &Dataset, args: &EvaluateArgs) -> Result<Instance, CliError> {
    match (&args.index, &args.values) {
        (Some(i), None) => {
            if *i >= ds.n_rows() {
                return Err(CliError::Usage(format!(
                    "instance index {i} out of range (N = {})",
                    ds.n_rows()
                )));
            }
            Ok(ds.instance(*i))
        }
        (None, Some(list)) => {
            let values: Vec<f64> = list
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse()
                        .map_err(|_| CliError::Usage(format!("bad value '{}'", s.trim())))
                })
                .collect::<Result<_, _>>()?;
            if values.len() != ds.n_features() {
                return Err(CliError::Usage(format!(
                    "instance has {} values but the dataset has {} features",
                    values.len(),
                    ds.n_features()
                )));
            }
            Ok(Instance(values))
        }
        _ => Err(CliError::Usage(
            "exactly one of --index or --values is required".into(),
        )),
    }
}

pub fn load_model(
    model: &Option<PathBuf>,
    subprocess: &Option<String>,
    arity: usize,
) -> Result<Arc<dyn Predictor>, CliError> {
    match (model, subprocess) {
        (Some(path), None) => Ok(load_predictor(path)?),
        (None, Some(cmd)) => Ok(Arc::new(SubprocessModel::spawn(cmd, arity)?)),
        _ => Err(CliError::Usage(
            "exactly one of --model or --subprocess is required".into(),
        )),
    }
}

pub fn write_artifacts(out_dir: &Path, result: &EvaluationResult) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("result.json"), result.to_json())?;
    std::fs::write(
        out_dir.join("dialogue.txt"),
        dialogue_text(&result.dialogue) + "\n",
    )?;

    let chosen = result
        .outcomes
        .iter()
        .find(|o| o.technique_id == result.chosen_technique)
        .expect("chosen technique has an outcome");
    let tree = mark(build_tree(&chosen.report)?);
    std::fs::write(
        out_dir.join("tree.txt"),
        export_tree(&tree, ExportFormat::Text)?,
    )?;
    std::fs::write(
        out_dir.join("tree.dot"),
        export_tree(&tree, ExportFormat::Dot)?,
    )?;
    std::fs::write(
        out_dir.join("tree.json"),
        export_tree(&tree, ExportFormat::Structured)?,
    )?;
    Ok(())
}

pub fn run(args: &EvaluateArgs) -> Result<i32, CliError> {
    let settings = resolve_settings(&args.common)?;
    let ds = read_dataset(&args.data, &args.schema, args.delimiter)?;
    let x = resolve_instance(&ds, args)?;
    let mut model = load_model(&args.model, &args.subprocess, ds.n_features())?;

    match args.monitor.as_str() {
        "positive" => {}
        "predicted" => {
            model = Arc::new(PredictedClassMonitor::new(model, &x)?);
        }
        other => return Err(CliError::Usage(format!("unknown monitor '{other}'"))),
    }

    let technique_names = split_csv(&args.techniques);
    let specs = parse_techniques(&technique_names, &settings)?;
    let result = evaluate_instance(model.as_ref(), &specs, &x, &ds, &settings.eval_config())?;

    println!("chosen technique: {}", result.chosen_technique);
    for outcome in &result.outcomes {
        println!(
            "  {}: {} untruthful of {} features ({:?})",
            outcome.technique_id,
            outcome.untruthful_count,
            outcome.report.n_features(),
            outcome.verdict
        );
    }
    println!("final judgement: {:?}", result.final_judgement);
    for warning in &result.warnings {
        eprintln!("warning: {warning}");
    }
    println!();
    println!("{}", dialogue_text(&result.dialogue));

    if let Some(dir) = &args.out_dir {
        write_artifacts(dir, &result)?;
        println!();
        println!("artifacts written to {}", dir.display());
    }

    Ok(match result.final_judgement {
        Judgement::Unwarranted => 0,
        Judgement::Warranted => 1,
    })
}
