//! `render-tree`: write an argument tree from a stored evaluation result or
//! from a live single-technique evaluation.

use std::path::PathBuf;

use veritex_core::argumentation::{build_tree, export_tree, mark, ExportFormat};
use veritex_core::investigator::{investigate, TruthReport};
use veritex_core::seed::derive_seed;
use veritex_core::selector::EvaluationResult;

use super::{resolve_settings, split_csv, CommonOpts};
use crate::commands::evaluate::load_model;
use crate::{parse_techniques, read_dataset, CliError};

#[derive(Debug, clap::Args)]
pub struct RenderTreeArgs {
    /// Stored result.json from `evaluate`.
    #[arg(long = "from-result")]
    pub from_result: Option<PathBuf>,
    /// Technique whose tree to render (defaults to the chosen one).
    #[arg(long)]
    pub technique: Option<String>,
    /// Output format: text | dot | json.
    #[arg(long, default_value = "text")]
    pub format: String,
    /// Output file (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,

    // Live-evaluation inputs, used when --from-result is absent.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long)]
    pub subprocess: Option<String>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long, default_value = ",")]
    pub delimiter: char,
    #[arg(long)]
    pub index: Option<usize>,
    #[command(flatten)]
    pub common: CommonOpts,
}

fn report_from_result(args: &RenderTreeArgs, path: &PathBuf) -> Result<TruthReport, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let result = EvaluationResult::from_json(&text)?;
    let wanted = args
        .technique
        .clone()
        .unwrap_or_else(|| result.chosen_technique.clone());
    result
        .outcomes
        .into_iter()
        .find(|o| o.technique_id == wanted)
        .map(|o| o.report)
        .ok_or_else(|| CliError::Usage(format!("result has no technique '{wanted}'")))
}

fn report_from_live(args: &RenderTreeArgs) -> Result<TruthReport, CliError> {
    let (data, schema) = match (&args.data, &args.schema) {
        (Some(d), Some(s)) => (d, s),
        _ => {
            return Err(CliError::Usage(
                "render-tree needs --from-result, or --data/--schema/--index with a model".into(),
            ));
        }
    };
    let settings = resolve_settings(&args.common)?;
    let ds = read_dataset(data, schema, args.delimiter)?;
    let index = args
        .index
        .ok_or_else(|| CliError::Usage("--index is required for live rendering".into()))?;
    if index >= ds.n_rows() {
        return Err(CliError::Usage(format!(
            "instance index {index} out of range (N = {})",
            ds.n_rows()
        )));
    }
    let x = ds.instance(index);
    let model = load_model(&args.model, &args.subprocess, ds.n_features())?;
    let technique = args
        .technique
        .clone()
        .ok_or_else(|| CliError::Usage("--technique is required for live rendering".into()))?;
    let specs = parse_techniques(&split_csv(&technique), &settings)?;
    let spec = specs
        .first()
        .ok_or_else(|| CliError::Usage("no technique given".into()))?;
    let seed = derive_seed(settings.seed, &format!("technique-{}", spec.id()));
    let z = spec.compute(model.as_ref(), &ds, &x, seed)?;
    Ok(investigate(
        model.as_ref(),
        &z,
        &x,
        &ds,
        &settings.investigate_config(),
    )?)
}

pub fn run(args: &RenderTreeArgs) -> Result<i32, CliError> {
    let format: ExportFormat = args
        .format
        .parse()
        .map_err(|e: veritex_core::argumentation::ArgError| CliError::Usage(e.to_string()))?;

    let report = match &args.from_result {
        Some(path) => report_from_result(args, path)?,
        None => report_from_live(args)?,
    };
    let tree = mark(build_tree(&report)?);
    let rendered = export_tree(&tree, format)?;

    match &args.out {
        Some(path) => {
            std::fs::write(path, rendered)?;
            println!("wrote {}", path.display());
        }
        None => print!("{rendered}"),
    }
    Ok(0)
}
