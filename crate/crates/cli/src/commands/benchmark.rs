//! `benchmark`: untruthful-percentage table over sampled instances.

use std::path::PathBuf;

use veritex_core::models::load_predictor;

use super::{resolve_settings, split_csv, CommonOpts};
use crate::benchmark::{render_table, run_benchmark, BenchmarkModel};
use crate::{read_dataset, CliError};

#[derive(Debug, clap::Args)]
pub struct BenchmarkArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub schema: PathBuf,
    #[arg(long, default_value = ",")]
    pub delimiter: char,
    /// Model files, comma separated.
    #[arg(long)]
    pub models: String,
    /// Display names for the models (defaults to the file stems).
    #[arg(long = "model-names")]
    pub model_names: Option<String>,
    #[arg(long, default_value = "pi,lime,shap")]
    pub techniques: String,
    /// Number of instances sampled from the dataset.
    #[arg(long)]
    pub sample: Option<usize>,
    /// Directory for benchmark.json and benchmark.txt.
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
    #[command(flatten)]
    pub common: CommonOpts,
}

pub fn run(args: &BenchmarkArgs) -> Result<i32, CliError> {
    let mut settings = resolve_settings(&args.common)?;
    if let Some(sample) = args.sample {
        settings.sample = sample;
    }
    let ds = read_dataset(&args.data, &args.schema, args.delimiter)?;

    let paths = split_csv(&args.models);
    if paths.is_empty() {
        return Err(CliError::Usage("no model files given".into()));
    }
    let names: Vec<String> = match &args.model_names {
        Some(list) => {
            let names = split_csv(list);
            if names.len() != paths.len() {
                return Err(CliError::Usage(
                    "model-names must match the number of models".into(),
                ));
            }
            names
        }
        None => paths
            .iter()
            .map(|p| {
                PathBuf::from(p)
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| p.clone())
            })
            .collect(),
    };

    let mut models = Vec::with_capacity(paths.len());
    for (path, name) in paths.iter().zip(names) {
        let predictor = load_predictor(PathBuf::from(path).as_path())?;
        models.push(BenchmarkModel { name, predictor });
    }

    let technique_names = split_csv(&args.techniques);
    let summary = run_benchmark(
        &ds,
        &models,
        &technique_names,
        &settings,
        &args.data.display().to_string(),
    )?;

    let table = render_table(&summary);
    print!("{table}");

    if let Some(dir) = &args.out_dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("benchmark.json"), summary.to_json())?;
        std::fs::write(dir.join("benchmark.txt"), &table)?;
        println!("artifacts written to {}", dir.display());
    }
    Ok(0)
}
