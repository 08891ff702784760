//! `serve`: expose a model file over the line protocol, so it can act as a
//! subprocess predictor for another process.

use std::io::{BufRead, Write};
use std::path::PathBuf;

use veritex_core::datamodel::Instance;
use veritex_core::models::load_predictor;

use crate::CliError;

#[derive(Debug, clap::Args)]
pub struct ServeArgs {
    /// Model file to serve.
    #[arg(long)]
    pub model: PathBuf,
}

pub fn run(args: &ServeArgs) -> Result<i32, CliError> {
    let model = load_predictor(&args.model)?;
    let stdin = std::io::stdin();
    let mut stdout = std::io::stdout().lock();
    for line in stdin.lock().lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let values: Vec<f64> = line
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| CliError::Runtime(format!("bad request value '{}'", s.trim())))
            })
            .collect::<Result<_, _>>()?;
        let p = model.predict_proba(&Instance(values))?;
        writeln!(stdout, "{p}")?;
        stdout.flush()?;
    }
    Ok(0)
}
