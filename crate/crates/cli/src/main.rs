use std::process::ExitCode;

use clap::{Parser, Subcommand};

use veritex_cli::commands::{benchmark, evaluate, render_tree, serve, train};
use veritex_cli::CliError;

/// Evaluate the truthfulness of feature-importance explanations, justify
/// each verdict through an argument tree, and pick the most truthful
/// technique.
#[derive(Parser)]
#[command(name = "veritex", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a reference model and write it with a self-test block.
    Train(train::TrainArgs),
    /// Evaluate explanation techniques on one instance.
    Evaluate(evaluate::EvaluateArgs),
    /// Tabulate untruthful percentages over sampled instances.
    Benchmark(benchmark::BenchmarkArgs),
    /// Export an argument tree as text, DOT, or structured JSON.
    RenderTree(render_tree::RenderTreeArgs),
    /// Serve a model over the stdin/stdout line protocol.
    Serve(serve::ServeArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Train(args) => train::run(args),
        Command::Evaluate(args) => evaluate::run(args),
        Command::Benchmark(args) => benchmark::run(args),
        Command::RenderTree(args) => render_tree::run(args),
        Command::Serve(args) => serve::run(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
