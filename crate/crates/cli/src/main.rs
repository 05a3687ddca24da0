//! `ordunc`: uncertainty tables, rejection curves, OOD AUCs, rank tests and
//! simplex heatmaps from the command line.
//!
//! Every subcommand prints a one-line JSON summary on stdout and writes its
//! data under `--out`. Exit codes: 0 success, 1 degenerate computation,
//! 2 input or schema error.

mod args;
mod evaluate;
mod heatmap;
mod measure;
mod ood;
mod output;
mod stats;
mod svg;

use std::process::ExitCode;

use clap::Parser;
use ordunc_core::UqError;
use ordunc_pipeline::PipelineError;

use args::{Cli, Command};

/// Result of a subcommand that ran to completion.
pub struct Outcome {
    pub summary: serde_json::Value,
    /// Output was written but some quantity was undefined.
    pub degenerate: bool,
}

/// Failure that is not the caller's fault: the inputs were valid but the
/// computation has no defined answer.
#[derive(Debug)]
pub struct Degenerate(pub String);

impl std::fmt::Display for Degenerate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Degenerate {}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<Degenerate>() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<PipelineError>() {
            return if e.is_input_error() { 2 } else { 1 };
        }
        if let Some(UqError::UndefinedPrr { .. }) = cause.downcast_ref::<UqError>() {
            return 1;
        }
    }
    2
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Measure(a) => measure::run(&cli.global, a),
        Command::Evaluate(a) => evaluate::run(&cli.global, a),
        Command::Ood(a) => ood::run(&cli.global, a),
        Command::Stats(a) => stats::run(&cli.global, a),
        Command::Heatmap(a) => heatmap::run(&cli.global, a),
    };
    match result {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            if outcome.degenerate {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
