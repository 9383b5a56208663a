use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sigzone::automata::compose;
use sigzone::exemplify::{Exemplifier, ExemplifyResult};
use sigzone::io::{emit_plot, emit_trace, model_hash, parse_model, PlotFormat, TraceDocument};
use sigzone::semantics::Budget;

#[derive(Parser)]
#[command(
    name = "sigzone",
    version,
    about = "Example runs for parametric timed specifications over signals"
)]
struct Cli {
    /// More log output on standard error (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Explore the composed model and write positive and negative runs.
    Exemplify(ExemplifyArgs),
}

#[derive(clap::Args)]
struct ExemplifyArgs {
    /// Model files; together they declare one specification and its bounders.
    #[arg(required = true)]
    models: Vec<PathBuf>,
    /// Number of distinct symbolic runs to exemplify.
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u64).range(1..))]
    attempts: u64,
    #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
    max_depth: u64,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    max_states: u64,
    /// Output directory, created if needed.
    #[arg(short, long, default_value = "out")]
    output: PathBuf,
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_value = "json,csv,svg"
    )]
    format: Vec<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Svg,
}

enum Outcome {
    Written,
    NoTarget,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();
    let result = match &cli.command {
        Command::Exemplify(args) => exemplify(args),
    };
    match result {
        Ok(Outcome::Written) => ExitCode::SUCCESS,
        Ok(Outcome::NoTarget) => {
            eprintln!("no target location reached within the budget");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn exemplify(args: &ExemplifyArgs) -> Result<Outcome> {
    let texts: Vec<(String, String)> = args
        .models
        .iter()
        .map(|p| {
            Ok((
                p.display().to_string(),
                fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
            ))
        })
        .collect::<Result<_>>()?;
    let files: Vec<(&str, &str)> = texts
        .iter()
        .map(|(n, t)| (n.as_str(), t.as_str()))
        .collect();
    let net = parse_model(&files)?;
    let a = compose(&net)?;
    let hash = model_hash(&files.iter().map(|(_, t)| *t).collect::<Vec<_>>());

    let ex = Exemplifier::new(&a)?;
    let budget = Budget {
        max_depth: args.max_depth as usize,
        max_states: args.max_states as usize,
        max_hits: 1,
    };
    let results = ex.exemplify(&a.accepting(), budget, args.attempts as usize)?;
    if results.is_empty() {
        return Ok(Outcome::NoTarget);
    }

    fs::create_dir_all(&args.output)
        .with_context(|| format!("creating {}", args.output.display()))?;
    let mut summary = Vec::new();
    for r in &results {
        summary.push(write_attempt(&ex, &hash, r, args)?);
    }
    let doc = json!({ "model": hash, "attempts": summary });
    let text = serde_json::to_string_pretty(&doc)? + "\n";
    write(&args.output.join("summary.json"), &text)?;
    log::info!(
        "{} attempt(s) written to {}",
        results.len(),
        args.output.display()
    );
    Ok(Outcome::Written)
}

fn write_attempt(
    ex: &Exemplifier,
    hash: &str,
    r: &ExemplifyResult,
    args: &ExemplifyArgs,
) -> Result<Value> {
    let a = ex.automaton();
    let mut runs = Vec::new();
    for tr in &r.runs {
        let stem = format!("run_{}_{}", r.attempt, tr.kind.tag());
        let doc = TraceDocument::from_run(a, hash, tr.kind, &tr.run, tr.verdict, tr.deadlock);
        for f in &args.format {
            let (ext, text) = match f {
                Format::Json => ("json", emit_trace(&doc)),
                Format::Csv => ("csv", emit_plot(a, &tr.run, PlotFormat::Csv)),
                Format::Svg => ("svg", emit_plot(a, &tr.run, PlotFormat::Svg)),
            };
            write(&args.output.join(format!("{stem}.{ext}")), &text)?;
        }
        runs.push(json!({
            "file": stem,
            "kind": tr.kind,
            "parameters": doc.parameters,
            "verdict": tr.verdict,
            "deadlock": tr.deadlock,
        }));
    }
    let word: Vec<&str> = r
        .symbolic_run
        .edges
        .iter()
        .map(|e| a.edges[*e].action.as_str())
        .collect();
    Ok(json!({ "attempt": r.attempt, "actions": word, "runs": runs }))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}
