//! Command-line front end: resolves the run description, executes the
//! sweep, and emits CSV/JSON/SVG artifacts with deterministic bytes.

pub mod config;
pub mod csvio;
pub mod error;
pub mod svg;
pub mod sweep;

use std::path::{Path, PathBuf};

use clap::Parser;

use config::{Cli, Command, Mode, ResolvedConfig};
use error::CliError;
use sweep::{FailureRecord, FailureSummary, SweepRows};

/// Full process entry: parse, execute, map errors to exit codes.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version land on stdout with success; real usage
            // errors keep clap's diagnostics and exit 2.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(err) => {
            match &err {
                CliError::Validation(summary) => eprintln!("{summary}"),
                other => eprintln!("error: {other}"),
            }
            err.exit_code()
        }
    }
}

fn split(command: Command) -> (Mode, config::SweepArgs) {
    match command {
        Command::QubitBounds(a) => (Mode::QubitBounds, a),
        Command::Chained(a) => (Mode::Chained, a),
        Command::Qutrit(a) => (Mode::Qutrit, a),
        Command::Verify(a) => (Mode::Verify, a),
    }
}

fn write_file(path: &Path, content: &str) -> Result<(), CliError> {
    std::fs::write(path, content).map_err(|e| CliError::io(path, e))
}

/// Creating the output files up front surfaces unwritable paths before
/// minutes of sweeping, and pins down exit code 3 for I/O trouble.
fn preflight(paths: [&Option<PathBuf>; 3]) -> Result<(), CliError> {
    for path in paths.into_iter().flatten() {
        std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    }
    Ok(())
}

fn json_document(
    cfg: &ResolvedConfig,
    rows: &SweepRows,
    failures: &[FailureRecord],
) -> String {
    let doc = serde_json::json!({
        "mode": cfg.mode.name(),
        "seed": cfg.seed,
        "tolerance": cfg.tolerance,
        "rows": rows,
        "failures": failures,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("serializable document");
    text.push('\n');
    text
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (mode, args) = split(cli.command);
    let cfg = config::resolve(mode, &args)?;
    preflight([&cfg.out_csv, &cfg.out_json, &cfg.out_svg])?;

    let rows = sweep::run_sweep(&cfg)?;
    let failures = sweep::check_rows(&rows, cfg.tolerance);

    let csv_text = csvio::emit(&rows);
    match &cfg.out_csv {
        Some(path) => write_file(path, &csv_text)?,
        None => print!("{csv_text}"),
    }
    if let Some(path) = &cfg.out_json {
        write_file(path, &json_document(&cfg, &rows, &failures))?;
    }
    if let Some(path) = &cfg.out_svg {
        write_file(path, &svg::emit_svg(&rows)?)?;
    }

    if failures.is_empty() {
        Ok(())
    } else {
        let summary = FailureSummary {
            status: "failure",
            mode: cfg.mode.name(),
            failures: &failures,
        };
        Err(CliError::Validation(
            serde_json::to_string(&summary).expect("serializable summary"),
        ))
    }
}
