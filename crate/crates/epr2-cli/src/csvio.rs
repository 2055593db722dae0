//! CSV emission and parsing for the sweep tables.
//!
//! Floats are printed with 9 significant digits (the bounds are certified
//! far above that granularity), `NaN` spelled literally, integers plain.
//! Parsing accepts exactly what emission produces, so emit-parse-emit is
//! byte-stable for every mode.

use epr2::DecompositionReport;

use crate::error::CliError;
use crate::sweep::{ChainedRow, QubitBoundsRow, QutritRow, SweepRows};

pub const QUBIT_BOUNDS_HEADER: [&str; 4] = ["theta", "lower_epr2", "lower_improved", "upper_chained"];
pub const CHAINED_HEADER: [&str; 5] = ["theta", "N", "I_value", "upper_bound", "delta"];
pub const QUTRIT_HEADER: [&str; 2] = ["gamma", "lower_bound"];
pub const VERIFY_HEADER: [&str; 7] = [
    "theta",
    "model",
    "certified_weight",
    "max_identity_residual",
    "min_pnl_value",
    "max_nosignaling_residual",
    "settings_examined",
];

/// 9 significant digits, scientific; the one admissible non-finite value
/// is spelled `NaN`.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.8e}")
    }
}

pub fn parse_float(s: &str) -> Result<f64, CliError> {
    s.parse::<f64>()
        .map_err(|_| CliError::usage(format!("not a number: `{s}`")))
}

fn parse_int(s: &str) -> Result<usize, CliError> {
    s.parse::<usize>()
        .map_err(|_| CliError::usage(format!("not an integer: `{s}`")))
}

fn write_rows(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flushed")).expect("ascii output")
}

pub fn emit(rows: &SweepRows) -> String {
    match rows {
        SweepRows::QubitBounds(rows) => write_rows(
            &QUBIT_BOUNDS_HEADER,
            rows.iter()
                .map(|r| {
                    vec![
                        fmt_float(r.theta),
                        fmt_float(r.lower_epr2),
                        fmt_float(r.lower_improved),
                        fmt_float(r.upper_chained),
                    ]
                })
                .collect(),
        ),
        SweepRows::Chained(rows) => write_rows(
            &CHAINED_HEADER,
            rows.iter()
                .map(|r| {
                    vec![
                        fmt_float(r.theta),
                        r.n.to_string(),
                        fmt_float(r.i_value),
                        fmt_float(r.upper_bound),
                        fmt_float(r.delta),
                    ]
                })
                .collect(),
        ),
        SweepRows::Qutrit { rows, .. } => write_rows(
            &QUTRIT_HEADER,
            rows.iter()
                .map(|r| vec![fmt_float(r.gamma), fmt_float(r.lower_bound)])
                .collect(),
        ),
        SweepRows::Verify(rows) => write_rows(
            &VERIFY_HEADER,
            rows.iter()
                .map(|r| {
                    vec![
                        fmt_float(r.theta),
                        r.model_id.clone(),
                        fmt_float(r.certified_weight),
                        fmt_float(r.max_identity_residual),
                        fmt_float(r.min_pnl_value),
                        fmt_float(r.max_nosignaling_residual),
                        r.settings_examined.to_string(),
                    ]
                })
                .collect(),
        ),
    }
}

fn read_rows(text: &str, header: &[&str]) -> Result<Vec<Vec<String>>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let got = reader
        .headers()
        .map_err(|e| CliError::usage(format!("bad CSV header: {e}")))?;
    let want: Vec<&str> = header.to_vec();
    if got.iter().collect::<Vec<_>>() != want {
        return Err(CliError::usage(format!(
            "unexpected CSV header `{}`",
            got.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::usage(format!("bad CSV row: {e}")))?;
        out.push(record.iter().map(str::to_string).collect());
    }
    Ok(out)
}

/// Parses a qubit-bounds table. The convergence flag is not part of the
/// CSV contract, so parsed rows carry `true` there.
pub fn parse_qubit_bounds(text: &str) -> Result<Vec<QubitBoundsRow>, CliError> {
    read_rows(text, &QUBIT_BOUNDS_HEADER)?
        .into_iter()
        .map(|f| {
            Ok(QubitBoundsRow {
                theta: parse_float(&f[0])?,
                lower_epr2: parse_float(&f[1])?,
                lower_improved: parse_float(&f[2])?,
                upper_chained: parse_float(&f[3])?,
                chained_converged: true,
            })
        })
        .collect()
}

/// Parses a chained table; fields absent from the CSV contract (flags,
/// budgets, settings) come back empty.
pub fn parse_chained(text: &str) -> Result<Vec<ChainedRow>, CliError> {
    read_rows(text, &CHAINED_HEADER)?
        .into_iter()
        .map(|f| {
            Ok(ChainedRow {
                theta: parse_float(&f[0])?,
                n: parse_int(&f[1])?,
                i_value: parse_float(&f[2])?,
                upper_bound: parse_float(&f[3])?,
                delta: parse_float(&f[4])?,
                converged: true,
                evals_used: 0,
                alphas: Vec::new(),
            })
        })
        .collect()
}

pub fn parse_qutrit(text: &str) -> Result<Vec<QutritRow>, CliError> {
    read_rows(text, &QUTRIT_HEADER)?
        .into_iter()
        .map(|f| {
            Ok(QutritRow {
                gamma: parse_float(&f[0])?,
                lower_bound: parse_float(&f[1])?,
                converged: true,
                starts_used: 0,
            })
        })
        .collect()
}

pub fn parse_verify(text: &str) -> Result<Vec<DecompositionReport>, CliError> {
    read_rows(text, &VERIFY_HEADER)?
        .into_iter()
        .map(|f| {
            Ok(DecompositionReport {
                theta: parse_float(&f[0])?,
                model_id: f[1].clone(),
                certified_weight: parse_float(&f[2])?,
                max_identity_residual: parse_float(&f[3])?,
                min_pnl_value: parse_float(&f[4])?,
                max_nosignaling_residual: parse_float(&f[5])?,
                settings_examined: parse_int(&f[6])?,
            })
        })
        .collect()
}

/// Re-emits a parsed table; the identity for round-trip checks.
pub fn reemit(mode_header: &[&str], text: &str) -> Result<String, CliError> {
    if mode_header == QUBIT_BOUNDS_HEADER {
        let rows = parse_qubit_bounds(text)?;
        Ok(emit(&SweepRows::QubitBounds(rows)))
    } else if mode_header == CHAINED_HEADER {
        let rows = parse_chained(text)?;
        Ok(emit(&SweepRows::Chained(rows)))
    } else if mode_header == QUTRIT_HEADER {
        let rows = parse_qutrit(text)?;
        Ok(emit(&SweepRows::Qutrit {
            rows,
            threshold_estimate: None,
        }))
    } else if mode_header == VERIFY_HEADER {
        let rows = parse_verify(text)?;
        Ok(emit(&SweepRows::Verify(rows)))
    } else {
        Err(CliError::usage("unknown CSV header"))
    }
}
