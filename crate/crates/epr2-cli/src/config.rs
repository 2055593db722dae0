//! Flag parsing, config-file merging, and grid resolution.
//!
//! Precedence is CLI flag > config-file entry > per-mode default. The
//! config file is a flat `key = value` format whose keys are exactly the
//! long flag names without the leading dashes; `#` starts a comment.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "epr2",
    version,
    about = "Local/nonlocal content bounds for entangled qubit and qutrit pairs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep theta and tabulate both certified lower bounds on the local
    /// weight next to the chained-inequality upper bound.
    QubitBounds(SweepArgs),
    /// Optimize the N-setting chained expression over a theta grid and
    /// convert the values into upper bounds.
    Chained(SweepArgs),
    /// Sweep gamma and lower-bound the deterministic weight of the
    /// two-qutrit family, reporting the onset threshold.
    Qutrit(SweepArgs),
    /// Re-certify the explicit qubit decompositions at their canonical
    /// weights on a dense settings grid.
    Verify(SweepArgs),
}

/// One flag set shared by every subcommand; fields are optional so that
/// config-file entries and per-mode defaults can fill the gaps.
#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    /// Flat key=value config file; explicit flags override its entries.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// First theta value of the sweep grid, in radians.
    #[arg(long, value_name = "RAD")]
    pub theta_start: Option<f64>,
    /// Last theta value of the sweep grid (inclusive), in radians.
    #[arg(long, value_name = "RAD")]
    pub theta_stop: Option<f64>,
    /// Spacing of the theta grid, in radians.
    #[arg(long, value_name = "RAD")]
    pub theta_step: Option<f64>,
    /// First gamma value of the sweep grid.
    #[arg(long, value_name = "X")]
    pub gamma_start: Option<f64>,
    /// Last gamma value of the sweep grid (inclusive).
    #[arg(long, value_name = "X")]
    pub gamma_stop: Option<f64>,
    /// Spacing of the gamma grid.
    #[arg(long, value_name = "X")]
    pub gamma_step: Option<f64>,
    /// Settings per side for the chained expression; repeat for several N.
    #[arg(long, value_name = "N")]
    pub n_settings: Vec<usize>,
    /// Directions per side of the verification grid (at least 100).
    #[arg(long, value_name = "K")]
    pub grid_size: Option<usize>,
    /// Independent optimizer starts per grid point.
    #[arg(long, value_name = "K")]
    pub restarts: Option<usize>,
    /// Base seed; every grid point derives its own stream from it.
    #[arg(long, value_name = "SEED")]
    pub seed: Option<u64>,
    /// Mode-specific tolerance: bisection width for qubit-bounds,
    /// simplex tolerance for chained/qutrit, residual gate for verify.
    #[arg(long, value_name = "EPS")]
    pub tolerance: Option<f64>,
    /// Write the sweep table to this CSV file instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out_csv: Option<PathBuf>,
    /// Write the full result document (rows plus diagnostics) as JSON.
    #[arg(long, value_name = "PATH")]
    pub out_json: Option<PathBuf>,
    /// Render the sweep as a standalone SVG figure.
    #[arg(long, value_name = "PATH")]
    pub out_svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    QubitBounds,
    Chained,
    Qutrit,
    Verify,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::QubitBounds => "qubit-bounds",
            Mode::Chained => "chained",
            Mode::Qutrit => "qutrit",
            Mode::Verify => "verify",
        }
    }
}

/// Fully resolved run description: every knob has a concrete value and
/// the grids are materialized.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub mode: Mode,
    pub thetas: Vec<f64>,
    pub gammas: Vec<f64>,
    pub n_list: Vec<usize>,
    pub grid_size: usize,
    pub restarts: usize,
    pub seed: u64,
    pub tolerance: f64,
    /// Objective-evaluation budget per optimizer start (not exposed as a
    /// flag; generous per-mode values keep the searches honest).
    pub max_evals: usize,
    pub out_csv: Option<PathBuf>,
    pub out_json: Option<PathBuf>,
    pub out_svg: Option<PathBuf>,
}

const KNOWN_KEYS: [&str; 14] = [
    "theta-start",
    "theta-stop",
    "theta-step",
    "gamma-start",
    "gamma-stop",
    "gamma-step",
    "n-settings",
    "grid-size",
    "restarts",
    "seed",
    "tolerance",
    "out-csv",
    "out-json",
    "out-svg",
];

/// Parses the flat key=value config format. Unknown keys are rejected so
/// that typos cannot silently fall back to defaults.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::usage(format!(
                "config line {}: expected `key = value`, got `{line}`",
                lineno + 1
            ))
        })?;
        let key = key.trim();
        let value = value.trim();
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::usage(format!(
                "config line {}: unknown key `{key}`",
                lineno + 1
            )));
        }
        if map.insert(key.to_string(), value.to_string()).is_some() {
            return Err(CliError::usage(format!(
                "config line {}: duplicate key `{key}`",
                lineno + 1
            )));
        }
    }
    Ok(map)
}

fn file_get<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>, CliError> {
    match map.get(key) {
        None => Ok(None),
        Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
            CliError::usage(format!("config key `{key}`: cannot parse `{raw}`"))
        }),
    }
}

/// CLI value if given, else the config-file entry, else `None`.
fn pick<T: FromStr>(
    cli: Option<T>,
    map: &BTreeMap<String, String>,
    key: &str,
) -> Result<Option<T>, CliError> {
    match cli {
        Some(v) => Ok(Some(v)),
        None => file_get(map, key),
    }
}

/// Inclusive arithmetic grid `start, start + step, ..` up to `stop`.
pub fn build_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !step.is_finite() || step <= 0.0 {
        return Err(CliError::usage(format!("grid step must be positive, got {step}")));
    }
    if !start.is_finite() || !stop.is_finite() || stop + 1e-12 < start {
        return Err(CliError::usage(format!(
            "grid stop must be at least the start, got [{start}, {stop}]"
        )));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 100_000 {
        return Err(CliError::usage(format!("grid has {count} points; refusing > 100000")));
    }
    Ok((0..count).map(|k| start + k as f64 * step).collect())
}

struct ModeDefaults {
    theta: (f64, f64, f64),
    gamma: (f64, f64, f64),
    n_list: &'static [usize],
    grid_size: usize,
    restarts: usize,
    tolerance: f64,
    max_evals: usize,
}

fn defaults_for(mode: Mode) -> ModeDefaults {
    match mode {
        // 41 points across [0, pi/4]; the upper bound uses N = 40.
        Mode::QubitBounds => ModeDefaults {
            theta: (0.0, FRAC_PI_4, FRAC_PI_4 / 40.0),
            gamma: (0.0, 0.0, 1.0),
            n_list: &[40],
            grid_size: 2000,
            restarts: 6,
            tolerance: 1e-6,
            max_evals: 60_000,
        },
        Mode::Chained => ModeDefaults {
            theta: (FRAC_PI_4 / 10.0, FRAC_PI_4, FRAC_PI_4 / 10.0),
            gamma: (0.0, 0.0, 1.0),
            n_list: &[30],
            grid_size: 2000,
            restarts: 6,
            tolerance: 1e-10,
            max_evals: 60_000,
        },
        Mode::Qutrit => ModeDefaults {
            theta: (0.0, 0.0, 1.0),
            gamma: (0.0, 5.0, 0.1),
            n_list: &[40],
            grid_size: 2000,
            restarts: 12,
            tolerance: 1e-9,
            max_evals: 4_000,
        },
        Mode::Verify => ModeDefaults {
            theta: (0.05, 0.65, 0.15),
            gamma: (0.0, 0.0, 1.0),
            n_list: &[40],
            grid_size: 2000,
            restarts: 6,
            tolerance: 1e-9,
            max_evals: 4_000,
        },
    }
}

/// Merges CLI flags, config-file entries, and per-mode defaults into a
/// concrete run description.
pub fn resolve(mode: Mode, args: &SweepArgs) -> Result<ResolvedConfig, CliError> {
    let file = match &args.config {
        None => BTreeMap::new(),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            parse_config_text(&text)?
        }
    };
    let d = defaults_for(mode);

    let theta_start = pick(args.theta_start, &file, "theta-start")?;
    let theta_stop = pick(args.theta_stop, &file, "theta-stop")?;
    let theta_step = pick(args.theta_step, &file, "theta-step")?;
    let gamma_start = pick(args.gamma_start, &file, "gamma-start")?;
    let gamma_stop = pick(args.gamma_stop, &file, "gamma-stop")?;
    let gamma_step = pick(args.gamma_step, &file, "gamma-step")?;

    let thetas = build_grid(
        theta_start.unwrap_or(d.theta.0),
        theta_stop.unwrap_or(d.theta.1),
        theta_step.unwrap_or(d.theta.2),
    )?;
    for &t in &thetas {
        if !(0.0..=FRAC_PI_4 + 1e-12).contains(&t) {
            return Err(CliError::usage(format!("theta {t} outside [0, pi/4]")));
        }
    }

    // The default gamma sweep is the coarse grid refined by a finer band
    // around the onset; any explicit gamma flag switches to a pure grid.
    let gamma_untouched =
        gamma_start.is_none() && gamma_stop.is_none() && gamma_step.is_none();
    let gammas = if mode == Mode::Qutrit && gamma_untouched {
        let mut all = build_grid(0.0, 5.0, 0.1)?;
        all.extend(build_grid(1.6, 2.6, 0.02)?);
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        all.dedup_by(|a, b| (*a - *b).abs() <= 1e-9);
        all
    } else {
        build_grid(
            gamma_start.unwrap_or(d.gamma.0),
            gamma_stop.unwrap_or(d.gamma.1),
            gamma_step.unwrap_or(d.gamma.2),
        )?
    };
    for &g in &gammas {
        if !g.is_finite() || g < 0.0 {
            return Err(CliError::usage(format!("gamma {g} must be nonnegative")));
        }
    }

    let n_list = if !args.n_settings.is_empty() {
        args.n_settings.clone()
    } else if let Some(raw) = file.get("n-settings") {
        raw.split(',')
            .map(|tok| {
                tok.trim().parse::<usize>().map_err(|_| {
                    CliError::usage(format!("config key `n-settings`: cannot parse `{tok}`"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?
    } else {
        d.n_list.to_vec()
    };
    if n_list.is_empty() || n_list.iter().any(|&n| n < 2) {
        return Err(CliError::usage("n-settings entries must be at least 2"));
    }

    let grid_size = pick(args.grid_size, &file, "grid-size")?.unwrap_or(d.grid_size);
    if grid_size < 100 {
        return Err(CliError::usage("grid-size must be at least 100"));
    }
    let restarts = pick(args.restarts, &file, "restarts")?.unwrap_or(d.restarts);
    if restarts == 0 {
        return Err(CliError::usage("restarts must be at least 1"));
    }
    let seed = pick(args.seed, &file, "seed")?.unwrap_or(0);
    let tolerance = pick(args.tolerance, &file, "tolerance")?.unwrap_or(d.tolerance);
    if !tolerance.is_finite() || tolerance <= 0.0 {
        return Err(CliError::usage(format!("tolerance must be positive, got {tolerance}")));
    }

    let out_path = |cli: &Option<PathBuf>, key: &str| -> Result<Option<PathBuf>, CliError> {
        Ok(cli.clone().or_else(|| file.get(key).map(PathBuf::from)))
    };
    let out_csv = out_path(&args.out_csv, "out-csv")?;
    let out_json = out_path(&args.out_json, "out-json")?;
    let out_svg = out_path(&args.out_svg, "out-svg")?;
    if mode == Mode::Verify && out_svg.is_some() {
        return Err(CliError::usage("verify produces no figure; drop --out-svg"));
    }

    Ok(ResolvedConfig {
        mode,
        thetas,
        gammas,
        n_list,
        grid_size,
        restarts,
        seed,
        tolerance,
        max_evals: d.max_evals,
        out_csv,
        out_json,
        out_svg,
    })
}
