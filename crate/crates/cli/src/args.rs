//! Flags, config file and their merge.
//!
//! Every option is global, so each one also has a config-file key equal to
//! its long flag name. A config file is flat `key = value` text; `#` starts a
//! comment. Flags given on the command line override the file.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntRange {
    pub start: i64,
    pub end: i64,
}

impl IntRange {
    pub fn single(v: i64) -> Self {
        Self { start: v, end: v }
    }

    pub fn is_empty(&self) -> bool {
        self.end < self.start
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.start..=self.end
    }
}

impl FromStr for IntRange {
    type Err = String;

    /// `a`, `a..b` or `a..=b`, both ends inclusive.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| t.trim().parse::<i64>().map_err(|e| format!("bad integer {t:?}: {e}"));
        match s.split_once("..") {
            None => parse(s).map(Self::single),
            Some((a, b)) => Ok(Self {
                start: parse(a)?,
                end: parse(b.strip_prefix('=').unwrap_or(b))?,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "mqr",
    version,
    about = "Quasi-exact spectra of a magnetic quadrupole in a rotating frame"
)]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(flatten)]
    pub opts: Options,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Allowed frequencies and energies for each (n, l).
    Spectrum,
    /// Positive roots of the truncation constraint in the coupling xi.
    Roots,
    /// Radial wavefunction samples of one mode.
    Wavefunction,
    /// Check analytic levels against the finite-difference spectrum.
    Verify,
    /// Parameter sweep over (n, l) and optional rotation / potential lists.
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Roots => "roots",
            Command::Wavefunction => "wavefunction",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Particle mass m (> 0).
    #[arg(long = "m", global = true, allow_negative_numbers = true)]
    pub mass: Option<f64>,
    /// Quadrupole moment scalar M (> 0).
    #[arg(long = "M-quad", global = true, allow_negative_numbers = true)]
    pub m_quad: Option<f64>,
    /// Charge-density parameter lambda.
    #[arg(long = "lambda", global = true, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Cyclotron frequency omega; overrides 2 M lambda / m.
    #[arg(long = "omega", global = true, allow_negative_numbers = true)]
    pub omega: Option<f64>,
    /// Rotation rate Omega of the frame.
    #[arg(long = "Omega", global = true, allow_negative_numbers = true)]
    pub rotation: Option<f64>,
    /// Strength theta of the theta/rho potential.
    #[arg(long = "theta", global = true, allow_negative_numbers = true)]
    pub theta: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Flat `key = value` file with defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for independent rows.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Level index n (1-based) or range `a..b`.
    #[arg(long = "n", global = true)]
    pub n: Option<IntRange>,
    /// Angular momentum l or range `a..b` (use `--l=-2..2` for negative starts).
    #[arg(long = "l", global = true, allow_hyphen_values = true)]
    pub l: Option<IntRange>,
    /// Oscillator radial index (0-based) for the Landau limit.
    #[arg(long = "nr", global = true)]
    pub nr: Option<IntRange>,
    /// Evaluate the theta = 0 rotating Landau levels.
    #[arg(long = "landau-limit", global = true)]
    pub landau_limit: bool,
    #[arg(long = "root-index", global = true)]
    pub root_index: Option<usize>,
    /// Number of wavefunction samples on [0, r_max].
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long = "r-max", global = true)]
    pub r_max: Option<f64>,
    /// Interior points of the coarse finite-difference grid.
    #[arg(long = "n-points", global = true)]
    pub n_points: Option<usize>,
    /// Relative tolerance on Lambda for verify.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Coupling placed in the finite-difference operator instead of xi*.
    #[arg(long = "xi-override", global = true, allow_negative_numbers = true)]
    pub xi_override: Option<f64>,
    /// Verify the xi = 0 oscillator ladder instead of polynomial modes.
    #[arg(long, global = true)]
    pub oscillator: bool,
    /// Add exact constraint-polynomial coefficients to roots output.
    #[arg(long = "dump-poly", global = true)]
    pub dump_poly: bool,
    /// Fail with exit 3 when some (n, l) has no positive root.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Record per-row errors in sweeps instead of aborting.
    #[arg(long = "keep-going", global = true)]
    pub keep_going: bool,
    /// Comma-separated rotation rates for sweep.
    #[arg(long = "Omega-list", global = true, allow_hyphen_values = true)]
    pub rotation_list: Option<String>,
    /// Comma-separated potential strengths for sweep.
    #[arg(long = "theta-list", global = true, allow_hyphen_values = true)]
    pub theta_list: Option<String>,
    /// Re-emit a table previously written with --format json.
    #[arg(long = "from-json", global = true)]
    pub from_json: Option<PathBuf>,
    /// Omit metadata (CSV comment lines, JSON meta object).
    #[arg(long = "no-meta", global = true)]
    pub no_meta: bool,
    /// Accepted for scripts; every command is already deterministic.
    #[arg(long, global = true)]
    pub seedless: bool,
}

/// Reads a flat `key = value` file into `(key, value)` pairs in file order.
pub fn read_config(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::invalid(format!("config line {}: expected key = value", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k == "config" {
            return Err(CliError::invalid(format!("config line {}: invalid key {k:?}", i + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

fn config_path(argv: &[String]) -> Option<PathBuf> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(PathBuf::from(p));
        }
    }
    None
}

fn is_bool_key(key: &str) -> bool {
    matches!(
        key,
        "landau-limit" | "oscillator" | "dump-poly" | "strict" | "keep-going" | "no-meta" | "seedless"
    )
}

/// Parses `argv` (program name first) with config-file values spliced in
/// ahead of the user's flags, so that later (command-line) values win.
pub fn parse_with_config(argv: &[String]) -> Result<Cli, clap::Error> {
    let mut full: Vec<String> = vec![argv.first().cloned().unwrap_or_else(|| "mqr".into())];
    if let Some(path) = config_path(argv) {
        let entries = read_config(&path)
            .map_err(|e| Cli::command().error(clap::error::ErrorKind::InvalidValue, e.to_string()))?;
        for (k, v) in entries {
            if is_bool_key(&k) {
                match v.as_str() {
                    "true" | "1" | "yes" => full.push(format!("--{k}")),
                    "false" | "0" | "no" => {}
                    _ => {
                        return Err(Cli::command().error(
                            clap::error::ErrorKind::InvalidValue,
                            format!("config key {k} expects true/false, got {v:?}"),
                        ))
                    }
                }
            } else {
                full.push(format!("--{k}={v}"));
            }
        }
    }
    full.extend(argv.iter().skip(1).cloned());
    let matches = Cli::command().try_get_matches_from(full)?;
    Cli::from_arg_matches(&matches)
}
