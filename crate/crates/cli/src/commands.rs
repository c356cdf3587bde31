use std::collections::BTreeSet;

use mqr_core::heun::{self, RadialSamples};
use mqr_core::model::{self, PhysicalParams};
use mqr_core::oracle::{self, GridSpec, VerificationReport, VerifyOptions};
use mqr_core::quantize::{self, QuantizedMode};
use mqr_core::Error as CoreError;
use rayon::prelude::*;

use crate::args::{Command, Format, IntRange, Options};
use crate::error::CliError;
use crate::table::{Cell, Table};

pub const MAX_LEVEL: i64 = 12;
pub const MAX_ABS_L: i64 = 20;

/// Options after defaults are applied and validated.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub params: PhysicalParams,
    /// Cyclotron frequency: `--omega` if given, else `2Mλ/m`.
    pub omega: f64,
    pub n_range: IntRange,
    pub l_range: IntRange,
    pub format: Format,
    pub jobs: usize,
    pub opts: Options,
}

fn check_range(name: &str, r: IntRange, lo: i64, hi: i64) -> Result<(), CliError> {
    if r.is_empty() {
        return Err(CliError::invalid(format!(
            "{name} range {}..{} is empty",
            r.start, r.end
        )));
    }
    if r.start < lo || r.end > hi {
        return Err(CliError::invalid(format!(
            "{name} range {}..{} outside [{lo}, {hi}]",
            r.start, r.end
        )));
    }
    Ok(())
}

impl RunConfig {
    pub fn resolve(command: Command, opts: Options) -> Result<Self, CliError> {
        let params = PhysicalParams::new(
            opts.mass.unwrap_or(1.0),
            opts.m_quad.unwrap_or(1.0),
            opts.lambda.unwrap_or(1.0),
            opts.rotation.unwrap_or(0.0),
            opts.theta.unwrap_or(1.0),
        )?;
        if opts.omega.is_some() && (opts.lambda.is_some() || opts.m_quad.is_some()) {
            eprintln!("warning: --omega given together with --lambda/--M-quad; using --omega");
        }
        let omega = opts.omega.unwrap_or_else(|| model::cyclotron_frequency(&params));
        if !omega.is_finite() {
            return Err(CliError::invalid("omega must be finite"));
        }
        let n_range = opts.n.unwrap_or(IntRange::single(1));
        let l_range = opts.l.unwrap_or(IntRange::single(0));
        check_range("n", n_range, 1, MAX_LEVEL)?;
        check_range("l", l_range, -MAX_ABS_L, MAX_ABS_L)?;
        if let Some(nr) = opts.nr {
            check_range("nr", nr, 0, 1000)?;
        }
        let jobs = opts.jobs.unwrap_or(1);
        if jobs == 0 {
            return Err(CliError::invalid("--jobs must be at least 1"));
        }
        Ok(Self {
            command,
            params,
            omega,
            n_range,
            l_range,
            format: opts.format.unwrap_or_default(),
            jobs,
            opts,
        })
    }

    fn levels(&self) -> Vec<(u32, i32)> {
        self.n_range
            .iter()
            .flat_map(|n| self.l_range.iter().map(move |l| (n as u32, l as i32)))
            .collect()
    }

    fn l_abs_values(&self) -> Vec<u32> {
        self.l_range
            .iter()
            .map(|l| l.unsigned_abs() as u32)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    fn base_meta(&self) -> Vec<(String, String)> {
        let p = &self.params;
        vec![
            ("tool".into(), format!("mqr {}", env!("CARGO_PKG_VERSION"))),
            ("command".into(), self.command.name().into()),
            ("m".into(), p.mass.to_string()),
            ("M-quad".into(), p.quadrupole.to_string()),
            ("lambda".into(), p.charge_density.to_string()),
            ("Omega".into(), p.rotation.to_string()),
            ("theta".into(), p.potential_strength.to_string()),
            ("n".into(), format!("{}..{}", self.n_range.start, self.n_range.end)),
            ("l".into(), format!("{}..{}", self.l_range.start, self.l_range.end)),
        ]
    }

    /// Runs `f` over `items` on `jobs` threads, preserving input order.
    fn par_map<T: Sync, R: Send>(&self, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
        if self.jobs == 1 {
            return items.iter().map(f).collect();
        }
        match rayon::ThreadPoolBuilder::new().num_threads(self.jobs).build() {
            Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
            Err(_) => items.iter().map(f).collect(),
        }
    }
}

/// Output of a command plus the exit code it should end with.
pub struct Outcome {
    pub table: Table,
    pub exit_code: u8,
}

impl Outcome {
    fn ok(table: Table) -> Self {
        Self { table, exit_code: 0 }
    }
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::Spectrum => cmd_spectrum(cfg),
        Command::Roots => cmd_roots(cfg),
        Command::Wavefunction => cmd_wavefunction(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Sweep => cmd_sweep(cfg),
    }
}

const MODE_COLUMNS: [&str; 8] = ["n", "l", "root_index", "branch", "xi_star", "delta", "omega", "energy"];

fn mode_cells(m: &QuantizedMode) -> Vec<Cell> {
    vec![
        m.n.into(),
        m.l.into(),
        m.root_index.into(),
        m.branch.symbol().into(),
        m.xi_star.into(),
        m.delta.into(),
        m.omega.into(),
        m.energy.into(),
    ]
}

pub fn cmd_spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.opts.landau_limit {
        return landau_spectrum(cfg);
    }
    if cfg.params.potential_strength == 0.0 {
        return Err(CliError::invalid(
            "theta = 0 has no truncation constraint; use --landau-limit with --omega",
        ));
    }
    let levels = cfg.levels();
    let solved = cfg.par_map(&levels, |&(n, l)| quantize::solve_level(&cfg.params, n, l));
    let mut table = Table::new(MODE_COLUMNS);
    table.meta = cfg.base_meta();
    for modes in solved {
        for m in modes? {
            table.push(mode_cells(&m));
        }
    }
    Ok(Outcome::ok(table))
}

fn landau_spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = &cfg.params;
    if p.potential_strength != 0.0 {
        return Err(CoreError::ThetaNotZero(p.potential_strength).into());
    }
    if cfg.opts.omega.is_none() {
        return Err(CliError::invalid("--landau-limit needs an explicit --omega"));
    }
    let nr = cfg.opts.nr.unwrap_or(IntRange::single(0));
    let mut table = Table::new(["nr", "l", "omega", "varpi", "energy"]);
    table.meta = cfg.base_meta();
    table.meta.push(("landau-limit".into(), "true".into()));
    table.meta.push(("omega".into(), cfg.omega.to_string()));
    let varpi = model::delta_from_omega(p, cfg.omega)? / p.mass;
    for n_r in nr.iter() {
        for l in cfg.l_range.iter() {
            let e = quantize::landau_limit(p, n_r as u32, l as i32, cfg.omega)?;
            table.push(vec![n_r.into(), l.into(), cfg.omega.into(), varpi.into(), e.into()]);
        }
    }
    Ok(Outcome::ok(table))
}

pub fn cmd_roots(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut columns = vec!["n", "l_abs", "degree", "roots"];
    if cfg.opts.dump_poly {
        columns.push("poly");
    }
    let mut table = Table::new(columns);
    table.meta = cfg.base_meta();
    table
        .meta
        .retain(|(k, _)| matches!(k.as_str(), "tool" | "command" | "n" | "l"));
    let pairs: Vec<(u32, u32)> = cfg
        .n_range
        .iter()
        .flat_map(|n| cfg.l_abs_values().into_iter().map(move |l| (n as u32, l)))
        .collect();
    let solved = cfg.par_map(&pairs, |&(n, l)| {
        let poly = quantize::constraint_polynomial(n, l)?;
        let roots = match quantize::solve_xi(n, l) {
            Ok(r) => r,
            Err(CoreError::NoPositiveRoot { .. }) => Vec::new(),
            Err(e) => return Err(e),
        };
        Ok::<_, CoreError>((poly, roots))
    });
    let mut missing = false;
    for ((n, l), res) in pairs.iter().zip(solved) {
        let (poly, roots) = res?;
        missing |= roots.is_empty();
        let mut row: Vec<Cell> = vec![(*n).into(), (*l).into(), poly.degree().into(), Cell::Floats(roots)];
        if cfg.opts.dump_poly {
            row.push(poly.to_string().into());
        }
        table.push(row);
    }
    let exit_code = if missing && cfg.opts.strict { 3 } else { 0 };
    Ok(Outcome { table, exit_code })
}

pub fn cmd_wavefunction(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = &cfg.params;
    let l = cfg.l_range.start as i32;
    let l_abs = l.unsigned_abs();
    let mut meta = cfg.base_meta();
    let (series, n_trunc, lambda) = if cfg.opts.landau_limit {
        if p.potential_strength != 0.0 {
            return Err(CoreError::ThetaNotZero(p.potential_strength).into());
        }
        let n_r = cfg.opts.nr.unwrap_or(IntRange::single(0)).start as u32;
        let lambda = f64::from(4 * n_r + 2 * l_abs + 2);
        meta.push(("nr".into(), n_r.to_string()));
        (
            heun::coefficients(l_abs, 0.0, lambda, 2 * n_r as usize),
            2 * n_r as usize,
            lambda,
        )
    } else {
        if p.potential_strength == 0.0 {
            return Err(CliError::invalid("theta = 0: use --landau-limit with --nr"));
        }
        let n = cfg.n_range.start as u32;
        let root_index = cfg.opts.root_index.unwrap_or(0);
        let modes = quantize::solve_level(p, n, l)?;
        let pair: Vec<&QuantizedMode> = modes.iter().filter(|m| m.root_index == root_index).collect();
        if pair.len() != 2 {
            return Err(CliError::invalid(format!(
                "root index {root_index} out of range: level has {} positive roots",
                modes.len() / 2
            )));
        }
        let (plus, minus) = (pair[0], pair[1]);
        for (k, v) in [
            ("root_index", root_index.to_string()),
            ("xi_star", plus.xi_star.to_string()),
            ("delta", plus.delta.to_string()),
            ("omega_plus", plus.omega.to_string()),
            ("energy_plus", plus.energy.to_string()),
            ("omega_minus", minus.omega.to_string()),
            ("energy_minus", minus.energy.to_string()),
        ] {
            meta.push((k.into(), v));
        }
        (plus.series(), n as usize, plus.scaled_eigenvalue())
    };
    let r_max = cfg.opts.r_max.unwrap_or_else(|| 10f64.max(lambda.sqrt() + 6.0));
    let count = cfg.opts.samples.unwrap_or(1001);
    let samples = RadialSamples::uniform(&series, n_trunc, r_max, count)?;
    let normalized = heun::normalize(&samples)?;
    meta.push(("r_max".into(), r_max.to_string()));
    meta.push(("samples".into(), count.to_string()));
    meta.push(("nodes".into(), heun::node_count(&samples).to_string()));
    let mut table = Table::new(["r", "F", "F_normalized"]);
    table.meta = meta;
    for ((r, f), g) in samples.grid.iter().zip(&samples.values).zip(&normalized.values) {
        table.push(vec![(*r).into(), (*f).into(), (*g).into()]);
    }
    Ok(Outcome::ok(table))
}

fn grid_for(cfg: &RunConfig, lambda: f64) -> Result<GridSpec, CliError> {
    let default = GridSpec::default_for(lambda);
    Ok(GridSpec::new(
        cfg.opts.r_max.unwrap_or(default.r_max),
        cfg.opts.n_points.unwrap_or(default.n_points),
    )?)
}

const VERIFY_COLUMNS: [&str; 16] = [
    "n",
    "l",
    "root_index",
    "branch",
    "xi_star",
    "xi_used",
    "omega",
    "lambda_analytic",
    "lambda_numeric",
    "eigenindex",
    "node_count",
    "abs_error",
    "richardson_error_estimate",
    "convergence_ratio",
    "tolerance",
    "passed",
];

fn report_cells(m: &QuantizedMode, r: &VerificationReport) -> Vec<Cell> {
    vec![
        m.n.into(),
        m.l.into(),
        m.root_index.into(),
        m.branch.symbol().into(),
        r.xi_star.into(),
        r.xi_used.into(),
        m.omega.into(),
        r.lambda_analytic.into(),
        r.lambda_numeric.into(),
        r.eigenindex.into(),
        r.node_count.into(),
        r.abs_error.into(),
        r.richardson_error_estimate.into(),
        r.convergence_ratio.into(),
        r.tolerance.into(),
        r.passed.into(),
    ]
}

/// A failed report for a coupling whose spectrum has no eigenvalue near Λ.
fn unmatched_report(
    m: &QuantizedMode,
    grid: &GridSpec,
    opts: &VerifyOptions,
    nearest: f64,
    index: usize,
) -> Result<VerificationReport, CoreError> {
    let target = m.scaled_eigenvalue();
    Ok(VerificationReport {
        n: m.n,
        l: m.l,
        root_index: m.root_index,
        xi_star: m.xi_star,
        xi_used: opts.xi_override.unwrap_or(m.xi_star),
        lambda_analytic: target,
        lambda_numeric: nearest,
        eigenindex: index,
        node_count: oracle::mode_node_count(m, grid.r_max, 2 * grid.n_points + 1)?,
        abs_error: (nearest - target).abs(),
        richardson_error_estimate: f64::NAN,
        convergence_ratio: f64::NAN,
        tolerance: opts.tolerance * target,
        passed: false,
    })
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.opts.oscillator {
        return verify_oscillator(cfg);
    }
    if cfg.params.potential_strength == 0.0 {
        return Err(CliError::invalid("theta = 0: use verify --oscillator"));
    }
    let opts = VerifyOptions {
        tolerance: cfg.opts.tolerance.unwrap_or(oracle::DEFAULT_TOLERANCE),
        xi_override: cfg.opts.xi_override,
    };
    let mut modes = Vec::new();
    for (n, l) in cfg.levels() {
        modes.extend(quantize::solve_level(&cfg.params, n, l)?);
    }
    // both branches of a root share one operator
    let roots: Vec<&QuantizedMode> = modes.iter().filter(|m| m.branch == quantize::Branch::Plus).collect();
    let reports = cfg.par_map(&roots, |m| {
        let grid = grid_for(cfg, m.scaled_eigenvalue())?;
        match oracle::verify_mode_with(m, &grid, &opts) {
            Ok(r) => Ok(r),
            Err(CoreError::NoMatchingEigenvalue { nearest, index, .. }) => {
                Ok(unmatched_report(m, &grid, &opts, nearest, index)?)
            }
            Err(e) => Err(CliError::from(e)),
        }
    });
    let mut table = Table::new(VERIFY_COLUMNS);
    table.meta = cfg.base_meta();
    table.meta.push(("tolerance".into(), opts.tolerance.to_string()));
    if let Some(x) = opts.xi_override {
        table.meta.push(("xi-override".into(), x.to_string()));
    }
    let mut all_passed = true;
    for (root, report) in roots.iter().zip(reports) {
        let report = report?;
        all_passed &= report.passed;
        for m in modes
            .iter()
            .filter(|m| m.n == root.n && m.l == root.l && m.root_index == root.root_index)
        {
            table.push(report_cells(m, &report));
        }
    }
    Ok(Outcome {
        table,
        exit_code: if all_passed { 0 } else { 4 },
    })
}

fn verify_oscillator(cfg: &RunConfig) -> Result<Outcome, CliError> {
    const COUNT: usize = 3;
    let tol = cfg.opts.tolerance.unwrap_or(oracle::DEFAULT_TOLERANCE);
    let ls = cfg.l_abs_values();
    let spectra = cfg.par_map(&ls, |&l| {
        let grid = grid_for(cfg, oracle::oscillator_exact(l, COUNT - 1))?;
        Ok::<_, CliError>(oracle::oscillator_spectrum(l, &grid, COUNT)?)
    });
    let mut table = Table::new(["l_abs", "k", "lambda_exact", "lambda_numeric", "abs_error", "passed"]);
    table.meta = vec![
        ("tool".into(), format!("mqr {}", env!("CARGO_PKG_VERSION"))),
        ("command".into(), "verify".into()),
        ("oscillator".into(), "true".into()),
        ("tolerance".into(), tol.to_string()),
    ];
    let mut all_passed = true;
    for (l, spectrum) in ls.iter().zip(spectra) {
        for (k, v) in spectrum?.into_iter().enumerate() {
            let exact = oracle::oscillator_exact(*l, k);
            let err = (v - exact).abs();
            let passed = err <= tol * exact;
            all_passed &= passed;
            table.push(vec![
                (*l).into(),
                k.into(),
                exact.into(),
                v.into(),
                err.into(),
                passed.into(),
            ]);
        }
    }
    Ok(Outcome {
        table,
        exit_code: if all_passed { 0 } else { 4 },
    })
}

fn parse_list(name: &str, s: &str) -> Result<Vec<f64>, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| CliError::invalid(format!("--{name}: bad value {t:?}: {e}")))
        })
        .collect::<Result<_, _>>()?;
    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
        return Err(CliError::invalid(format!(
            "--{name} must be a non-empty list of finite numbers"
        )));
    }
    Ok(v)
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let rotations = match &cfg.opts.rotation_list {
        Some(s) => parse_list("Omega-list", s)?,
        None => vec![cfg.params.rotation],
    };
    let thetas = match &cfg.opts.theta_list {
        Some(s) => parse_list("theta-list", s)?,
        None => vec![cfg.params.potential_strength],
    };
    let mut tasks = Vec::new();
    for &rot in &rotations {
        for &th in &thetas {
            for (n, l) in cfg.levels() {
                tasks.push((rot, th, n, l));
            }
        }
    }
    let results = cfg.par_map(&tasks, |&(rot, th, n, l)| {
        let p = cfg.params.with_rotation(rot).with_potential_strength(th);
        quantize::solve_level(&p, n, l)
    });
    let mut columns = vec!["Omega", "theta"];
    columns.extend(MODE_COLUMNS);
    if cfg.opts.keep_going {
        columns.push("error");
    }
    let mut table = Table::new(columns);
    table.meta = cfg.base_meta();
    table.meta.push(("Omega-list".into(), join(&rotations)));
    table.meta.push(("theta-list".into(), join(&thetas)));
    for (&(rot, th, n, l), res) in tasks.iter().zip(results) {
        match res {
            Ok(modes) => {
                for m in modes {
                    let mut row: Vec<Cell> = vec![rot.into(), th.into()];
                    row.extend(mode_cells(&m));
                    if cfg.opts.keep_going {
                        row.push(Cell::Null);
                    }
                    table.push(row);
                }
            }
            Err(e) if cfg.opts.keep_going => {
                let mut row: Vec<Cell> = vec![rot.into(), th.into(), n.into(), l.into()];
                row.extend(std::iter::repeat_n(Cell::Null, MODE_COLUMNS.len() - 2));
                row.push(e.to_string().into());
                table.push(row);
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(Outcome::ok(table))
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

pub fn render(table: &Table, format: Format, with_meta: bool) -> String {
    match format {
        Format::Csv => table.to_csv(with_meta),
        Format::Json => table.to_json(with_meta),
    }
}
