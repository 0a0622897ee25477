//! The `pxlap` command line: argument parsing and the five commands.

use std::fs;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::{load_config, ProblemConfig};
use crate::diagnostics::{assess_feasibility, assess_trace, residual_report, FeasibilityReport, FeasibilityVerdict};
use crate::energy::EnergyReport;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::minimizer::{solve_n, SolveStats};
use crate::oracle::{eval_u_infinity, limit_energy_exact, solve_flux_constant, solve_limit, Oracle1DSolution};
use crate::output::{check_csv, curve_csv, read_solution, sweep_csv, write_atomic, write_json, write_solution};
use crate::presets::{self, competitor, expand, Preset, PresetInput, TraceInput};
use crate::sweep::{lipschitz_excess, sweep, Regime, SweepRow};

/// Interface samples used by `check` on 2D problems.
const CHECK_INTERFACE_SAMPLES: usize = 200;

#[derive(Debug, Parser)]
#[command(name = "pxlap", version, about = "Truncated p(x)-Laplacian solver with an infinite exponent on D")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Minimize F_n for a single n.
    Solve(CommonArgs),
    /// Solve along the n-schedule and classify the limit.
    Sweep(CommonArgs),
    /// Closed-form one-dimensional limit (or a single n with --n).
    Oracle1d(CommonArgs),
    /// Residual and transmission diagnostics on a stored solution.
    Check(CommonArgs),
    /// Decide what the boundary datum says about the constraint set.
    Feasibility(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Expect {
    Nonempty,
    Empty,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Problem configuration file (JSON).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    /// Named scenario.
    #[arg(long)]
    pub preset: Option<String>,
    /// Preset parameter override, `key=value`; repeatable.
    #[arg(long = "param", value_parser = parse_param, requires = "preset")]
    pub params: Vec<(String, String)>,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Truncation level for `solve` and `oracle1d`.
    #[arg(long)]
    pub n: Option<f64>,
    /// Number of points of the `oracle1d` curve.
    #[arg(long, default_value_t = 1001)]
    pub resolution: usize,
    /// Exit with status 2 when `feasibility` certifies the opposite.
    #[arg(long, value_enum)]
    pub expect: Option<Expect>,
    /// Solution CSV for `check` (default OUT/solution.csv).
    #[arg(long)]
    pub solution: Option<PathBuf>,
}

fn parse_param(s: &str) -> std::result::Result<(String, String), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("{s:?} is not key=value"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

enum Input {
    Problem { config: ProblemConfig, preset: Option<Preset> },
    Trace(TraceInput),
}

fn read_input(args: &CommonArgs) -> Result<Input> {
    if let Some(path) = &args.config {
        return Ok(Input::Problem { config: load_config(path)?, preset: None });
    }
    let name =
        args.preset.as_deref().ok_or_else(|| Error::Config(vec!["either --config or --preset is required".into()]))?;
    let preset: Preset = name.parse()?;
    Ok(match expand(preset, &args.params)? {
        PresetInput::Problem(config) => Input::Problem { config, preset: Some(preset) },
        PresetInput::Trace(t) => Input::Trace(t),
    })
}

fn problem(input: Input, command: &str) -> Result<(ProblemConfig, Option<Preset>)> {
    match input {
        Input::Problem { config, preset } => Ok((config, preset)),
        Input::Trace(t) => Err(Error::Config(vec![format!(
            "{} is a feasibility-only trace and cannot be used with {command}",
            t.preset.name()
        )])),
    }
}

fn build_grid(config: &ProblemConfig) -> Result<Arc<Grid>> {
    Ok(Arc::new(Grid::build(&config.geometry()?, config.nodes_per_side)?))
}

/// Runs one command and returns the process exit status.
pub fn run(cli: Cli) -> Result<i32> {
    let (name, args) = match &cli.command {
        Command::Solve(a) => ("solve", a),
        Command::Sweep(a) => ("sweep", a),
        Command::Oracle1d(a) => ("oracle1d", a),
        Command::Check(a) => ("check", a),
        Command::Feasibility(a) => ("feasibility", a),
    };
    let input = read_input(args)?;
    fs::create_dir_all(&args.out)?;
    match cli.command {
        Command::Solve(_) => run_solve(problem(input, name)?.0, args),
        Command::Sweep(_) => run_sweep(problem(input, name)?, args),
        Command::Oracle1d(_) => run_oracle(problem(input, name)?.0, args),
        Command::Check(_) => run_check(problem(input, name)?.0, args),
        Command::Feasibility(_) => run_feasibility(input, args),
    }
}

#[derive(Serialize)]
struct SolveSummary {
    n: f64,
    nodes_per_side: usize,
    snap_distance: f64,
    stats: SolveStats,
    energy: EnergyReport,
    lipschitz_excess: Option<f64>,
}

fn run_solve(config: ProblemConfig, args: &CommonArgs) -> Result<i32> {
    let n = args.n.ok_or_else(|| Error::Config(vec!["solve requires --n".into()]))?;
    let grid = build_grid(&config)?;
    let truncated = config.exponent_field()?.truncate(n)?;
    let (u, stats) = solve_n(&grid, &truncated, &config.datum, None, &config.tolerances.solve_config())?;
    write_solution(&args.out.join("solution.csv"), &u)?;
    let summary = SolveSummary {
        n,
        nodes_per_side: config.nodes_per_side,
        snap_distance: grid.snap_distance(),
        stats,
        energy: stats.final_energy,
        lipschitz_excess: lipschitz_excess(&u).ok(),
    };
    write_json(&args.out.join("solve.json"), &summary)?;
    Ok(0)
}

#[derive(Serialize)]
struct SweepSummary<'a> {
    regime: Regime,
    blowup_root_estimate: Option<f64>,
    datum_range: f64,
    snap_distance: f64,
    lipschitz_excess: Option<f64>,
    feasibility: FeasibilityReport,
    rows: &'a [SweepRow],
}

fn run_sweep((config, preset): (ProblemConfig, Option<Preset>), args: &CommonArgs) -> Result<i32> {
    let grid = build_grid(&config)?;
    let exponent = config.exponent_field()?;
    let v = match preset {
        Some(p) => competitor(p, &config, &grid)?,
        None => None,
    };
    let (record, verdict) = sweep(
        &grid,
        &exponent,
        &config.datum,
        &config.schedule,
        &config.tolerances.solve_config(),
        &config.tolerances.sweep_tolerances(),
        v.as_ref(),
    )?;
    write_atomic(&args.out.join("sweep.csv"), &sweep_csv(&record.rows)?)?;
    let last = record.solutions.last().expect("schedule is non-empty");
    write_solution(&args.out.join("solution.csv"), last)?;
    let summary = SweepSummary {
        regime: verdict.regime,
        blowup_root_estimate: verdict.blowup_root_estimate,
        datum_range: record.datum_range,
        snap_distance: grid.snap_distance(),
        lipschitz_excess: lipschitz_excess(last).ok(),
        feasibility: assess_feasibility(&config.geometry()?, &config.datum)?,
        rows: &record.rows,
    };
    write_json(&args.out.join("verdict.json"), &summary)?;
    Ok(0)
}

#[derive(Serialize)]
struct OracleSummary {
    xi: f64,
    f1: f64,
    limit: Oracle1DSolution,
    limit_energy: f64,
    n: Option<f64>,
    log_c1: Option<f64>,
    k_n: Option<f64>,
}

fn run_oracle(config: ProblemConfig, args: &CommonArgs) -> Result<i32> {
    if args.resolution < 2 {
        return Err(Error::Config(vec!["--resolution must be at least 2".into()]));
    }
    let problem = presets::oracle_problem(&config)?;
    let limit = solve_limit(&problem)?;
    let xs: Vec<f64> = (0..args.resolution).map(|i| i as f64 / (args.resolution - 1) as f64).collect();
    let mut summary = OracleSummary {
        xi: problem.xi(),
        f1: problem.f1(),
        limit,
        limit_energy: limit_energy_exact(&limit, &problem),
        n: args.n,
        log_c1: None,
        k_n: None,
    };
    let us = match args.n {
        Some(n) => {
            let per_n = solve_flux_constant(&problem, n)?;
            summary.log_c1 = Some(per_n.log_c1);
            summary.k_n = Some(per_n.k_n);
            per_n.eval_sorted(&xs)?
        }
        None => xs.iter().map(|&x| eval_u_infinity(&limit, &problem, x)).collect::<Result<_>>()?,
    };
    let curve: Vec<(f64, f64)> = xs.into_iter().zip(us).collect();
    write_atomic(&args.out.join("oracle.csv"), &curve_csv(&curve)?)?;
    write_json(&args.out.join("oracle.json"), &summary)?;
    Ok(0)
}

fn run_check(config: ProblemConfig, args: &CommonArgs) -> Result<i32> {
    let grid = build_grid(&config)?;
    let path = args.solution.clone().unwrap_or_else(|| args.out.join("solution.csv"));
    let u = read_solution(&path, grid.clone())?;
    let report =
        residual_report(&u, &config.exponent_field()?, config.tolerances.transmission_band, CHECK_INTERFACE_SAMPLES)?;
    write_atomic(&args.out.join("check.csv"), &check_csv(&report.rows, grid.dim())?)?;
    write_json(&args.out.join("check.json"), &report)?;
    Ok(0)
}

fn run_feasibility(input: Input, args: &CommonArgs) -> Result<i32> {
    let report = match input {
        Input::Trace(t) => assess_trace(&t.points)?,
        Input::Problem { config, .. } => assess_feasibility(&config.geometry()?, &config.datum)?,
    };
    write_json(&args.out.join("feasibility.json"), &report)?;
    Ok(expect_status(args.expect, report.verdict))
}

fn expect_status(expect: Option<Expect>, verdict: FeasibilityVerdict) -> i32 {
    match (expect, verdict) {
        (Some(Expect::Nonempty), FeasibilityVerdict::EmptyGuaranteed)
        | (Some(Expect::Empty), FeasibilityVerdict::NonemptyGuaranteed) => 2,
        _ => 0,
    }
}

/// Prints an error with the module it came from.
pub fn report_error(e: &Error) {
    eprintln!("error [{}]: {e}", e.module());
}

/// Parses `argv` and runs it; used by the binary.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            report_error(&e);
            1
        }
    }
}
