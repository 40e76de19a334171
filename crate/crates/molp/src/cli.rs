//! Command-line interface.
//!
//! Exit codes: 0 success or agreement, 1 mismatch, 2 input error, 3 numerical failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use molp_core::model::{has_errors, validate, MolpProblem};
use molp_core::moment::{assemble_relaxation, basis_size, RelaxationOptions};
use molp_core::pipeline::{estimate_size, system_for, PipelineOptions};
use molp_core::poly::Variant;
use molp_core::rational::format_rational;
use molp_core::scaling::{compute_m, compute_m_a_only, compute_mi, suggest_dual_bounds, MiMode};
use serde_json::json;

use crate::format::ProblemDocument;
use crate::report::{diagnostic_text, rationals};
use crate::run::{missing, oracle_echo, run, scaling_constants, RunConfig};
use crate::{plot, sdpa};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "molp", version, about = "Pareto extreme points of multiobjective LPs via moment relaxations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the relaxation pipeline and print the JSON report.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        opts: PipelineArgs,
        /// Also run the exact oracle and record agreement.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact vertex enumeration: Pareto extreme points and Pareto edges.
    Oracle {
        file: PathBuf,
        #[arg(long)]
        ubdual: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the pipeline and the oracle; exit 0 iff the point sets agree.
    Compare {
        file: PathBuf,
        #[command(flatten)]
        opts: PipelineArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scaling constants, suggested dual bounds and relaxation sizes.
    Bounds {
        file: PathBuf,
        #[arg(long)]
        ubdual: Option<String>,
        /// Largest factor folded into the conservative M_i.
        #[arg(long, default_value_t = 6)]
        factor_max: i64,
    },
    /// Write one relaxation in SDPA sparse format.
    ExportSdpa {
        file: PathBuf,
        /// 1-based constraint index.
        #[arg(long)]
        system: usize,
        #[command(flatten)]
        opts: PipelineArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV listings of Pareto points and segments (plus SVG when n = 2).
    Plot {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Source::Oracle)]
        source: Source,
        #[command(flatten)]
        opts: PipelineArgs,
        /// Output prefix: writes PREFIX_points.csv, PREFIX_edges.csv, PREFIX.svg.
        #[arg(long, default_value = "pareto")]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Source {
    Oracle,
    Pipeline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    FullU,
    ReducedU,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MiModeArg {
    Enumerate,
    Conservative,
}

#[derive(Args, Debug, Clone)]
pub struct PipelineArgs {
    /// Primal scaling constant M.
    #[arg(long = "M")]
    pub m: Option<i64>,
    /// Dual scaling constants M_i: one value for all systems or a comma list.
    #[arg(long = "Mi")]
    pub mi: Option<String>,
    /// Dual bounds ub^D: one value for all rows or a comma list (overrides the file).
    #[arg(long)]
    pub ubdual: Option<String>,
    /// 1-based systems to run, comma separated (default: all).
    #[arg(long)]
    pub systems: Option<String>,
    #[arg(long, value_enum, default_value_t = VariantArg::FullU)]
    pub variant: VariantArg,
    /// Fixed relaxation order N (default: search from the max half-degree).
    #[arg(long)]
    pub order: Option<u32>,
    #[arg(long, default_value_t = 3)]
    pub extra_orders: u32,
    #[arg(long, default_value_t = 6000)]
    pub max_moments: usize,
    /// Equality and PSD tolerance of the SDP solver.
    #[arg(long, default_value_t = 1e-8)]
    pub tol_sdp: f64,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol_rank: f64,
    #[arg(long, default_value_t = 1e3)]
    pub gap_factor: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tol_round: f64,
    /// Flatness test compares rank M_t with rank M_{t - shift}.
    #[arg(long, default_value_t = 1)]
    pub flat_shift: u32,
    /// Seed of the random combination used in extraction.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, value_enum, default_value_t = MiModeArg::Enumerate)]
    pub mi_mode: MiModeArg,
    #[arg(long, default_value_t = 6)]
    pub factor_max: i64,
    /// Only the localizers and equality multipliers implied by the system itself.
    #[arg(long)]
    pub plain_relaxation: bool,
    #[arg(long)]
    pub keep_lambda: bool,
    /// Leave wall-clock times out of the report.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

fn input_err(message: impl Into<String>) -> CliError {
    CliError { code: EXIT_INPUT, message: message.into() }
}

fn int_list(s: &str, what: &str) -> Result<Vec<i64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|_| input_err(format!("--{}: not an integer list: {}", what, s))))
        .collect()
}

fn expand(v: Vec<i64>, len: usize, what: &str) -> Result<Vec<i64>, CliError> {
    match v.len() {
        1 => Ok(vec![v[0]; len]),
        l if l == len => Ok(v),
        l => Err(input_err(format!("--{} has {} values, expected 1 or {}", what, l, len))),
    }
}

/// Reads and validates a problem file, applying a `--ubdual` override. Commands
/// that never use dual bounds pass `dual_optional`.
pub fn load_problem(path: &Path, ubdual: Option<&str>, dual_optional: bool) -> Result<MolpProblem, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| input_err(format!("{}: {}", path.display(), e)))?;
    let doc = ProblemDocument::parse(&text).map_err(|e| input_err(e.to_string()))?;
    let over = ubdual.map(|s| int_list(s, "ubdual")).transpose()?;
    let default = over.as_ref().map(|v| v[0]).or(dual_optional.then_some(1));
    let mut p = doc.to_problem(default).map_err(|e| input_err(e.to_string()))?;
    if let Some(v) = over {
        let v = expand(v, p.m(), "ubdual")?;
        if v.iter().any(|&x| x <= 0) {
            return Err(input_err("--ubdual values must be positive"));
        }
        p.ub_dual = v;
    }
    let diags = validate(&p);
    for d in &diags {
        eprintln!("{}", diagnostic_text(d));
    }
    if has_errors(&diags) {
        return Err(input_err("problem rejected by validation"));
    }
    Ok(p)
}

pub fn run_config(args: &PipelineArgs, problem: &MolpProblem) -> Result<RunConfig, CliError> {
    let m = problem.m();
    if m == 0 {
        return Err(input_err("the relaxation pipeline needs at least one constraint row"));
    }
    let systems = match &args.systems {
        Some(s) => {
            let v = int_list(s, "systems")?;
            if v.iter().any(|&i| i < 1 || i as usize > m) {
                return Err(input_err(format!("--systems must lie in 1..={}", m)));
            }
            let mut v: Vec<usize> = v.into_iter().map(|i| i as usize - 1).collect();
            v.sort_unstable();
            v.dedup();
            Some(v)
        }
        None => None,
    };
    let mi_override = args.mi.as_deref().map(|s| int_list(s, "Mi").and_then(|v| expand(v, m, "Mi"))).transpose()?;
    if mi_override.as_ref().is_some_and(|v| v.iter().any(|&x| x <= 0)) || args.m.is_some_and(|x| x <= 0) {
        return Err(input_err("scaling constants must be positive"));
    }
    let mut pipeline = PipelineOptions {
        variant: match args.variant {
            VariantArg::FullU => Variant::FullU,
            VariantArg::ReducedU => Variant::ReducedU,
        },
        eliminate_lambda: !args.keep_lambda,
        order: args.order,
        extra_orders: args.extra_orders,
        max_moments: args.max_moments,
        relaxation: if args.plain_relaxation { RelaxationOptions::plain() } else { RelaxationOptions::default() },
        ..PipelineOptions::default()
    };
    pipeline.solver.tol_eq = args.tol_sdp;
    pipeline.solver.tol_psd = args.tol_sdp;
    pipeline.solver.max_iters = args.max_iters;
    pipeline.extract.tol_rank = args.tol_rank;
    pipeline.extract.gap_factor = args.gap_factor;
    pipeline.extract.tol_round = args.tol_round;
    pipeline.extract.shift = args.flat_shift.max(1);
    pipeline.extract.seed = args.seed;
    Ok(RunConfig {
        pipeline,
        systems,
        m_override: args.m,
        mi_override,
        mi_mode: match args.mi_mode {
            MiModeArg::Enumerate => MiMode::Enumerate,
            MiModeArg::Conservative => MiMode::Conservative { factor_max: args.factor_max },
        },
        jobs: args.jobs.max(1),
        timing: !args.no_timing,
    })
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| input_err(format!("{}: {}", p.display(), e))),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn print_points(label: &str, pts: &[Vec<molp_core::Rational>]) {
    for p in pts {
        eprintln!("{} ({})", label, rationals(p).join(", "));
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Solve { file, opts, oracle, out } => {
            let problem = load_problem(&file, opts.ubdual.as_deref(), false)?;
            let cfg = run_config(&opts, &problem)?;
            let consts = scaling_constants(&problem, &cfg).map_err(|e| input_err(e.to_string()))?;
            let outcome = run(&problem, &consts, &cfg, oracle);
            emit(&to_json(&outcome.report), out.as_deref())?;
            for s in &outcome.report.systems {
                eprintln!("system {}: {}", s.system, s.status);
            }
            eprintln!("X_E = {{{}}}", outcome.report.x_e.iter().map(|p| format!("({})", p.join(", "))).collect::<Vec<_>>().join(", "));
            if outcome.report.agreement == Some(false) {
                return Ok(EXIT_MISMATCH);
            }
            Ok(if outcome.report.complete { EXIT_OK } else { EXIT_NUMERICAL })
        }
        Command::Compare { file, opts, out } => {
            let problem = load_problem(&file, opts.ubdual.as_deref(), false)?;
            let cfg = run_config(&opts, &problem)?;
            let consts = scaling_constants(&problem, &cfg).map_err(|e| input_err(e.to_string()))?;
            let outcome = run(&problem, &consts, &cfg, true);
            if let Some(p) = out.as_deref() {
                emit(&to_json(&outcome.report), Some(p))?;
            }
            let oracle = outcome.oracle.as_ref().map(|o| o.points.clone()).unwrap_or_default();
            let pipeline: Vec<_> = outcome.points.iter().map(|p| p.x.clone()).collect();
            let only_oracle = missing(&oracle, &pipeline);
            let only_pipeline = missing(&pipeline, &oracle);
            print_points("missing from pipeline:", &only_oracle);
            print_points("not in oracle set:", &only_pipeline);
            if outcome.report.agreement == Some(true) {
                println!("agreement: {} points", oracle.len());
                Ok(EXIT_OK)
            } else {
                println!("mismatch: {} missing, {} extra", only_oracle.len(), only_pipeline.len());
                Ok(EXIT_MISMATCH)
            }
        }
        Command::Oracle { file, ubdual, out } => {
            let problem = load_problem(&file, ubdual.as_deref(), true)?;
            let (_, echo) = oracle_echo(&problem);
            let diags: Vec<String> = validate(&problem).iter().map(diagnostic_text).collect();
            emit(&to_json(&json!({ "x_e": echo.x_e, "edges": echo.edges, "diagnostics": diags })), out.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::Bounds { file, ubdual, factor_max } => {
            let problem = load_problem(&file, ubdual.as_deref(), true)?;
            let show = |r: Result<i64, molp_core::scaling::ScalingError>| match r {
                Ok(v) => json!(v),
                Err(e) => json!({ "error": e.to_string() }),
            };
            let m = compute_m(&problem);
            let mi = if problem.m() > 0 { compute_mi(&problem, 0, MiMode::Enumerate) } else { Ok(1) };
            let mi_cons = if problem.m() > 0 { compute_mi(&problem, 0, MiMode::Conservative { factor_max }) } else { Ok(1) };
            let mut systems = Vec::new();
            if let (Ok(mv), Ok(miv)) = (&m, &mi) {
                let consts = molp_core::scaling::ScalingConstants::overridden(*mv, vec![*miv; problem.m()]);
                for i in 0..problem.m() {
                    let (nv, d) = estimate_size(&problem, i, &consts, &PipelineOptions::default());
                    systems.push(json!({
                        "system": i + 1,
                        "catalog": nv,
                        "half_degree": d,
                        "moments_at_half_degree": basis_size(nv, d.saturating_mul(2)),
                    }));
                }
            }
            let report = json!({
                "M": show(m),
                "M_from_A_only": show(compute_m_a_only(&problem)),
                "M_i": show(mi),
                "M_i_conservative": show(mi_cons),
                "ub_dual": problem.ub_dual,
                "suggested_ub_dual": suggest_dual_bounds(&problem),
                "systems": systems,
            });
            emit(&to_json(&report), None)?;
            Ok(EXIT_OK)
        }
        Command::ExportSdpa { file, system, opts, out } => {
            let problem = load_problem(&file, opts.ubdual.as_deref(), false)?;
            let cfg = run_config(&opts, &problem)?;
            if system < 1 || system > problem.m() {
                return Err(input_err(format!("--system must lie in 1..={}", problem.m())));
            }
            let consts = scaling_constants(&problem, &cfg).map_err(|e| input_err(e.to_string()))?;
            let sys = system_for(&problem, system - 1, &consts, &cfg.pipeline).map_err(input_err)?;
            let order = opts.order.unwrap_or_else(|| sys.max_half_degree());
            let rel = assemble_relaxation(&sys, order, &cfg.pipeline.relaxation).map_err(|e| input_err(e.to_string()))?;
            let names: Vec<String> = sys.vars.iter().map(|v| v.name.clone()).collect();
            let comment = format!(
                "moment relaxation of system {} at order {}\nvariables (graded lex): {}\nM = {}, M_i = {}\nlast block: equalities, each as a pair of diagonal entries",
                system,
                order,
                names.join(" "),
                consts.m,
                consts.mi[system - 1]
            );
            emit(&sdpa::write(&sdpa::from_relaxation(&rel, &comment)), out.as_deref())?;
            Ok(EXIT_OK)
        }
        Command::Plot { file, source, opts, out } => {
            let problem = load_problem(&file, opts.ubdual.as_deref(), source == Source::Oracle)?;
            let (xe, _) = oracle_echo(&problem);
            let points = match source {
                Source::Oracle => xe.points.clone(),
                Source::Pipeline => {
                    let cfg = run_config(&opts, &problem)?;
                    let consts = scaling_constants(&problem, &cfg).map_err(|e| input_err(e.to_string()))?;
                    let outcome = run(&problem, &consts, &cfg, false);
                    if !outcome.report.complete {
                        eprintln!("warning: pipeline incomplete, plotting the points found");
                    }
                    outcome.points.iter().map(|p| p.x.clone()).collect()
                }
            };
            let set = molp_core::oracle::VertexSet {
                active_sets: points.iter().map(|p| xe.points.iter().position(|q| q == p).map(|k| xe.active_sets[k].clone()).unwrap_or_default()).collect(),
                points: points.clone(),
            };
            let edges = molp_core::oracle::pareto_edges(&problem, &set);
            let prefix = out.to_string_lossy().to_string();
            let n = problem.n();
            emit(&plot::points_csv(&points, n), Some(Path::new(&format!("{}_points.csv", prefix))))?;
            emit(&plot::edges_csv(&points, &edges, n), Some(Path::new(&format!("{}_edges.csv", prefix))))?;
            if let Some(svg) = plot::svg(&problem, &points, &edges) {
                emit(&svg, Some(Path::new(&format!("{}.svg", prefix))))?;
            }
            println!("{} points, {} segments", points.len(), edges.len());
            for p in &points {
                println!("({})", p.iter().map(format_rational).collect::<Vec<_>>().join(", "));
            }
            Ok(EXIT_OK)
        }
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn argument_definitions_are_consistent() {
        Cli::command().debug_assert();
    }
}
