//! Runs the pipeline over the requested systems, optionally in parallel, and
//! assembles the report.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use molp_core::model::{validate, MolpProblem};
use molp_core::oracle::{pareto_edges, pareto_extreme_set, VertexSet};
use molp_core::pipeline::{merge, solve_system, system_for, ParetoPoint, PipelineOptions, SystemReport, SystemStatus};
use molp_core::scaling::{compute_m, compute_mi, MiMode, Provenance, ScalingConstants, ScalingError};
use molp_core::Rational;

use crate::report::{diagnostic_text, point_echo, rationals, system_echo, OracleEcho, ParetoReport, ProblemEcho, ScalingEcho, Settings, SystemTiming, Timing};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub pipeline: PipelineOptions,
    /// 0-based system indices; all when `None`.
    pub systems: Option<Vec<usize>>,
    pub m_override: Option<i64>,
    pub mi_override: Option<Vec<i64>>,
    pub mi_mode: MiMode,
    pub jobs: usize,
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            pipeline: PipelineOptions::default(),
            systems: None,
            m_override: None,
            mi_override: None,
            mi_mode: MiMode::Enumerate,
            jobs: 1,
            timing: true,
        }
    }
}

/// `M` and `M_i` from the overrides or computed.
pub fn scaling_constants(problem: &MolpProblem, cfg: &RunConfig) -> Result<ScalingConstants, ScalingError> {
    let (m, m_prov) = match cfg.m_override {
        Some(v) => (v, Provenance::UserOverride),
        None => (compute_m(problem)?, Provenance::ComputedLcm),
    };
    let (mi, mi_prov) = match &cfg.mi_override {
        Some(v) => (v.clone(), vec![Provenance::UserOverride; v.len()]),
        None => {
            let mut mi = Vec::with_capacity(problem.m());
            // the enumerated constant does not depend on i
            let first = if problem.m() > 0 { Some(compute_mi(problem, 0, cfg.mi_mode)?) } else { None };
            for _ in 0..problem.m() {
                mi.push(first.unwrap_or(1));
            }
            let prov = match cfg.mi_mode {
                MiMode::Enumerate => Provenance::ComputedLcm,
                MiMode::Override(_) => Provenance::UserOverride,
                MiMode::Conservative { .. } => Provenance::ConservativeMultiple,
            };
            (mi, vec![prov; problem.m()])
        }
    };
    Ok(ScalingConstants { m, mi, m_provenance: m_prov, mi_provenance: mi_prov })
}

/// Runs each requested system on up to `jobs` threads; results in system order.
pub fn run_systems(problem: &MolpProblem, consts: &ScalingConstants, cfg: &RunConfig) -> Vec<SystemReport> {
    let systems: Vec<usize> = cfg.systems.clone().unwrap_or_else(|| (0..problem.m()).collect());
    let start = Instant::now();
    let clock = move || start.elapsed().as_secs_f64();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<SystemReport>>> = Mutex::new(vec![None; systems.len()]);
    let workers = cfg.jobs.clamp(1, systems.len().max(1));
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                if k >= systems.len() {
                    break;
                }
                let r = solve_system(problem, systems[k], consts, &cfg.pipeline, &clock);
                results.lock().expect("worker panicked")[k] = Some(r);
            });
        }
    });
    results.into_inner().expect("worker panicked").into_iter().map(|r| r.expect("every system ran")).collect()
}

pub fn oracle_echo(problem: &MolpProblem) -> (VertexSet, OracleEcho) {
    let xe = pareto_extreme_set(problem);
    let edges = pareto_edges(problem, &xe).into_iter().map(|(a, b)| [a, b]).collect();
    let echo = OracleEcho { x_e: xe.points.iter().map(|p| rationals(p)).collect(), edges };
    (xe, echo)
}

/// Points in `a` missing from `b`.
pub fn missing(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    a.iter().filter(|p| !b.contains(p)).cloned().collect()
}

pub struct RunOutcome {
    pub report: ParetoReport,
    /// Extreme points only; `report.points` also lists the non-extreme ones.
    pub points: Vec<ParetoPoint>,
    pub systems: Vec<SystemReport>,
    pub oracle: Option<VertexSet>,
}

pub fn run(problem: &MolpProblem, consts: &ScalingConstants, cfg: &RunConfig, with_oracle: bool) -> RunOutcome {
    let t0 = Instant::now();
    let systems_idx: Vec<usize> = cfg.systems.clone().unwrap_or_else(|| (0..problem.m()).collect());
    let reports = run_systems(problem, consts, cfg);
    let all_points = merge(&reports);
    let echoes = reports
        .iter()
        .map(|r| {
            let built = if r.catalog.is_empty() { Err(String::new()) } else { system_for(problem, r.system, consts, &cfg.pipeline) };
            let (names, ids) = match built {
                Ok(sys) => {
                    let mut all: Vec<(u32, String)> = sys.vars.iter().map(|v| (v.id, v.name.clone())).collect();
                    all.extend(sys.eliminated.iter().map(|(v, _)| (v.id, v.name.clone())));
                    all.sort();
                    (all.iter().map(|a| a.1.clone()).collect::<Vec<_>>(), all.iter().map(|a| a.0).collect::<Vec<_>>())
                }
                Err(_) => (Vec::new(), Vec::new()),
            };
            system_echo(r, &names, &ids)
        })
        .collect();
    let complete = reports.iter().all(|r| matches!(r.status, SystemStatus::Complete | SystemStatus::Empty));
    let points: Vec<ParetoPoint> = all_points.iter().filter(|p| p.extreme).cloned().collect();
    let x_e: Vec<Vec<Rational>> = points.iter().map(|p| p.x.clone()).collect();
    let (oracle, oracle_echo_v, agreement) = if with_oracle {
        let (xe, echo) = oracle_echo(problem);
        let agree = missing(&xe.points, &x_e).is_empty() && missing(&x_e, &xe.points).is_empty();
        (Some(xe), Some(echo), Some(agree))
    } else {
        (None, None, None)
    };
    let timing = cfg.timing.then(|| Timing {
        total_seconds: t0.elapsed().as_secs_f64(),
        systems: reports
            .iter()
            .map(|r| SystemTiming {
                system: r.system + 1,
                solve_seconds: r.attempts.iter().map(|a| a.seconds_solve).sum(),
                extract_seconds: r.attempts.iter().map(|a| a.seconds_extract).sum(),
            })
            .collect(),
    });
    let report = ParetoReport {
        problem: ProblemEcho::from(problem),
        diagnostics: validate(problem).iter().map(diagnostic_text).collect(),
        scaling: ScalingEcho::from(consts),
        settings: Settings::new(&cfg.pipeline, &systems_idx),
        systems: echoes,
        complete,
        x_e: x_e.iter().map(|p| rationals(p)).collect(),
        points: all_points.iter().map(point_echo).collect(),
        oracle: oracle_echo_v,
        agreement,
        timing,
    };
    RunOutcome { report, points, systems: reports, oracle }
}
