//! Per-system driver: build Sys-i, climb the relaxation hierarchy, extract and
//! verify, then merge the systems into the Pareto extreme set.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::extract::{extract, unscale_and_project, ExtractOptions, ExtractionResult, ParetoCandidate};
use crate::model::{MolpProblem, ValidTriplet};
use crate::moment::{assemble_relaxation, basis_size, RelaxationOptions};
use crate::poly::{build_sys_i, eliminate_lambda, PolySystem, Variant};
use crate::rational::Rational;
use crate::scaling::ScalingConstants;
use crate::sdp::{solve, SolveStatus, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    pub variant: Variant,
    pub eliminate_lambda: bool,
    /// Fixed relaxation order; otherwise the search starts at the max half-degree.
    pub order: Option<u32>,
    /// Orders tried above the starting one.
    pub extra_orders: u32,
    /// Relaxations with more moments than this are not assembled.
    pub max_moments: usize,
    pub relaxation: RelaxationOptions,
    pub solver: SolverOptions,
    pub extract: ExtractOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            variant: Variant::FullU,
            eliminate_lambda: true,
            order: None,
            extra_orders: 3,
            max_moments: 6000,
            relaxation: RelaxationOptions::default(),
            solver: SolverOptions::default(),
            extract: ExtractOptions::default(),
        }
    }
}

/// What happened at one relaxation order.
#[derive(Debug, Clone)]
pub struct OrderAttempt {
    pub order: u32,
    pub moments: usize,
    pub psd_blocks: Vec<usize>,
    pub equalities: usize,
    pub solver_status: Option<SolveStatus>,
    pub iterations: usize,
    pub eq_residual: f64,
    pub min_eig: f64,
    pub t: f64,
    pub extraction: Option<ExtractionResult>,
    /// Failure description when the order did not settle the system.
    pub note: Option<String>,
    pub seconds_solve: f64,
    pub seconds_extract: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemStatus {
    /// Flat extension found and every extracted point verified.
    Complete,
    /// The relaxation is infeasible, so Sys-i has no solution.
    Empty,
    /// The next order exceeds the size limit.
    TooLarge,
    /// Orders exhausted without a verified flat extension.
    Incomplete,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct SystemReport {
    pub system: usize,
    pub catalog: Vec<String>,
    pub half_degree: u32,
    pub attempts: Vec<OrderAttempt>,
    pub candidates: Vec<ParetoCandidate>,
    pub status: SystemStatus,
    pub error: Option<String>,
}

/// Builds the (optionally lambda-eliminated) system for constraint `i`.
pub fn system_for(problem: &MolpProblem, i: usize, consts: &ScalingConstants, opts: &PipelineOptions) -> Result<PolySystem, String> {
    let sys = build_sys_i(problem, i, consts, opts.variant).map_err(|e| e.to_string())?;
    if opts.eliminate_lambda {
        eliminate_lambda(&sys).map_err(|e| e.to_string())
    } else {
        Ok(sys)
    }
}

/// Catalog size and half-degree of system `i` from the grid lengths alone, so
/// oversized systems are refused before their grid polynomials are expanded.
pub fn estimate_size(problem: &MolpProblem, i: usize, consts: &ScalingConstants, opts: &PipelineOptions) -> (usize, u32) {
    let (n, m, k) = (problem.n(), problem.m(), problem.k());
    let big_m = consts.m as i128;
    let mi = consts.mi.get(i).copied().unwrap_or(1) as i128;
    let mut deg: i128 = 2;
    for &ub in &problem.ub_primal {
        deg = deg.max(ub as i128 * big_m + 1);
    }
    for (s, &ud) in problem.ub_dual.iter().enumerate() {
        if opts.variant == Variant::FullU || s != i {
            deg = deg.max(ud as i128 * mi + 1);
        }
    }
    deg = deg.max(mi + 1);
    let nu = if opts.variant == Variant::FullU { m } else { m.saturating_sub(1) };
    let nl = if opts.eliminate_lambda { k.saturating_sub(1) } else { k };
    let half = ((deg + 1) / 2).min(u32::MAX as i128) as u32;
    (n + nu + nl, half)
}

/// Runs the hierarchy for system `i`. `clock` returns seconds (any origin).
pub fn solve_system(
    problem: &MolpProblem,
    i: usize,
    consts: &ScalingConstants,
    opts: &PipelineOptions,
    clock: &dyn Fn() -> f64,
) -> SystemReport {
    let mut report = SystemReport {
        system: i,
        catalog: Vec::new(),
        half_degree: 0,
        attempts: Vec::new(),
        candidates: Vec::new(),
        status: SystemStatus::Incomplete,
        error: None,
    };
    let (nv, d_est) = estimate_size(problem, i, consts, opts);
    let first_order = opts.order.unwrap_or(d_est);
    let est = basis_size(nv, first_order.saturating_mul(2));
    if est > opts.max_moments {
        report.half_degree = d_est;
        report.attempts.push(OrderAttempt {
            order: first_order,
            moments: est,
            psd_blocks: Vec::new(),
            equalities: 0,
            solver_status: None,
            iterations: 0,
            eq_residual: f64::NAN,
            min_eig: f64::NAN,
            t: f64::NAN,
            extraction: None,
            note: Some(alloc::format!("relaxation needs {} moments, limit {}", est, opts.max_moments)),
            seconds_solve: 0.0,
            seconds_extract: 0.0,
        });
        report.status = SystemStatus::TooLarge;
        return report;
    }
    let sys = match system_for(problem, i, consts, opts) {
        Ok(s) => s,
        Err(e) => {
            report.error = Some(e);
            report.status = SystemStatus::NumericalFailure;
            return report;
        }
    };
    report.catalog = sys.vars.iter().map(|v| v.name.clone()).collect();
    let d = sys.max_half_degree();
    report.half_degree = d;
    let (first, last) = match opts.order {
        Some(n) => (n, n),
        None => (d, d + opts.extra_orders),
    };
    for n in first..=last {
        let moments = basis_size(sys.vars.len(), 2 * n);
        let mut att = OrderAttempt {
            order: n,
            moments,
            psd_blocks: Vec::new(),
            equalities: 0,
            solver_status: None,
            iterations: 0,
            eq_residual: f64::NAN,
            min_eig: f64::NAN,
            t: f64::NAN,
            extraction: None,
            note: None,
            seconds_solve: 0.0,
            seconds_extract: 0.0,
        };
        if moments > opts.max_moments {
            att.note = Some(alloc::format!("relaxation needs {} moments, limit {}", moments, opts.max_moments));
            report.attempts.push(att);
            report.status = SystemStatus::TooLarge;
            return report;
        }
        let rel = match assemble_relaxation(&sys, n, &opts.relaxation) {
            Ok(r) => r,
            Err(e) => {
                att.note = Some(e.to_string());
                report.attempts.push(att);
                continue;
            }
        };
        att.psd_blocks = rel.blocks.iter().map(|b| b.map.size).collect();
        att.equalities = rel.equalities.len();
        let t0 = clock();
        let sol = solve(&rel, &opts.solver);
        att.seconds_solve = clock() - t0;
        att.solver_status = Some(sol.status);
        att.iterations = sol.iterations;
        att.eq_residual = sol.eq_residual;
        att.min_eig = sol.min_eig;
        att.t = sol.t;
        match sol.status {
            SolveStatus::Infeasible => {
                report.attempts.push(att);
                report.status = SystemStatus::Empty;
                return report;
            }
            SolveStatus::Solved => {}
            other => {
                att.note = Some(alloc::format!("solver stopped with {:?}", other));
                report.attempts.push(att);
                report.status = SystemStatus::NumericalFailure;
                continue;
            }
        }
        let t1 = clock();
        let ex = extract(&rel, &sol.y_scaled, &sys, &opts.extract);
        att.seconds_extract = clock() - t1;
        match ex {
            Ok(ex) => {
                let clean = ex.rejected.is_empty() && ex.verified.len() == ex.rank;
                let cands = unscale_and_project(&ex.verified, &sys, problem);
                att.extraction = Some(ex);
                match cands {
                    Ok(c) if clean => {
                        report.candidates = c;
                        report.attempts.push(att);
                        report.status = SystemStatus::Complete;
                        return report;
                    }
                    Ok(c) => {
                        // keep sound partial results in case no later order settles
                        report.candidates = c;
                        att.note = Some("extracted points rejected by exact verification".into());
                    }
                    Err(e) => {
                        att.note = Some(e.to_string());
                        report.error = Some(e.to_string());
                    }
                }
            }
            Err(e) => att.note = Some(e.to_string()),
        }
        report.status = SystemStatus::Incomplete;
        report.attempts.push(att);
    }
    report
}

/// A merged Pareto extreme point with the systems that produced it and their
/// certificates, in system order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParetoPoint {
    pub x: Vec<Rational>,
    pub systems: Vec<usize>,
    pub certificates: Vec<(usize, ValidTriplet)>,
    pub extreme: bool,
}

/// Deterministic union of the per-system candidates, sorted by `x`. Non-extreme
/// points are kept and flagged; callers build X_E from the extreme ones.
pub fn merge(reports: &[SystemReport]) -> Vec<ParetoPoint> {
    let mut out: Vec<ParetoPoint> = Vec::new();
    for r in reports {
        for c in &r.candidates {
            let certs = c.certificates.iter().map(|t| (c.system, t.clone()));
            match out.iter_mut().find(|p| p.x == c.x) {
                Some(p) => {
                    if !p.systems.contains(&c.system) {
                        p.systems.push(c.system);
                    }
                    p.certificates.extend(certs);
                }
                None => out.push(ParetoPoint { x: c.x.clone(), systems: alloc::vec![c.system], certificates: certs.collect(), extreme: c.extreme }),
            }
        }
    }
    for p in &mut out {
        p.systems.sort_unstable();
        p.certificates.sort_by_key(|a| a.0);
    }
    out.sort_by(|a, b| a.x.cmp(&b.x));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn example1() -> MolpProblem {
        MolpProblem::new(vec![vec![1, 0], vec![0, 1]], vec![vec![2, 1], vec![1, 1], vec![1, 2]], vec![4, 3, 4], vec![5, 5], vec![1, 1, 1]).unwrap()
    }

    #[test]
    fn size_estimate_matches_built_system() {
        let p = example1();
        for (m, mi) in [(1, 6), (6, 6), (2, 3)] {
            let consts = ScalingConstants::overridden(m, vec![mi; 3]);
            for variant in [Variant::FullU, Variant::ReducedU] {
                for eliminate_lambda in [true, false] {
                    let opts = PipelineOptions { variant, eliminate_lambda, ..PipelineOptions::default() };
                    for i in 0..3 {
                        let sys = system_for(&p, i, &consts, &opts).unwrap();
                        assert_eq!(estimate_size(&p, i, &consts, &opts), (sys.vars.len(), sys.max_half_degree()));
                    }
                }
            }
        }
    }

    #[test]
    fn oversized_system_is_refused_quickly() {
        let p = example1();
        let consts = ScalingConstants::overridden(1_000_000, vec![1_000_000; 3]);
        let r = solve_system(&p, 0, &consts, &PipelineOptions::default(), &|| 0.0);
        assert_eq!(r.status, SystemStatus::TooLarge);
        assert!(r.catalog.is_empty());
    }

    #[test]
    fn merge_keeps_non_extreme_points_flagged() {
        let t = |x: i64| ValidTriplet { x: vec![Rational::from_integer(x.into())], u: vec![], lambda: vec![] };
        let cand = |x: i64, system: usize, extreme: bool| ParetoCandidate { x: t(x).x, certificates: vec![t(x)], system, extreme };
        let rep = |system: usize, candidates: Vec<ParetoCandidate>| SystemReport {
            system,
            catalog: vec![],
            half_degree: 1,
            attempts: vec![],
            candidates,
            status: SystemStatus::Complete,
            error: None,
        };
        let merged = merge(&[rep(1, vec![cand(2, 1, true), cand(1, 1, false)]), rep(0, vec![cand(2, 0, true)])]);
        assert_eq!(merged.len(), 2);
        assert!(!merged[0].extreme);
        assert_eq!(merged[1].systems, vec![0, 1]);
        assert_eq!(merged[1].certificates.iter().map(|c| c.0).collect::<Vec<_>>(), vec![0, 1]);
    }
}
