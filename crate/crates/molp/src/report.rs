//! JSON report of a pipeline run.

use molp_core::extract::Rejection;
use molp_core::model::{Diagnostic, MolpProblem};
use molp_core::pipeline::{ParetoPoint, PipelineOptions, SystemReport, SystemStatus};
use molp_core::poly::Variant;
use molp_core::rational::format_rational;
use molp_core::scaling::{Provenance, ScalingConstants};
use molp_core::Rational;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ProblemEcho {
    pub k: usize,
    pub m: usize,
    pub n: usize,
    #[serde(rename = "C")]
    pub c: Vec<Vec<i64>>,
    #[serde(rename = "A")]
    pub a: Vec<Vec<i64>>,
    pub b: Vec<i64>,
    pub ub_primal: Vec<i64>,
    pub ub_dual: Vec<i64>,
}

impl From<&MolpProblem> for ProblemEcho {
    fn from(p: &MolpProblem) -> Self {
        ProblemEcho {
            k: p.k(),
            m: p.m(),
            n: p.n(),
            c: p.c.clone(),
            a: p.a.clone(),
            b: p.b.clone(),
            ub_primal: p.ub_primal.clone(),
            ub_dual: p.ub_dual.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ScalingEcho {
    #[serde(rename = "M")]
    pub m: i64,
    pub m_provenance: String,
    #[serde(rename = "M_i")]
    pub mi: Vec<i64>,
    pub mi_provenance: Vec<String>,
}

fn provenance(p: Provenance) -> String {
    match p {
        Provenance::ComputedLcm => "computed-lcm",
        Provenance::UserOverride => "override",
        Provenance::ConservativeMultiple => "conservative",
    }
    .into()
}

impl From<&ScalingConstants> for ScalingEcho {
    fn from(c: &ScalingConstants) -> Self {
        ScalingEcho {
            m: c.m,
            m_provenance: provenance(c.m_provenance),
            mi: c.mi.clone(),
            mi_provenance: c.mi_provenance.iter().map(|&p| provenance(p)).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Settings {
    pub variant: String,
    pub systems: Vec<usize>,
    pub order: Option<u32>,
    pub extra_orders: u32,
    pub max_moments: usize,
    pub range_localizers: bool,
    pub extended_multipliers: bool,
    pub tol_eq: f64,
    pub tol_psd: f64,
    pub tol_mu: f64,
    pub max_iters: usize,
    pub tol_rank: f64,
    pub gap_factor: f64,
    pub tol_round: f64,
    pub flat_shift: u32,
    pub seed: u64,
}

impl Settings {
    pub fn new(opts: &PipelineOptions, systems: &[usize]) -> Self {
        Settings {
            variant: match opts.variant {
                Variant::FullU => "full-u",
                Variant::ReducedU => "reduced-u",
            }
            .into(),
            systems: systems.iter().map(|i| i + 1).collect(),
            order: opts.order,
            extra_orders: opts.extra_orders,
            max_moments: opts.max_moments,
            range_localizers: opts.relaxation.range_localizers,
            extended_multipliers: opts.relaxation.extended_multipliers,
            tol_eq: opts.solver.tol_eq,
            tol_psd: opts.solver.tol_psd,
            tol_mu: opts.solver.tol_mu,
            max_iters: opts.solver.max_iters,
            tol_rank: opts.extract.tol_rank,
            gap_factor: opts.extract.gap_factor,
            tol_round: opts.extract.tol_round,
            flat_shift: opts.extract.shift,
            seed: opts.extract.seed,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RejectionEcho {
    pub point: Vec<f64>,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OrderEcho {
    pub order: u32,
    pub moments: usize,
    pub psd_blocks: Vec<usize>,
    pub equalities: usize,
    pub solver_status: Option<String>,
    pub iterations: usize,
    pub eq_residual: Option<f64>,
    pub min_eig: Option<f64>,
    pub t: Option<f64>,
    /// Numerical rank of `M_0 .. M_N` (null where the gap test failed).
    pub ranks: Vec<Option<usize>>,
    /// Leading relative singular values of each `M_t`.
    pub spectra: Vec<Vec<f64>>,
    pub flat_order: Option<u32>,
    pub rank: Option<usize>,
    pub pivots: Vec<String>,
    pub numeric_points: Vec<Vec<f64>>,
    /// Verified integer points of the system, all variables including eliminated ones.
    pub verified: Vec<Vec<String>>,
    pub rejected: Vec<RejectionEcho>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SystemEcho {
    pub system: usize,
    pub status: String,
    pub catalog: Vec<String>,
    pub all_variables: Vec<String>,
    pub half_degree: u32,
    pub orders: Vec<OrderEcho>,
    pub x: Vec<Vec<String>>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CertificateEcho {
    pub system: usize,
    pub u: Vec<String>,
    pub lambda: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PointEcho {
    pub x: Vec<String>,
    pub systems: Vec<usize>,
    pub certificates: Vec<CertificateEcho>,
    pub extreme: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct OracleEcho {
    pub x_e: Vec<Vec<String>>,
    pub edges: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SystemTiming {
    pub system: usize,
    pub solve_seconds: f64,
    pub extract_seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Timing {
    pub total_seconds: f64,
    pub systems: Vec<SystemTiming>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ParetoReport {
    pub problem: ProblemEcho,
    pub diagnostics: Vec<String>,
    pub scaling: ScalingEcho,
    pub settings: Settings,
    pub systems: Vec<SystemEcho>,
    /// True when every requested system settled (complete or empty).
    pub complete: bool,
    pub x_e: Vec<Vec<String>>,
    /// Every verified Pareto point of the varieties, extreme or not.
    pub points: Vec<PointEcho>,
    pub oracle: Option<OracleEcho>,
    pub agreement: Option<bool>,
    pub timing: Option<Timing>,
}

pub fn rationals(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

pub fn status_name(s: SystemStatus) -> &'static str {
    match s {
        SystemStatus::Complete => "complete",
        SystemStatus::Empty => "empty",
        SystemStatus::TooLarge => "too-large",
        SystemStatus::Incomplete => "incomplete",
        SystemStatus::NumericalFailure => "numerical-failure",
    }
}

pub fn rejection_text(r: &Rejection) -> String {
    match r {
        Rejection::NonIntegral { var, value } => format!("non-integral {} = {}", var, value),
        Rejection::OutOfRange { var, value } => format!("{} = {} outside its range", var, value),
        Rejection::ConstraintViolation { label } => format!("violates {}", label),
    }
}

fn monomial_name(exps: &[u16], names: &[String]) -> String {
    let parts: Vec<String> = exps
        .iter()
        .zip(names)
        .filter(|(e, _)| **e > 0)
        .map(|(e, n)| if *e == 1 { n.clone() } else { format!("{}^{}", n, e) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

const SPECTRUM_LEN: usize = 12;

pub fn system_echo(r: &SystemReport, all_variables: &[String], all_ids: &[u32]) -> SystemEcho {
    let orders = r
        .attempts
        .iter()
        .map(|a| {
            let ex = a.extraction.as_ref();
            OrderEcho {
                order: a.order,
                moments: a.moments,
                psd_blocks: a.psd_blocks.clone(),
                equalities: a.equalities,
                solver_status: a.solver_status.map(|s| format!("{:?}", s)),
                iterations: a.iterations,
                eq_residual: a.eq_residual.is_finite().then_some(a.eq_residual),
                min_eig: a.min_eig.is_finite().then_some(a.min_eig),
                t: a.t.is_finite().then_some(a.t),
                ranks: ex.map(|e| e.profile.ranks.clone()).unwrap_or_default(),
                spectra: ex
                    .map(|e| {
                        e.profile
                            .spectra
                            .iter()
                            .map(|s| {
                                let top = s.first().copied().unwrap_or(1.0);
                                s.iter().take(SPECTRUM_LEN).map(|v| v / top).collect()
                            })
                            .collect()
                    })
                    .unwrap_or_default(),
                flat_order: ex.map(|e| e.order),
                rank: ex.map(|e| e.rank),
                pivots: ex.map(|e| e.pivots.iter().map(|p| monomial_name(p, &r.catalog)).collect()).unwrap_or_default(),
                numeric_points: ex.map(|e| e.numeric_points.clone()).unwrap_or_default(),
                verified: ex
                    .map(|e| {
                        e.verified
                            .iter()
                            .map(|p| all_ids.iter().map(|id| p.get(id).map(format_rational).unwrap_or_default()).collect())
                            .collect()
                    })
                    .unwrap_or_default(),
                rejected: ex
                    .map(|e| e.rejected.iter().map(|(p, why)| RejectionEcho { point: p.clone(), reason: rejection_text(why) }).collect())
                    .unwrap_or_default(),
                note: a.note.clone(),
            }
        })
        .collect();
    SystemEcho {
        system: r.system + 1,
        status: status_name(r.status).into(),
        catalog: r.catalog.clone(),
        all_variables: all_variables.to_vec(),
        half_degree: r.half_degree,
        orders,
        x: r.candidates.iter().map(|c| rationals(&c.x)).collect(),
        error: r.error.clone(),
    }
}

pub fn point_echo(p: &ParetoPoint) -> PointEcho {
    PointEcho {
        x: rationals(&p.x),
        systems: p.systems.iter().map(|s| s + 1).collect(),
        certificates: p
            .certificates
            .iter()
            .map(|(s, t)| CertificateEcho { system: s + 1, u: rationals(&t.u), lambda: rationals(&t.lambda) })
            .collect(),
        extreme: p.extreme,
    }
}

pub fn diagnostic_text(d: &Diagnostic) -> String {
    format!("{:?}: {}", d.severity, d.message)
}
