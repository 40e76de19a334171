//! Problem representation: `min Cx` subject to `Ax >= b`, `0 <= x <= ub_primal`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::oracle::lp::{simplex_solve, LpInstance, LpStatus};
use crate::rational::{int, lcm_denominators, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid value: {0}")]
    Value(String),
}

/// A multiobjective linear program with integer data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MolpProblem {
    /// Objective rows, `k x n`.
    pub c: Vec<Vec<i64>>,
    /// Constraint rows, `m x n`.
    pub a: Vec<Vec<i64>>,
    pub b: Vec<i64>,
    pub ub_primal: Vec<i64>,
    pub ub_dual: Vec<i64>,
    pub names: Option<Vec<String>>,
}

impl MolpProblem {
    pub fn new(
        c: Vec<Vec<i64>>,
        a: Vec<Vec<i64>>,
        b: Vec<i64>,
        ub_primal: Vec<i64>,
        ub_dual: Vec<i64>,
    ) -> Result<Self, ModelError> {
        let p = MolpProblem { c, a, b, ub_primal, ub_dual, names: None };
        p.check_shape()?;
        Ok(p)
    }

    /// Builds a problem from rational rows, clearing each row (with its right-hand side)
    /// by the lcm of its denominators.
    pub fn from_rational(
        c: Vec<Vec<Rational>>,
        a: Vec<Vec<Rational>>,
        b: Vec<Rational>,
        ub_primal: Vec<i64>,
        ub_dual: Vec<i64>,
    ) -> Result<Self, ModelError> {
        if a.len() != b.len() {
            return Err(ModelError::Dimension(format!(
                "A has {} rows but b has {} entries",
                a.len(),
                b.len()
            )));
        }
        let mut ci = Vec::with_capacity(c.len());
        for row in &c {
            let l = Rational::from_integer(lcm_denominators(row.iter()));
            ci.push(to_i64_row(row.iter().map(|v| v * &l))?);
        }
        let mut ai = Vec::with_capacity(a.len());
        let mut bi = Vec::with_capacity(b.len());
        for (row, rhs) in a.iter().zip(&b) {
            let l = Rational::from_integer(lcm_denominators(row.iter().chain(core::iter::once(rhs))));
            ai.push(to_i64_row(row.iter().map(|v| v * &l))?);
            bi.push(to_i64(&(rhs * &l))?);
        }
        MolpProblem::new(ci, ai, bi, ub_primal, ub_dual)
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self, ModelError> {
        if names.len() != self.n() {
            return Err(ModelError::Dimension(format!(
                "{} names for {} variables",
                names.len(),
                self.n()
            )));
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn k(&self) -> usize {
        self.c.len()
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn n(&self) -> usize {
        self.ub_primal.len()
    }

    fn check_shape(&self) -> Result<(), ModelError> {
        let n = self.ub_primal.len();
        if n == 0 {
            return Err(ModelError::Dimension("n must be at least 1".into()));
        }
        if self.c.is_empty() {
            return Err(ModelError::Dimension("k must be at least 1".into()));
        }
        for (l, row) in self.c.iter().enumerate() {
            if row.len() != n {
                return Err(ModelError::Dimension(format!(
                    "C row {} has {} columns, expected {}",
                    l + 1,
                    row.len(),
                    n
                )));
            }
        }
        for (s, row) in self.a.iter().enumerate() {
            if row.len() != n {
                return Err(ModelError::Dimension(format!(
                    "A row {} has {} columns, expected {}",
                    s + 1,
                    row.len(),
                    n
                )));
            }
        }
        if self.b.len() != self.a.len() {
            return Err(ModelError::Dimension(format!(
                "A has {} rows but b has {} entries",
                self.a.len(),
                self.b.len()
            )));
        }
        if self.ub_dual.len() != self.a.len() {
            return Err(ModelError::Dimension(format!(
                "ub_dual has {} entries, expected {}",
                self.ub_dual.len(),
                self.a.len()
            )));
        }
        if let Some(j) = self.ub_primal.iter().position(|&v| v <= 0) {
            return Err(ModelError::Value(format!("ub_primal[{}] must be positive", j + 1)));
        }
        if let Some(s) = self.ub_dual.iter().position(|&v| v <= 0) {
            return Err(ModelError::Value(format!("ub_dual[{}] must be positive", s + 1)));
        }
        Ok(())
    }
}

fn to_i64(v: &Rational) -> Result<i64, ModelError> {
    debug_assert!(v.is_integer());
    v.to_integer()
        .to_i64()
        .ok_or_else(|| ModelError::Value(format!("entry {} does not fit in 64 bits", v)))
}

fn to_i64_row(vals: impl Iterator<Item = Rational>) -> Result<Vec<i64>, ModelError> {
    vals.map(|v| to_i64(&v)).collect()
}

/// A candidate `(x, u, lambda)` for the complementarity system of the weighted problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidTriplet {
    pub x: Vec<Rational>,
    pub u: Vec<Rational>,
    pub lambda: Vec<Rational>,
}

/// `sum_l lambda_l c^l`.
pub fn weighted_objective(c: &[Vec<i64>], lambda: &[Rational]) -> Result<Vec<Rational>, ModelError> {
    if c.len() != lambda.len() {
        return Err(ModelError::Dimension(format!(
            "{} weights for {} objectives",
            lambda.len(),
            c.len()
        )));
    }
    let n = c.first().map_or(0, |r| r.len());
    let mut w = alloc::vec![Rational::zero(); n];
    for (row, l) in c.iter().zip(lambda) {
        if row.len() != n {
            return Err(ModelError::Dimension("ragged objective matrix".into()));
        }
        for (wj, &cj) in w.iter_mut().zip(row) {
            *wj += l * int(cj);
        }
    }
    Ok(w)
}

/// Reduced costs `sum_l lambda_l c^l - u^t A`.
pub fn reduced_costs(problem: &MolpProblem, u: &[Rational], lambda: &[Rational]) -> Option<Vec<Rational>> {
    let mut w = weighted_objective(&problem.c, lambda).ok()?;
    for (row, us) in problem.a.iter().zip(u) {
        for (wj, &asj) in w.iter_mut().zip(row) {
            *wj -= us * int(asj);
        }
    }
    Some(w)
}

/// Row activities `Ax`.
pub fn activities(problem: &MolpProblem, x: &[Rational]) -> Vec<Rational> {
    problem
        .a
        .iter()
        .map(|row| row.iter().zip(x).fold(Rational::zero(), |acc, (&a, xj)| acc + int(a) * xj))
        .collect()
}

/// Exact check of the complementarity system for the weighted LP pair.
pub fn verify_sys1(problem: &MolpProblem, t: &ValidTriplet) -> bool {
    if t.x.len() != problem.n() || t.u.len() != problem.m() || t.lambda.len() != problem.k() {
        return false;
    }
    if t.lambda.iter().any(|l| l.is_negative()) || t.lambda.iter().sum::<Rational>() != Rational::one() {
        return false;
    }
    if t.u.iter().any(|v| v.is_negative()) || t.x.iter().any(|v| v.is_negative()) {
        return false;
    }
    let ax = activities(problem, &t.x);
    let slack: Vec<Rational> = ax.iter().zip(&problem.b).map(|(v, &bs)| v - int(bs)).collect();
    if slack.iter().any(|s| s.is_negative()) {
        return false;
    }
    let Some(w) = reduced_costs(problem, &t.u, &t.lambda) else {
        return false;
    };
    if w.iter().any(|v| v.is_negative()) {
        return false;
    }
    let cs_primal: Rational = t.u.iter().zip(&slack).map(|(a, b)| a * b).sum();
    let cs_dual: Rational = w.iter().zip(&t.x).map(|(a, b)| a * b).sum();
    cs_primal.is_zero() && cs_dual.is_zero()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Info,
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticKind {
    Infeasible,
    UnboundedWithoutBox,
    BoxNotRedundant { var: usize },
    RedundantRow { row: usize },
    ZeroObjective,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: DiagnosticKind,
    pub message: String,
}

impl Diagnostic {
    fn new(severity: Severity, kind: DiagnosticKind, message: String) -> Self {
        Diagnostic { severity, kind, message }
    }
}

fn region_lp(problem: &MolpProblem, objective: Vec<Rational>, skip_row: Option<usize>, boxed: bool) -> LpInstance {
    let mut g = Vec::new();
    let mut h = Vec::new();
    for (s, (row, &bs)) in problem.a.iter().zip(&problem.b).enumerate() {
        if Some(s) == skip_row {
            continue;
        }
        g.push(row.iter().map(|&v| int(v)).collect());
        h.push(int(bs));
    }
    let upper = if boxed {
        problem.ub_primal.iter().map(|&u| Some(int(u))).collect()
    } else {
        alloc::vec![None; problem.n()]
    };
    LpInstance::new(objective, g, h, upper)
}

/// Checks the modelling assumptions; never fails, only reports.
pub fn validate(problem: &MolpProblem) -> Vec<Diagnostic> {
    let n = problem.n();
    let mut out = Vec::new();
    let zero = alloc::vec![Rational::zero(); n];
    let feas = simplex_solve(&region_lp(problem, zero, None, true));
    if feas.status == LpStatus::Infeasible {
        out.push(Diagnostic::new(
            Severity::Error,
            DiagnosticKind::Infeasible,
            "feasible region {Ax >= b, 0 <= x <= ub_primal} is empty".into(),
        ));
        return out;
    }
    if problem.c.iter().all(|r| r.iter().all(|&v| v == 0)) {
        out.push(Diagnostic::new(
            Severity::Warning,
            DiagnosticKind::ZeroObjective,
            "objective matrix is zero: every feasible point is Pareto-optimal".into(),
        ));
    }
    let mut unbounded = false;
    let mut maxima = Vec::with_capacity(n);
    for j in 0..n {
        let mut obj = alloc::vec![Rational::zero(); n];
        obj[j] = -Rational::one();
        let r = simplex_solve(&region_lp(problem, obj, None, false));
        match r.status {
            LpStatus::Unbounded => unbounded = true,
            LpStatus::Optimal => maxima.push(r.x[j].clone()),
            LpStatus::Infeasible => {}
        }
    }
    if unbounded {
        out.push(Diagnostic::new(
            Severity::Info,
            DiagnosticKind::UnboundedWithoutBox,
            "region {Ax >= b, x >= 0} is unbounded; the box rows close it".into(),
        ));
    } else {
        for (j, mx) in maxima.iter().enumerate() {
            if mx > &int(problem.ub_primal[j]) {
                out.push(Diagnostic::new(
                    Severity::Warning,
                    DiagnosticKind::BoxNotRedundant { var: j },
                    format!(
                        "ub_primal[{}] = {} cuts the region (max x_{} = {})",
                        j + 1,
                        problem.ub_primal[j],
                        j + 1,
                        mx
                    ),
                ));
            }
        }
    }
    for s in 0..problem.m() {
        let obj = problem.a[s].iter().map(|&v| int(v)).collect();
        let r = simplex_solve(&region_lp(problem, obj, Some(s), true));
        if r.status == LpStatus::Optimal && r.value.as_ref().is_some_and(|v| v >= &int(problem.b[s])) {
            out.push(Diagnostic::new(
                Severity::Warning,
                DiagnosticKind::RedundantRow { row: s },
                format!("constraint row {} is redundant", s + 1),
            ));
        }
    }
    out
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use alloc::vec;

    pub(crate) fn example1() -> MolpProblem {
        MolpProblem::new(
            vec![vec![1, 0], vec![0, 1]],
            vec![vec![2, 1], vec![1, 1], vec![1, 2]],
            vec![4, 3, 4],
            vec![5, 5],
            vec![1, 1, 1],
        )
        .unwrap()
    }

    #[test]
    fn clears_rational_rows() {
        let p = MolpProblem::from_rational(
            vec![vec![int(1), int(0)]],
            vec![vec![rat(1, 2), rat(1, 3)]],
            vec![rat(1, 6)],
            vec![5, 5],
            vec![1],
        )
        .unwrap();
        assert_eq!(p.a, vec![vec![3, 2]]);
        assert_eq!(p.b, vec![1]);
    }

    #[test]
    fn weighted_objective_examples() {
        let id = vec![vec![1, 0], vec![0, 1]];
        assert_eq!(weighted_objective(&id, &[int(4), int(2)]).unwrap(), vec![int(4), int(2)]);
        assert_eq!(weighted_objective(&id, &[int(1), int(0)]).unwrap(), vec![int(1), int(0)]);
        let c = vec![vec![2, 1], vec![0, 3]];
        assert_eq!(
            weighted_objective(&c, &[rat(1, 2), rat(1, 2)]).unwrap(),
            vec![int(1), int(2)]
        );
        assert!(weighted_objective(&c, &[int(1)]).is_err());
    }

    #[test]
    fn sys1_examples() {
        let p = example1();
        let good = ValidTriplet {
            x: vec![int(1), int(2)],
            u: vec![rat(1, 3), int(0), int(0)],
            lambda: vec![rat(2, 3), rat(1, 3)],
        };
        assert!(verify_sys1(&p, &good));
        let bad = ValidTriplet { x: vec![int(5), int(0)], ..good.clone() };
        assert!(!verify_sys1(&p, &bad));
        let zero_u = ValidTriplet { u: vec![int(0); 3], ..good };
        assert!(!verify_sys1(&p, &zero_u));
    }

    #[test]
    fn validate_examples() {
        let d = validate(&example1());
        assert!(!has_errors(&d));
        assert!(d.iter().all(|d| d.severity != Severity::Warning));

        let single = MolpProblem::new(vec![vec![1, 0], vec![0, 1]], vec![vec![1, 0]], vec![1], vec![5, 5], vec![1])
            .unwrap();
        assert!(validate(&single).iter().all(|d| d.severity == Severity::Info));

        let mut infeasible = example1();
        infeasible.b = vec![10, 3, 4];
        infeasible.ub_primal = vec![1, 1];
        let d = validate(&infeasible);
        assert!(d.iter().any(|d| d.kind == DiagnosticKind::Infeasible));
    }

    #[test]
    fn shape_errors() {
        let r = MolpProblem::new(vec![vec![1, 0]], vec![vec![1, 1, 1]], vec![1], vec![5, 5], vec![1]);
        assert!(matches!(r, Err(ModelError::Dimension(_))));
    }
}
