//! Pareto tests, the exact Pareto extreme set, edges, and weight certificates.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::exact::rank;
use crate::model::MolpProblem;
use crate::rational::{int, rat, Rational};

use super::lp::{simplex_solve, LpInstance, LpStatus};
use super::vertices::{enumerate_vertices, stacked_rows, tight_rows, VertexSet};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("point is not feasible")]
    NotFeasible,
    #[error("dimension mismatch")]
    Dimension,
}

/// Domination LP: `max sum e` s.t. `Cy + e = Cx`, `e >= 0`, `y` feasible.
/// `x` is Pareto-optimal iff the optimum is zero.
pub fn is_pareto(problem: &MolpProblem, x: &[Rational]) -> Result<bool, OracleError> {
    let (n, k) = (problem.n(), problem.k());
    if x.len() != n {
        return Err(OracleError::Dimension);
    }
    let (rows, rhs) = stacked_rows(problem);
    if tight_rows(&rows, &rhs, x).is_none() {
        return Err(OracleError::NotFeasible);
    }
    let mut objective = vec![Rational::zero(); n + k];
    for v in objective[n..].iter_mut() {
        *v = -Rational::one();
    }
    let g: Vec<Vec<Rational>> = problem
        .a
        .iter()
        .map(|row| row.iter().map(|&v| int(v)).chain(std::iter::repeat_n(Rational::zero(), k)).collect())
        .collect();
    let h: Vec<Rational> = problem.b.iter().map(|&v| int(v)).collect();
    let mut e = Vec::with_capacity(k);
    let mut f = Vec::with_capacity(k);
    for (l, crow) in problem.c.iter().enumerate() {
        let mut r: Vec<Rational> = crow.iter().map(|&v| int(v)).collect();
        r.resize(n + k, Rational::zero());
        r[n + l] = Rational::one();
        e.push(r);
        f.push(crow.iter().zip(x).map(|(&c, xj)| int(c) * xj).sum());
    }
    let mut upper: Vec<Option<Rational>> = problem.ub_primal.iter().map(|&u| Some(int(u))).collect();
    upper.resize(n + k, None);
    let lp = LpInstance::new(objective, g, h, upper).with_equalities(e, f);
    let s = simplex_solve(&lp);
    debug_assert_eq!(s.status, LpStatus::Optimal);
    Ok(s.value.is_some_and(|v| v.is_zero()))
}

/// The exact set of Pareto-optimal vertices, lexicographically sorted.
pub fn pareto_extreme_set(problem: &MolpProblem) -> VertexSet {
    let all = enumerate_vertices(problem);
    let mut out = VertexSet::default();
    for (p, a) in all.points.into_iter().zip(all.active_sets) {
        if is_pareto(problem, &p).unwrap_or(false) {
            out.points.push(p);
            out.active_sets.push(a);
        }
    }
    out
}

/// Pairs of Pareto vertices joined by a Pareto-optimal edge of the region.
pub fn pareto_edges(problem: &MolpProblem, xe: &VertexSet) -> Vec<(usize, usize)> {
    let n = problem.n();
    let (rows, _) = stacked_rows(problem);
    let half = rat(1, 2);
    let mut edges = Vec::new();
    for p in 0..xe.len() {
        for q in p + 1..xe.len() {
            let common: Vec<Vec<Rational>> = xe.active_sets[p]
                .iter()
                .filter(|i| xe.active_sets[q].contains(i))
                .map(|&i| rows[i].clone())
                .collect();
            if n > 1 && rank(&common) < n - 1 {
                continue;
            }
            let mid: Vec<Rational> = xe.points[p].iter().zip(&xe.points[q]).map(|(a, b)| (a + b) * &half).collect();
            if is_pareto(problem, &mid).unwrap_or(false) {
                edges.push((p, q));
            }
        }
    }
    edges
}

fn certificate_lp(problem: &MolpProblem, x: &[Rational], active: &[usize], objective: Vec<Rational>) -> LpInstance {
    let (n, m, k) = (problem.n(), problem.m(), problem.k());
    // variables: lambda (k), u (m)
    let mut g = Vec::new();
    let mut e = Vec::new();
    for j in 0..n {
        let mut row = Vec::with_capacity(k + m);
        row.extend(problem.c.iter().map(|c| int(c[j])));
        row.extend(problem.a.iter().map(|a| int(-a[j])));
        if x[j].is_positive() {
            e.push(row);
        } else {
            g.push(row);
        }
    }
    let mut f = vec![Rational::zero(); e.len()];
    let mut simplex_row = vec![Rational::one(); k];
    simplex_row.resize(k + m, Rational::zero());
    e.push(simplex_row);
    f.push(Rational::one());
    let h = vec![Rational::zero(); g.len()];
    let mut upper = vec![None; k];
    upper.extend((0..m).map(|s| if active.contains(&s) { None } else { Some(Rational::zero()) }));
    LpInstance::new(objective, g, h, upper).with_equalities(e, f)
}

fn split(problem: &MolpProblem, sol: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let k = problem.k();
    (sol[..k].to_vec(), sol[k..].to_vec())
}

fn active_or_recompute(problem: &MolpProblem, x: &[Rational], active: &[usize]) -> Option<Vec<usize>> {
    let (rows, rhs) = stacked_rows(problem);
    let tight = tight_rows(&rows, &rhs, x)?;
    Some(if active.is_empty() { tight } else { active.iter().copied().filter(|i| tight.contains(i)).collect() })
}

/// A weight `lambda` and dual `u` making `(x, u, lambda)` a valid triplet, as a
/// basic solution of the certificate polytope; `None` if `x` is not Pareto-optimal.
pub fn certify_weight(problem: &MolpProblem, x: &[Rational], active: &[usize]) -> Option<(Vec<Rational>, Vec<Rational>)> {
    if x.len() != problem.n() {
        return None;
    }
    let active = active_or_recompute(problem, x, active)?;
    let lp = certificate_lp(problem, x, &active, vec![Rational::zero(); problem.k() + problem.m()]);
    let s = simplex_solve(&lp);
    (s.status == LpStatus::Optimal).then(|| split(problem, &s.x))
}

/// Like [`certify_weight`] but maximizes `u_i`; returns a certificate with `u_i > 0`
/// when one exists, i.e. one that system `i` (0-based) can represent.
pub fn certify_weight_through(
    problem: &MolpProblem,
    x: &[Rational],
    active: &[usize],
    i: usize,
) -> Option<(Vec<Rational>, Vec<Rational>)> {
    if x.len() != problem.n() || i >= problem.m() {
        return None;
    }
    let active = active_or_recompute(problem, x, active)?;
    let mut obj = vec![Rational::zero(); problem.k() + problem.m()];
    obj[problem.k() + i] = -Rational::one();
    let s = simplex_solve(&certificate_lp(problem, x, &active, obj));
    if s.status != LpStatus::Optimal || !s.x[problem.k() + i].is_positive() {
        return None;
    }
    Some(split(problem, &s.x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{verify_sys1, ValidTriplet};

    fn example1() -> MolpProblem {
        MolpProblem::new(
            vec![vec![1, 0], vec![0, 1]],
            vec![vec![2, 1], vec![1, 1], vec![1, 2]],
            vec![4, 3, 4],
            vec![5, 5],
            vec![1, 1, 1],
        )
        .unwrap()
    }

    fn pt(a: i64, b: i64) -> Vec<Rational> {
        vec![int(a), int(b)]
    }

    #[test]
    fn pareto_points() {
        let p = example1();
        assert!(is_pareto(&p, &pt(1, 2)).unwrap());
        assert!(!is_pareto(&p, &pt(5, 0)).unwrap());
        assert!(!is_pareto(&p, &pt(5, 5)).unwrap());
        assert_eq!(is_pareto(&p, &pt(0, 0)), Err(OracleError::NotFeasible));
    }

    #[test]
    fn example1_front() {
        let p = example1();
        let xe = pareto_extreme_set(&p);
        assert_eq!(xe.points, vec![pt(0, 4), pt(1, 2), pt(2, 1), pt(4, 0)]);
        let edges = pareto_edges(&p, &xe);
        assert_eq!(edges, vec![(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn certificates() {
        let p = example1();
        for x in [pt(0, 4), pt(1, 2), pt(2, 1), pt(4, 0)] {
            let (lambda, u) = certify_weight(&p, &x, &[]).unwrap();
            assert!(verify_sys1(&p, &ValidTriplet { x: x.clone(), u, lambda }));
        }
        assert!(certify_weight(&p, &pt(5, 5), &[]).is_none());
        let (lambda, u) = certify_weight_through(&p, &pt(4, 0), &[], 2).unwrap();
        assert!(u[2].is_positive());
        assert!(verify_sys1(&p, &ValidTriplet { x: pt(4, 0), u, lambda }));
        assert!(certify_weight_through(&p, &pt(4, 0), &[], 0).is_none());
    }
}
