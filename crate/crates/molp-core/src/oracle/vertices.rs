//! Vertex enumeration by exhaustive basis enumeration.

use alloc::vec::Vec;

use num_traits::{One, Zero};

use crate::exact::{rank, solve_square};
use crate::model::MolpProblem;
use crate::rational::{int, Rational};

use super::for_each_combination;

/// Vertices of `{Ax >= b, 0 <= x <= ub_primal}` with their tight rows.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VertexSet {
    pub points: Vec<Vec<Rational>>,
    /// Indices into [`stacked_rows`] that are tight at each point.
    pub active_sets: Vec<Vec<usize>>,
}

impl VertexSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.points.iter().any(|p| p.as_slice() == x)
    }
}

/// All region rows as `row . x >= rhs`: the `m` rows of `A`, then `-x_j >= -ub_j`,
/// then `x_j >= 0`.
pub fn stacked_rows(problem: &MolpProblem) -> (Vec<Vec<Rational>>, Vec<Rational>) {
    let n = problem.n();
    let mut rows = Vec::with_capacity(problem.m() + 2 * n);
    let mut rhs = Vec::with_capacity(problem.m() + 2 * n);
    for (row, &bs) in problem.a.iter().zip(&problem.b) {
        rows.push(row.iter().map(|&v| int(v)).collect());
        rhs.push(int(bs));
    }
    for j in 0..n {
        let mut r = alloc::vec![Rational::zero(); n];
        r[j] = -Rational::one();
        rows.push(r);
        rhs.push(int(-problem.ub_primal[j]));
    }
    for j in 0..n {
        let mut r = alloc::vec![Rational::zero(); n];
        r[j] = Rational::one();
        rows.push(r);
        rhs.push(Rational::zero());
    }
    (rows, rhs)
}

pub(crate) fn tight_rows(rows: &[Vec<Rational>], rhs: &[Rational], x: &[Rational]) -> Option<Vec<usize>> {
    let mut tight = Vec::new();
    for (i, (row, r)) in rows.iter().zip(rhs).enumerate() {
        let v: Rational = row.iter().zip(x).map(|(a, b)| a * b).sum();
        if v < *r {
            return None;
        }
        if v == *r {
            tight.push(i);
        }
    }
    Some(tight)
}

/// Exact extreme-point test: `x` is feasible and its active rows have rank `n`.
pub fn is_vertex(problem: &MolpProblem, x: &[Rational]) -> bool {
    let (rows, rhs) = stacked_rows(problem);
    match tight_rows(&rows, &rhs, x) {
        Some(t) => {
            let active: Vec<Vec<Rational>> = t.iter().map(|&i| rows[i].clone()).collect();
            rank(&active) == problem.n()
        }
        None => false,
    }
}

pub fn enumerate_vertices(problem: &MolpProblem) -> VertexSet {
    let n = problem.n();
    let (rows, rhs) = stacked_rows(problem);
    let mut found: Vec<(Vec<Rational>, Vec<usize>)> = Vec::new();
    for_each_combination(rows.len(), n, |sel| {
        let a: Vec<Vec<Rational>> = sel.iter().map(|&i| rows[i].clone()).collect();
        let b: Vec<Rational> = sel.iter().map(|&i| rhs[i].clone()).collect();
        if let Some(x) = solve_square(&a, &b) {
            if found.iter().any(|(p, _)| *p == x) {
                return;
            }
            if let Some(t) = tight_rows(&rows, &rhs, &x) {
                found.push((x, t));
            }
        }
    });
    found.sort();
    let (points, active_sets) = found.into_iter().unzip();
    VertexSet { points, active_sets }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn pts(v: &[(i64, i64)]) -> Vec<Vec<Rational>> {
        v.iter().map(|&(a, b)| vec![int(a), int(b)]).collect()
    }

    #[test]
    fn example1_vertices() {
        let p = MolpProblem::new(
            vec![vec![1, 0], vec![0, 1]],
            vec![vec![2, 1], vec![1, 1], vec![1, 2]],
            vec![4, 3, 4],
            vec![5, 5],
            vec![1, 1, 1],
        )
        .unwrap();
        let v = enumerate_vertices(&p);
        assert_eq!(v.points, pts(&[(0, 4), (0, 5), (1, 2), (2, 1), (4, 0), (5, 0), (5, 5)]));
    }

    #[test]
    fn vertex_test_rejects_segment_interior() {
        let p = MolpProblem::new(vec![vec![1, 1]], vec![vec![1, 1]], vec![2], vec![2, 2], vec![1]).unwrap();
        assert!(is_vertex(&p, &[int(0), int(2)]));
        assert!(is_vertex(&p, &[int(2), int(0)]));
        assert!(!is_vertex(&p, &[int(1), int(1)]));
        assert!(!is_vertex(&p, &[int(3), int(0)]));
    }

    #[test]
    fn unit_box() {
        let p = MolpProblem::new(vec![vec![1, 0]], vec![], vec![], vec![1, 1], vec![]).unwrap();
        assert_eq!(enumerate_vertices(&p).len(), 4);
    }

    #[test]
    fn cut_box() {
        let p = MolpProblem::new(vec![vec![1, 0]], vec![vec![1, 1]], vec![1], vec![1, 1], vec![1]).unwrap();
        assert_eq!(enumerate_vertices(&p).points, pts(&[(0, 1), (1, 0), (1, 1)]));
    }
}
