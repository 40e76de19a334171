//! Exact two-phase simplex with least-index pivoting.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::{One, Signed, Zero};

use crate::exact::solve_square;
use crate::rational::{dot, Rational};

/// `min objective . y` subject to `G y >= h`, `E y = f`, `0 <= y <= upper`.
#[derive(Debug, Clone)]
pub struct LpInstance {
    pub objective: Vec<Rational>,
    pub g: Vec<Vec<Rational>>,
    pub h: Vec<Rational>,
    pub e: Vec<Vec<Rational>>,
    pub f: Vec<Rational>,
    pub upper: Vec<Option<Rational>>,
}

impl LpInstance {
    pub fn new(
        objective: Vec<Rational>,
        g: Vec<Vec<Rational>>,
        h: Vec<Rational>,
        upper: Vec<Option<Rational>>,
    ) -> Self {
        LpInstance { objective, g, h, e: Vec::new(), f: Vec::new(), upper }
    }

    pub fn with_equalities(mut self, e: Vec<Vec<Rational>>, f: Vec<Rational>) -> Self {
        self.e = e;
        self.f = f;
        self
    }

    pub fn nvars(&self) -> usize {
        self.objective.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<Rational>,
    pub value: Option<Rational>,
    /// Basic columns of the standard form (structural, then one slack per
    /// inequality row, then one slack per finite upper bound).
    pub basis: Vec<usize>,
    /// Multipliers for the `G` rows (>= 0), the `E` rows (free), and the
    /// finite upper bounds written as `-y_j >= -upper_j` (>= 0), in that order.
    pub dual: Vec<Rational>,
}

impl LpSolution {
    fn status_only(status: LpStatus) -> Self {
        LpSolution { status, x: Vec::new(), value: None, basis: Vec::new(), dual: Vec::new() }
    }
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    cost: Vec<Rational>,
    basis: Vec<usize>,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cost.len() - 1
    }

    fn set_costs(&mut self, c: &[Rational]) {
        let w = self.width();
        let mut cost: Vec<Rational> = c.iter().cloned().chain(core::iter::once(Rational::zero())).collect();
        cost.resize(w + 1, Rational::zero());
        for (r, &b) in self.basis.iter().enumerate() {
            let cb = cost[b].clone();
            if !cb.is_zero() {
                for j in 0..=w {
                    let d = &cb * &self.rows[r][j];
                    cost[j] -= d;
                }
            }
        }
        self.cost = cost;
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let w = self.width();
        let inv = self.rows[r][c].recip();
        for v in self.rows[r].iter_mut() {
            *v = &*v * &inv;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for j in 0..=w {
                    if !prow[j].is_zero() {
                        row[j] -= &f * &prow[j];
                    }
                }
            }
        }
        if !self.cost[c].is_zero() {
            let f = self.cost[c].clone();
            for j in 0..=w {
                if !prow[j].is_zero() {
                    self.cost[j] -= &f * &prow[j];
                }
            }
        }
        self.basis[r] = c;
    }

    /// Bland's rule; returns false when unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        let w = self.width();
        loop {
            let Some(c) = (0..allowed).find(|&j| self.cost[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c].is_positive() {
                    let ratio = &row[w] / &row[c];
                    let better = match &best {
                        None => true,
                        Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                    };
                    if better {
                        best = Some((i, ratio));
                    }
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, c),
            }
        }
    }
}

/// Solves the LP exactly. Strong duality holds on `Optimal`: `value == dual . rhs`.
pub fn simplex_solve(lp: &LpInstance) -> LpSolution {
    let nv = lp.nvars();
    let ub_vars: Vec<usize> = (0..nv).filter(|&j| lp.upper[j].is_some()).collect();
    let ng = lp.g.len();
    let ne = lp.e.len();
    let nu = ub_vars.len();
    let nrows = ng + ne + nu;
    // structural | slack for G | slack for upper | artificial
    let nstd = nv + ng + nu;
    let width = nstd + nrows;
    let mut a_std: Vec<Vec<Rational>> = Vec::with_capacity(nrows);
    let mut rhs: Vec<Rational> = Vec::with_capacity(nrows);
    for (i, (row, hi)) in lp.g.iter().zip(&lp.h).enumerate() {
        let mut r = vec![Rational::zero(); nstd];
        r[..nv].clone_from_slice(row);
        r[nv + i] = -Rational::one();
        a_std.push(r);
        rhs.push(hi.clone());
    }
    for (row, fi) in lp.e.iter().zip(&lp.f) {
        let mut r = vec![Rational::zero(); nstd];
        r[..nv].clone_from_slice(row);
        a_std.push(r);
        rhs.push(fi.clone());
    }
    for (t, &j) in ub_vars.iter().enumerate() {
        let mut r = vec![Rational::zero(); nstd];
        r[j] = Rational::one();
        r[nv + ng + t] = Rational::one();
        a_std.push(r);
        rhs.push(lp.upper[j].clone().unwrap());
    }
    let mut rows = Vec::with_capacity(nrows);
    for i in 0..nrows {
        let flip = rhs[i].is_negative();
        let mut r: Vec<Rational> = a_std[i].iter().map(|v| if flip { -v } else { v.clone() }).collect();
        r.resize(width + 1, Rational::zero());
        r[nstd + i] = Rational::one();
        r[width] = if flip { -&rhs[i] } else { rhs[i].clone() };
        rows.push(r);
    }
    let mut tab = Tableau { rows, cost: vec![Rational::zero(); width + 1], basis: (nstd..width).collect() };
    let mut phase1 = vec![Rational::zero(); width];
    for v in phase1[nstd..].iter_mut() {
        *v = Rational::one();
    }
    tab.set_costs(&phase1);
    tab.optimize(width);
    if !tab.cost[width].is_zero() {
        return LpSolution::status_only(LpStatus::Infeasible);
    }
    // Drive artificials out of the basis; drop redundant rows.
    let mut r = 0;
    while r < tab.rows.len() {
        if tab.basis[r] >= nstd {
            if let Some(c) = (0..nstd).find(|&j| !tab.rows[r][j].is_zero()) {
                tab.pivot(r, c);
                r += 1;
            } else {
                tab.rows.remove(r);
                tab.basis.remove(r);
            }
        } else {
            r += 1;
        }
    }
    let mut c2 = vec![Rational::zero(); width];
    c2[..nv].clone_from_slice(&lp.objective);
    tab.set_costs(&c2);
    if !tab.optimize(nstd) {
        return LpSolution::status_only(LpStatus::Unbounded);
    }
    let mut z = vec![Rational::zero(); nstd];
    for (i, &b) in tab.basis.iter().enumerate() {
        z[b] = tab.rows[i][width].clone();
    }
    let x: Vec<Rational> = z[..nv].to_vec();
    let value = dot(&lp.objective, &x);
    let dual = dual_from_basis(&a_std, &c2[..nstd], &tab.basis, nrows)
        .map(|pi| {
            let mut d = Vec::with_capacity(nrows);
            d.extend(pi[..ng + ne].iter().cloned());
            d.extend(pi[ng + ne..].iter().map(|v| -v));
            d
        })
        .unwrap_or_default();
    LpSolution { status: LpStatus::Optimal, x, value: Some(value), basis: tab.basis.clone(), dual }
}

/// Solves `B^T pi = c_B` over the rows that survived phase 1; dropped rows get zero.
fn dual_from_basis(a_std: &[Vec<Rational>], c: &[Rational], basis: &[usize], nrows: usize) -> Option<Vec<Rational>> {
    // Pick a maximal independent row subset matching the basis size.
    let cols: Vec<Vec<Rational>> = basis.iter().map(|&b| (0..nrows).map(|i| a_std[i][b].clone()).collect()).collect();
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..nrows {
        let mut trial = chosen.clone();
        trial.push(i);
        let sub: Vec<Vec<Rational>> = trial.iter().map(|&r| basis.iter().map(|&b| a_std[r][b].clone()).collect()).collect();
        if crate::exact::rank(&sub) == trial.len() {
            chosen = trial;
        }
        if chosen.len() == basis.len() {
            break;
        }
    }
    if chosen.len() != basis.len() {
        return None;
    }
    let bt: Vec<Vec<Rational>> = cols.iter().map(|col| chosen.iter().map(|&r| col[r].clone()).collect()).collect();
    let cb: Vec<Rational> = basis.iter().map(|&b| c[b].clone()).collect();
    let pi_sub = solve_square(&bt, &cb)?;
    let mut pi = vec![Rational::zero(); nrows];
    for (&r, v) in chosen.iter().zip(pi_sub) {
        pi[r] = v;
    }
    Some(pi)
}

/// Dual objective `h . u + f . v - upper . w` for a returned dual vector.
pub fn dual_value(lp: &LpInstance, dual: &[Rational]) -> Rational {
    let mut rhs: Vec<Rational> = lp.h.iter().chain(&lp.f).cloned().collect();
    rhs.extend(lp.upper.iter().flatten().map(|u| -u));
    dot(&rhs, dual)
}
