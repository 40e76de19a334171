//! Primal-dual interior-point solver for the moment relaxations.
//!
//! The relaxation `{y : E y = f, F_b(y) >= 0}` is solved as
//! `max t  s.t.  F_b(y) - t I >= 0`, with the equalities eliminated through a
//! null-space basis. The central path converges to the relative interior of the
//! optimal face, which for a relaxation without interior is the maximum-rank
//! feasible moment vector. When the feasible set has an interior (`t* > 0`), a
//! second phase moves to its analytic center.

mod ops;

use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use nalgebra::{Cholesky, DMatrix, DVector};
use thiserror::Error;

use crate::moment::MomentRelaxation;
pub use ops::{BlockOp, SdpData};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SdpError {
    #[error("moment vector has length {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tol_eq: f64,
    pub tol_psd: f64,
    pub max_iters: usize,
    pub step_fraction: f64,
    /// Relative pivot threshold deciding the rank of the equality system.
    pub tol_rank_eq: f64,
    /// Move to the analytic center when the feasible set has an interior.
    pub analytic_center: bool,
    /// Complementarity target for phase 1.
    pub tol_mu: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol_eq: 1e-8,
            tol_psd: 1e-8,
            max_iters: 200,
            step_fraction: 0.98,
            tol_rank_eq: 1e-10,
            analytic_center: true,
            tol_mu: 1e-16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Solved,
    MaxIters,
    Infeasible,
    NumericalFailure,
}

/// Output of [`solve`]. Residuals refer to the scaled, row-normalized problem.
#[derive(Debug, Clone)]
pub struct ConicSolution {
    /// Moment vector in the original variables.
    pub y: Vec<f64>,
    /// Moment vector of the rescaled variables `v / s_v`.
    pub y_scaled: Vec<f64>,
    /// `y[a] = y_scaled[a] * moment_scale[a]`.
    pub moment_scale: Vec<f64>,
    /// Block values `F_b(y_scaled)` after block normalization.
    pub blocks: Vec<DMatrix<f64>>,
    pub eq_residual: f64,
    pub min_eig: f64,
    /// Final value of `t` (phase 1).
    pub t: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    pub history: Vec<IterStat>,
}

/// Raw result of the generic solver.
#[derive(Debug, Clone)]
pub struct SdpResult {
    pub y: DVector<f64>,
    pub t: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    pub history: Vec<IterStat>,
}

/// Per-iteration progress of phase 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterStat {
    pub t: f64,
    pub mu: f64,
    pub primal_res: f64,
    pub dual_res: f64,
}

/// Null-space parametrization `y = y_p + Z w` of `E y = f`.
pub struct EqualityNullSpace {
    pub yp: DVector<f64>,
    pub z: DMatrix<f64>,
    pub rank: usize,
}

/// Computes a null-space basis with a fully pivoted LU factorization; `None` when
/// the system is inconsistent.
pub fn null_space(p: usize, rows: &[(Vec<(u32, f64)>, f64)], tol_rank: f64) -> Option<EqualityNullSpace> {
    let nr = rows.len();
    if nr == 0 {
        return Some(EqualityNullSpace { yp: DVector::zeros(p), z: DMatrix::identity(p, p), rank: 0 });
    }
    let mut e = DMatrix::<f64>::zeros(nr, p);
    let mut f = DVector::<f64>::zeros(nr);
    for (i, (terms, rhs)) in rows.iter().enumerate() {
        for &(a, v) in terms {
            e[(i, a as usize)] += v;
        }
        f[i] = *rhs;
    }
    let lu = nalgebra::linalg::FullPivLU::new(e.clone());
    let u = lu.u();
    let l = lu.l();
    let kmin = nr.min(p);
    let d0 = u[(0, 0)].abs();
    let mut r = 0;
    while r < kmin && u[(r, r)].abs() > tol_rank * d0 {
        r += 1;
    }
    // Z = Q [ -U11^{-1} U12 ; I ]
    let u11 = u.view((0, 0), (r, r)).into_owned();
    let u12 = u.view((0, r), (r, p - r)).into_owned();
    let mut top = u12;
    if r > 0 && !u11.solve_upper_triangular_mut(&mut top) {
        return None;
    }
    let mut z = DMatrix::<f64>::zeros(p, p - r);
    z.view_mut((0, 0), (r, p - r)).copy_from(&(-top));
    z.view_mut((r, 0), (p - r, p - r)).fill_with_identity();
    lu.q().inv_permute_rows(&mut z);
    // particular solution
    let mut pf = f.clone();
    lu.p().permute_rows(&mut pf);
    let l11 = l.view((0, 0), (r, r)).into_owned();
    let mut c = pf.rows(0, r).into_owned();
    if r > 0 {
        l11.solve_lower_triangular_with_diag_mut(&mut c, 1.0);
        if !u11.solve_upper_triangular_mut(&mut c) {
            return None;
        }
    }
    let mut yp = DVector::<f64>::zeros(p);
    yp.rows_mut(0, r).copy_from(&c);
    lu.q().inv_permute_rows(&mut yp);
    let res = &e * &yp - &f;
    let scale = 1.0 + f.amax();
    if res.amax() > 1e-8 * scale {
        return None;
    }
    Some(EqualityNullSpace { yp, z, rank: r })
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    m.clone().symmetric_eigenvalues().min()
}

/// Largest `a` with `m + a d` positive semidefinite (infinite if `d >= 0`).
fn max_step(m: &DMatrix<f64>, d: &DMatrix<f64>) -> f64 {
    let Some(ch) = Cholesky::new(m.clone()) else {
        return 0.0;
    };
    let l = ch.l();
    let mut w = d.clone();
    l.solve_lower_triangular_mut(&mut w);
    let mut w2 = w.transpose();
    l.solve_lower_triangular_mut(&mut w2);
    let w2 = (&w2 + w2.transpose()) * 0.5;
    let mn = w2.symmetric_eigenvalues().min();
    if mn >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / mn
    }
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

fn inverse_spd(m: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    Cholesky::new(m.clone()).map(|c| c.inverse())
}

fn cholesky_with_ridge(h: DMatrix<f64>) -> Option<Cholesky<f64, nalgebra::Dyn>> {
    let mut reg = 0.0;
    let diag_max = h.diagonal().amax().max(1e-300);
    for _ in 0..12 {
        let mut hr = h.clone();
        if reg > 0.0 {
            for i in 0..hr.nrows() {
                hr[(i, i)] += reg;
            }
        }
        if let Some(c) = Cholesky::new(hr) {
            return Some(c);
        }
        reg = if reg == 0.0 { 1e-14 * diag_max } else { reg * 10.0 };
    }
    None
}

/// Solves `max t s.t. F_b(y) - t I >= 0, E y = f` and, when `t* > 0`, continues to
/// the analytic center of `{F_b(y) >= 0}`.
pub fn solve_sdp(data: &SdpData, opts: &SolverOptions) -> SdpResult {
    let p = data.nvars;
    let Some(ns) = null_space(p, &data.eq_rows, opts.tol_rank_eq) else {
        return SdpResult { y: DVector::zeros(p), t: f64::NEG_INFINITY, iterations: 0, status: SolveStatus::Infeasible, history: Vec::new() };
    };
    let q = ns.z.ncols();
    let blocks = &data.blocks;
    let ntot: usize = blocks.iter().map(|b| b.size).sum();
    let mut w = DVector::<f64>::zeros(q);
    let y0 = ns.yp.clone();
    let mut t = {
        let me = blocks.iter().map(|b| min_eigenvalue(&b.eval(&y0))).fold(f64::INFINITY, f64::min);
        if me.is_finite() { me - 1.0 } else { -1.0 }
    };
    let mut ss: Vec<DMatrix<f64>> = blocks.iter().map(|b| DMatrix::identity(b.size, b.size)).collect();
    let mut xs: Vec<DMatrix<f64>> = blocks.iter().map(|b| DMatrix::identity(b.size, b.size) / ntot as f64).collect();
    let mut status = SolveStatus::MaxIters;
    let mut iterations = 0;
    let mut interior = false;
    let mut history = Vec::new();

    for it in 0..opts.max_iters {
        iterations = it;
        let y = &ns.yp + &ns.z * &w;
        let fy: Vec<DMatrix<f64>> = blocks.iter().map(|b| b.eval(&y)).collect();
        let pres: Vec<DMatrix<f64>> = fy
            .iter()
            .zip(&ss)
            .map(|(f, s)| {
                let mut r = f - s;
                for i in 0..r.nrows() {
                    r[(i, i)] -= t;
                }
                r
            })
            .collect();
        let mut atx = DVector::<f64>::zeros(p);
        for (b, x) in blocks.iter().zip(&xs) {
            b.adjoint_add(x, &mut atx);
        }
        let trx: f64 = xs.iter().map(|x| x.trace()).sum();
        let rd_w = -(ns.z.tr_mul(&atx));
        let rd_t = trx - 1.0;
        let mu: f64 = xs.iter().zip(&ss).map(|(x, s)| x.dot(s)).sum::<f64>() / ntot as f64;
        let pinf = pres.iter().map(|r| r.amax()).fold(0.0, f64::max);
        let dinf = rd_w.amax().max(rd_t.abs());
        history.push(IterStat { t, mu, primal_res: pinf, dual_res: dinf });

        if opts.analytic_center && t > opts.tol_psd && pinf < opts.tol_psd {
            interior = true;
            break;
        }
        let converged = mu < opts.tol_mu && pinf < 1e-3 * opts.tol_psd;
        if converged && t > -opts.tol_psd * 0.1 {
            status = SolveStatus::Solved;
            break;
        }
        if converged && dinf < 1e-3 * opts.tol_psd && t < -opts.tol_psd {
            status = SolveStatus::Infeasible;
            break;
        }
        if mu < 1e-15 && pinf < 1e-12 {
            // cannot make further progress in double precision
            status = if t > -opts.tol_psd { SolveStatus::Solved } else { SolveStatus::NumericalFailure };
            break;
        }

        let Some(sinvs) = ss.iter().map(inverse_spd).collect::<Option<Vec<_>>>() else {
            status = SolveStatus::NumericalFailure;
            break;
        };
        let mut hy = DMatrix::<f64>::zeros(p, p);
        for ((b, x), si) in blocks.iter().zip(&xs).zip(&sinvs) {
            b.schur_add(x, si, &mut hy);
        }
        let hy = sym(hy);
        let xsi: Vec<DMatrix<f64>> = xs.iter().zip(&sinvs).map(|(x, si)| sym(x * si)).collect();
        let mut atxsi = DVector::<f64>::zeros(p);
        for (b, m) in blocks.iter().zip(&xsi) {
            b.adjoint_add(m, &mut atxsi);
        }
        let hwt = -(ns.z.tr_mul(&atxsi));
        let htt: f64 = xsi.iter().map(|m| m.trace()).sum();
        let hz = &hy * &ns.z;
        let mut hw = DMatrix::<f64>::zeros(q + 1, q + 1);
        hw.view_mut((0, 0), (q, q)).copy_from(&ns.z.tr_mul(&hz));
        hw.view_mut((0, q), (q, 1)).copy_from(&hwt);
        hw.view_mut((q, 0), (1, q)).copy_from(&hwt.transpose());
        hw[(q, q)] = htt;
        let Some(chol) = cholesky_with_ridge(sym(hw)) else {
            status = SolveStatus::NumericalFailure;
            break;
        };

        let direction = |sigma_mu: f64, corr: Option<&[DMatrix<f64>]>| {
            let mut rhs_y = DVector::<f64>::zeros(p);
            let mut rt = 0.0;
            let mut rs = Vec::with_capacity(blocks.len());
            for (k, b) in blocks.iter().enumerate() {
                let (x, si, pr) = (&xs[k], &sinvs[k], &pres[k]);
                let mut r = si * sigma_mu - x - x * pr * si;
                if let Some(c) = corr {
                    r -= &c[k] * si;
                }
                let r = sym(r);
                b.adjoint_add(&r, &mut rhs_y);
                rt -= r.trace();
                rs.push(r);
            }
            let mut g = DVector::<f64>::zeros(q + 1);
            g.rows_mut(0, q).copy_from(&(ns.z.tr_mul(&rhs_y) - &rd_w));
            g[q] = rt - rd_t;
            let d = chol.solve(&g);
            let dw = d.rows(0, q).into_owned();
            let dt = d[q];
            let dy = &ns.z * &dw;
            let mut ds = Vec::with_capacity(blocks.len());
            let mut dx = Vec::with_capacity(blocks.len());
            for (k, b) in blocks.iter().enumerate() {
                let mut d_s = &pres[k] + b.eval(&dy);
                for i in 0..d_s.nrows() {
                    d_s[(i, i)] -= dt;
                }
                let (x, si) = (&xs[k], &sinvs[k]);
                let mut d_x = si * sigma_mu - x - x * &d_s * si;
                if let Some(c) = corr {
                    d_x -= &c[k] * si;
                }
                ds.push(d_s);
                dx.push(sym(d_x));
            }
            (dw, dt, ds, dx)
        };

        let (_, _, ds_a, dx_a) = direction(0.0, None);
        let ap = ss.iter().zip(&ds_a).map(|(s, d)| max_step(s, d)).fold(1.0, f64::min);
        let ad = xs.iter().zip(&dx_a).map(|(x, d)| max_step(x, d)).fold(1.0, f64::min);
        let mu_aff: f64 = (0..blocks.len())
            .map(|k| (&xs[k] + &dx_a[k] * ad).dot(&(&ss[k] + &ds_a[k] * ap)))
            .sum::<f64>()
            / ntot as f64;
        let sigma = (mu_aff / mu).powi(3).min(1.0);
        let corr: Vec<DMatrix<f64>> = dx_a.iter().zip(&ds_a).map(|(a, b)| a * b).collect();
        let (dw, dt, ds, dx) = direction(sigma * mu, Some(&corr));
        let ap = (opts.step_fraction * ss.iter().zip(&ds).map(|(s, d)| max_step(s, d)).fold(f64::INFINITY, f64::min)).min(1.0);
        let ad = (opts.step_fraction * xs.iter().zip(&dx).map(|(x, d)| max_step(x, d)).fold(f64::INFINITY, f64::min)).min(1.0);
        if !(ap.is_finite() && ad.is_finite()) || (ap < 1e-12 && ad < 1e-12) {
            status = if t > -opts.tol_psd && pinf < opts.tol_psd { SolveStatus::Solved } else { SolveStatus::NumericalFailure };
            break;
        }
        w += &dw * ap;
        t += dt * ap;
        for (s, d) in ss.iter_mut().zip(&ds) {
            *s += d * ap;
        }
        for (x, d) in xs.iter_mut().zip(&dx) {
            *x += d * ad;
        }
        iterations = it + 1;
    }

    if interior {
        let (w2, extra) = analytic_center(blocks, &ns, w, opts);
        w = w2;
        iterations += extra;
        status = SolveStatus::Solved;
    }
    let y = &ns.yp + &ns.z * &w;
    SdpResult { y, t, iterations, status, history }
}

/// Damped Newton on `-sum log det F_b(y_p + Z w)` from a strictly feasible `w`.
fn analytic_center(blocks: &[BlockOp], ns: &EqualityNullSpace, mut w: DVector<f64>, opts: &SolverOptions) -> (DVector<f64>, usize) {
    let p = ns.yp.len();
    let q = ns.z.ncols();
    let barrier = |w: &DVector<f64>| -> Option<f64> {
        let y = &ns.yp + &ns.z * w;
        let mut acc = 0.0;
        for b in blocks {
            let ch = Cholesky::new(b.eval(&y))?;
            acc -= 2.0 * ch.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        }
        Some(acc)
    };
    let mut iters = 0;
    for _ in 0..opts.max_iters {
        iters += 1;
        let y = &ns.yp + &ns.z * &w;
        let Some(finv) = blocks.iter().map(|b| inverse_spd(&b.eval(&y))).collect::<Option<Vec<_>>>() else {
            break;
        };
        let mut grad_y = DVector::<f64>::zeros(p);
        let mut hy = DMatrix::<f64>::zeros(p, p);
        for (b, fi) in blocks.iter().zip(&finv) {
            b.adjoint_add(fi, &mut grad_y);
            b.schur_add(fi, fi, &mut hy);
        }
        let g = ns.z.tr_mul(&grad_y);
        let h = sym(ns.z.tr_mul(&(sym(hy) * &ns.z)));
        let Some(ch) = cholesky_with_ridge(h) else {
            break;
        };
        let dw = ch.solve(&g);
        let dec = g.dot(&dw);
        if dec < 1e-14 || q == 0 {
            break;
        }
        let f0 = barrier(&w).unwrap_or(f64::INFINITY);
        let mut step = if dec > 0.25 { 1.0 / (1.0 + dec.sqrt()) } else { 1.0 };
        loop {
            let cand = &w + &dw * step;
            if let Some(fc) = barrier(&cand) {
                if fc <= f0 - 0.25 * step * dec || step < 1e-12 {
                    w = cand;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-14 {
                return (w, iters);
            }
        }
    }
    (w, iters)
}

/// Solves the relaxation after rescaling each variable by its range.
pub fn solve(rel: &MomentRelaxation, opts: &SolverOptions) -> ConicSolution {
    let (data, scale) = SdpData::from_relaxation(rel);
    let r = solve_sdp(&data, opts);
    let ys: Vec<f64> = r.y.iter().copied().collect();
    let (eq_residual, min_eig, blocks) = data.residuals(&ys);
    let mut status = r.status;
    if status == SolveStatus::Solved && (eq_residual > opts.tol_eq || min_eig < -opts.tol_psd) {
        status = SolveStatus::NumericalFailure;
    }
    ConicSolution {
        y: ys.iter().zip(&scale).map(|(a, s)| a * s).collect(),
        y_scaled: ys,
        moment_scale: scale,
        blocks,
        eq_residual,
        min_eig,
        t: r.t,
        iterations: r.iterations,
        status,
        history: r.history,
    }
}

/// Equality residual (max norm) and minimum block eigenvalue of the scaled,
/// normalized relaxation at the original-variable moment vector `y`.
pub fn residuals(rel: &MomentRelaxation, y: &[f64]) -> Result<(f64, f64), SdpError> {
    if y.len() != rel.dim() {
        return Err(SdpError::Dimension { expected: rel.dim(), got: y.len() });
    }
    let (data, scale) = SdpData::from_relaxation(rel);
    let ys: Vec<f64> = y.iter().zip(&scale).map(|(a, s)| a / s).collect();
    let (e, m, _) = data.residuals(&ys);
    Ok((e, m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moment::tests::univariate;
    use crate::moment::{assemble_relaxation, RelaxationOptions};
    use crate::poly::Polynomial;
    use crate::rational::int;
    use alloc::vec;

    fn entry(r: u32, c: u32, t: &[(u32, f64)]) -> (u32, u32, Vec<(u32, f64)>) {
        (r, c, t.to_vec())
    }

    #[test]
    fn null_space_of_small_system() {
        // y0 + y1 + y2 = 3, y0 - y2 = 0, 2 y0 + y1 = 3 (dependent)
        let rows = vec![
            (vec![(0, 1.0), (1, 1.0), (2, 1.0)], 3.0),
            (vec![(0, 1.0), (2, -1.0)], 0.0),
            (vec![(0, 2.0), (1, 1.0)], 3.0),
        ];
        let ns = null_space(4, &rows, 1e-10).unwrap();
        assert_eq!(ns.rank, 2);
        assert_eq!(ns.z.ncols(), 2);
        for (t, f) in &rows {
            let v: f64 = t.iter().map(|&(a, c)| c * ns.yp[a as usize]).sum();
            assert!((v - f).abs() < 1e-12);
            for k in 0..2 {
                let v: f64 = t.iter().map(|&(a, c)| c * ns.z[(a as usize, k)]).sum();
                assert!(v.abs() < 1e-12);
            }
        }
        let bad = vec![(vec![(0, 1.0)], 0.0), (vec![(0, 2.0)], 1.0)];
        assert!(null_space(2, &bad, 1e-10).is_none());
    }

    #[test]
    fn free_scalar_goes_to_center() {
        // [[y0, y1], [y1, y0]] >= 0 with y0 = 1: analytic center y1 = 0.
        let b = BlockOp::new(2, vec![entry(0, 0, &[(0, 1.0)]), entry(0, 1, &[(1, 1.0)]), entry(1, 1, &[(0, 1.0)])], 2);
        let data = SdpData { nvars: 2, blocks: vec![b], eq_rows: vec![(vec![(0, 1.0)], 1.0)] };
        let r = solve_sdp(&data, &SolverOptions::default());
        assert_eq!(r.status, SolveStatus::Solved);
        assert!(r.t > 0.0);
        assert!((r.y[0] - 1.0).abs() < 1e-9);
        assert!(r.y[1].abs() < 1e-6);
    }

    #[test]
    fn univariate_interior_center() {
        // x^2 = x, x >= 0 at order 1: analytic center of log(y - y^2) + log y is 2/3.
        let x = Polynomial::var(0);
        let sys = univariate(vec![x.mul(&x).sub(&x)], vec![x.clone()], 1);
        let rel = assemble_relaxation(&sys, 1, &RelaxationOptions::plain()).unwrap();
        let s = solve(&rel, &SolverOptions::default());
        assert_eq!(s.status, SolveStatus::Solved);
        assert!((s.y[1] - 2.0 / 3.0).abs() < 1e-6, "{:?}", s.y);
        assert!((s.y[2] - s.y[1]).abs() < 1e-9);
    }

    #[test]
    fn univariate_without_interior() {
        // The range localizer x(1 - x) is identically zero on the relaxation.
        let x = Polynomial::var(0);
        let sys = univariate(vec![x.mul(&x).sub(&x)], vec![x.clone()], 1);
        let rel = assemble_relaxation(&sys, 1, &RelaxationOptions::default()).unwrap();
        let s = solve(&rel, &SolverOptions::default());
        assert_eq!(s.status, SolveStatus::Solved);
        assert!(s.t.abs() < 1e-6);
        assert!(s.eq_residual < 1e-8 && s.min_eig > -1e-8);
        assert!(s.y[1] > 1e-3 && s.y[1] < 1.0 - 1e-3, "{:?}", s.y);
    }

    #[test]
    fn contradictory_equalities_are_infeasible() {
        let x = Polynomial::var(0);
        let sys = univariate(vec![x.clone(), x.sub(&Polynomial::constant(int(1)))], vec![], 1);
        let rel = assemble_relaxation(&sys, 1, &RelaxationOptions::plain()).unwrap();
        assert_eq!(solve(&rel, &SolverOptions::default()).status, SolveStatus::Infeasible);
    }

    #[test]
    fn empty_psd_region_is_infeasible() {
        // x >= 0 and -1 - x >= 0
        let x = Polynomial::var(0);
        let neg = Polynomial::constant(int(-1)).sub(&x);
        let sys = univariate(vec![], vec![x.clone(), neg], 1);
        let rel = assemble_relaxation(&sys, 1, &RelaxationOptions::plain()).unwrap();
        let s = solve(&rel, &SolverOptions::default());
        assert_eq!(s.status, SolveStatus::Infeasible);
        assert!(s.t < -1e-3);
    }
}
