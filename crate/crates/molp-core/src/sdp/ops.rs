use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::moment::{MomentRelaxation, SymMap};

/// Symmetric block `F(y) = sum_a y_a F_a`, stored both by entry and by moment.
#[derive(Debug, Clone)]
pub struct BlockOp {
    pub size: usize,
    upper: Vec<(u32, u32, Vec<(u32, f64)>)>,
    /// For each moment with a nonzero coefficient: full (row, col, coef) lists.
    by_moment: Vec<(u32, Vec<u32>, Vec<u32>, Vec<f64>)>,
}

impl BlockOp {
    pub fn new(size: usize, upper: Vec<(u32, u32, Vec<(u32, f64)>)>, nvars: usize) -> Self {
        let mut slots: Vec<(Vec<u32>, Vec<u32>, Vec<f64>)> = vec![(Vec::new(), Vec::new(), Vec::new()); nvars];
        for (r, c, terms) in &upper {
            for &(a, v) in terms {
                let s = &mut slots[a as usize];
                s.0.push(*r);
                s.1.push(*c);
                s.2.push(v);
                if r != c {
                    s.0.push(*c);
                    s.1.push(*r);
                    s.2.push(v);
                }
            }
        }
        let by_moment = slots
            .into_iter()
            .enumerate()
            .filter(|(_, s)| !s.0.is_empty())
            .map(|(a, (r, c, v))| (a as u32, r, c, v))
            .collect();
        BlockOp { size, upper, by_moment }
    }

    fn from_map(map: &SymMap, scale: &[f64], nvars: usize) -> Self {
        let mut upper: Vec<(u32, u32, Vec<(u32, f64)>)> = map
            .entries
            .iter()
            .map(|e| (e.r, e.c, e.terms.iter().map(|&(a, v)| (a, v * scale[a as usize])).collect()))
            .collect();
        let mx = upper.iter().flat_map(|e| e.2.iter()).map(|t| t.1.abs()).fold(0.0, f64::max);
        if mx > 0.0 {
            for e in &mut upper {
                for t in &mut e.2 {
                    t.1 /= mx;
                }
            }
        }
        BlockOp::new(map.size, upper, nvars)
    }

    pub fn eval(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.size, self.size);
        for (r, c, terms) in &self.upper {
            let v: f64 = terms.iter().map(|&(a, k)| k * y[a as usize]).sum();
            m[(*r as usize, *c as usize)] = v;
            m[(*c as usize, *r as usize)] = v;
        }
        m
    }

    /// `out[a] += <F_a, X>` for symmetric `X`.
    pub fn adjoint_add(&self, x: &DMatrix<f64>, out: &mut DVector<f64>) {
        for (r, c, terms) in &self.upper {
            let v = if r == c { x[(*r as usize, *c as usize)] } else { 2.0 * x[(*r as usize, *c as usize)] };
            for &(a, k) in terms {
                out[a as usize] += k * v;
            }
        }
    }

    /// `h[b, a] += <F_b, X F_a S>`; the caller symmetrizes.
    pub fn schur_add(&self, x: &DMatrix<f64>, s: &DMatrix<f64>, h: &mut DMatrix<f64>) {
        let n = self.size;
        let smax = self.by_moment.iter().map(|e| e.1.len()).max().unwrap_or(0);
        let mut ga = DMatrix::<f64>::zeros(n, smax);
        let mut gb = DMatrix::<f64>::zeros(smax, n);
        let mut y = DMatrix::<f64>::zeros(n, n);
        for (a, rows, cols, vals) in &self.by_moment {
            let k = rows.len();
            for e in 0..k {
                ga.column_mut(e).copy_from(&(x.column(rows[e] as usize) * vals[e]));
                let sc = s.column(cols[e] as usize);
                for j in 0..n {
                    gb[(e, j)] = sc[j];
                }
            }
            y.gemm(1.0, &ga.columns(0, k), &gb.rows(0, k), 0.0);
            let mut col = h.column_mut(*a as usize);
            for (r, c, terms) in &self.upper {
                let (r, c) = (*r as usize, *c as usize);
                let v = if r == c { y[(r, c)] } else { y[(r, c)] + y[(c, r)] };
                for &(b, kf) in terms {
                    col[b as usize] += kf * v;
                }
            }
        }
    }
}

/// Linear SDP feasibility data over a moment vector of length `nvars`.
#[derive(Debug, Clone)]
pub struct SdpData {
    pub nvars: usize,
    pub blocks: Vec<BlockOp>,
    pub eq_rows: Vec<(Vec<(u32, f64)>, f64)>,
}

impl SdpData {
    /// Rescaled form: `y_scaled[a] = y[a] / scale[a]`, blocks and rows normalized
    /// to unit max coefficient. Returns the data and the scale vector.
    pub fn from_relaxation(rel: &MomentRelaxation) -> (SdpData, Vec<f64>) {
        let scale = rel.moment_scale();
        let p = rel.dim();
        let blocks = rel.blocks.iter().map(|b| BlockOp::from_map(&b.map, &scale, p)).collect();
        let eq_rows = rel
            .equalities
            .iter()
            .map(|e| {
                let terms: Vec<(u32, f64)> = e.terms.iter().map(|&(a, v)| (a, v * scale[a as usize])).collect();
                let mx = terms.iter().map(|t| t.1.abs()).fold(e.rhs.abs(), f64::max);
                let mx = if mx > 0.0 { mx } else { 1.0 };
                (terms.into_iter().map(|(a, v)| (a, v / mx)).collect(), e.rhs / mx)
            })
            .collect();
        (SdpData { nvars: p, blocks, eq_rows }, scale)
    }

    /// Max equality residual, min block eigenvalue and block values at `y`.
    pub fn residuals(&self, y: &[f64]) -> (f64, f64, Vec<DMatrix<f64>>) {
        let yv = DVector::from_column_slice(y);
        let eq = self
            .eq_rows
            .iter()
            .map(|(t, f)| (t.iter().map(|&(a, v)| v * y[a as usize]).sum::<f64>() - f).abs())
            .fold(0.0, f64::max);
        let blocks: Vec<DMatrix<f64>> = self.blocks.iter().map(|b| b.eval(&yv)).collect();
        let me = blocks
            .iter()
            .filter(|b| b.nrows() > 0)
            .map(|b| b.clone().symmetric_eigenvalues().min())
            .fold(f64::INFINITY, f64::min);
        (eq, me, blocks)
    }
}
