//! Moment relaxations of polynomial systems.

mod basis;

pub use basis::{basis_size, enumerate_monomials, Exponents, MonomialBasis};

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::poly::{PolySystem, Polynomial, VarId};
use crate::rational::{to_f64, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MomentError {
    #[error("relaxation order {got} is below the required half-degree {needed}")]
    OrderTooSmall { needed: u32, got: u32 },
    #[error("polynomial uses a variable outside the catalog")]
    UnknownVariable,
}

/// Upper-triangular entry of a symmetric matrix-valued linear map of `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEntry {
    pub r: u32,
    pub c: u32,
    pub terms: Vec<(u32, f64)>,
}

/// Symmetric matrix whose entries are linear forms in the moment vector.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SymMap {
    pub size: usize,
    pub entries: Vec<SymEntry>,
}

impl SymMap {
    pub fn evaluate(&self, y: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.size, self.size);
        for e in &self.entries {
            let v: f64 = e.terms.iter().map(|&(a, c)| c * y[a as usize]).sum();
            m[(e.r as usize, e.c as usize)] = v;
            m[(e.c as usize, e.r as usize)] = v;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsdBlock {
    pub label: String,
    /// Degree of the row/column monomial basis.
    pub order: u32,
    pub map: SymMap,
}

/// One scalar equation `sum coef * y_alpha = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct EqualityRow {
    pub label: String,
    pub terms: Vec<(u32, f64)>,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RelaxationOptions {
    /// Adds `(v - lo)(hi - v) >= 0` localizers for every catalog variable.
    pub range_localizers: bool,
    /// Multiplies each equality `h` by every monomial of degree `<= 2N - deg h`
    /// instead of `<= 2(N - ceil(deg h / 2))`.
    pub extended_multipliers: bool,
}

impl Default for RelaxationOptions {
    fn default() -> Self {
        RelaxationOptions { range_localizers: true, extended_multipliers: true }
    }
}

impl RelaxationOptions {
    /// Only the constraints listed by the system itself.
    pub fn plain() -> Self {
        RelaxationOptions { range_localizers: false, extended_multipliers: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentRelaxation {
    pub order: u32,
    pub var_ids: Vec<VarId>,
    pub var_names: Vec<String>,
    /// Upper end of each variable's range (at least 1); used to rescale moments.
    pub var_scale: Vec<f64>,
    /// All monomials of degree `<= 2N`; `y` is indexed by this basis.
    pub moments: MonomialBasis,
    /// Block 0 is the moment matrix `M_N(y)`.
    pub blocks: Vec<PsdBlock>,
    /// Row 0 is the normalization `y_0 = 1`.
    pub equalities: Vec<EqualityRow>,
}

impl MomentRelaxation {
    pub fn nvars(&self) -> usize {
        self.var_ids.len()
    }

    pub fn dim(&self) -> usize {
        self.moments.len()
    }

    /// Moments of the Dirac measure at `z`.
    pub fn dirac_moments(&self, z: &[f64]) -> Vec<f64> {
        self.moments
            .iter()
            .map(|e| e.iter().zip(z).map(|(&k, &v)| num_traits::Float::powi(v, k as i32)).product())
            .collect()
    }

    /// Moment matrix `M_t(y)` for `t <= N`.
    pub fn moment_matrix(&self, y: &[f64], t: u32) -> DMatrix<f64> {
        let size = self.moments.count_upto(t);
        let mut m = DMatrix::zeros(size, size);
        for r in 0..size {
            for c in r..size {
                let idx = self.moments.product_index(r, c, &self.moments).expect("moment index within 2N");
                m[(r, c)] = y[idx];
                m[(c, r)] = y[idx];
            }
        }
        m
    }

    /// Moment scale `prod s_v^alpha_v` for every moment.
    pub fn moment_scale(&self) -> Vec<f64> {
        self.moments
            .iter()
            .map(|e| e.iter().zip(&self.var_scale).map(|(&k, &s)| num_traits::Float::powi(s, k as i32)).product())
            .collect()
    }
}

/// Dense exponent form of `p` over the catalog order.
pub fn dense_terms(p: &Polynomial, order: &[VarId]) -> Result<Vec<(Exponents, Rational)>, MomentError> {
    p.terms()
        .map(|(m, c)| m.dense(order).map(|e| (e, c.clone())).ok_or(MomentError::UnknownVariable))
        .collect()
}

/// `(r, c)` entry holds the moment index of `basis[r] * basis[c]`.
pub fn moment_matrix_map(basis: &MonomialBasis, moments: &MonomialBasis) -> Vec<Vec<usize>> {
    (0..basis.len())
        .map(|r| (0..basis.len()).map(|c| basis.product_index(r, c, moments).expect("moment basis too small")).collect())
        .collect()
}

fn shifted(e: &[u16], a: &[u16], b: &[u16]) -> Exponents {
    e.iter().zip(a).zip(b).map(|((x, y), z)| x + y + z).collect()
}

/// Localizing map of `g` over `basis`: entry `(r, c)` is `sum_d g_d y_{d + b_r + b_c}`.
pub fn localizing_matrix_map(
    g: &[(Exponents, f64)],
    basis: &MonomialBasis,
    moments: &MonomialBasis,
) -> Result<SymMap, MomentError> {
    let gdeg = g.iter().map(|(e, _)| e.iter().map(|&k| k as u32).sum::<u32>()).max().unwrap_or(0);
    if gdeg + 2 * basis.degree() > moments.degree() {
        return Err(MomentError::OrderTooSmall {
            needed: (gdeg + 2 * basis.degree()).div_ceil(2),
            got: moments.degree() / 2,
        });
    }
    let n = basis.len();
    let mut entries = Vec::with_capacity(n * (n + 1) / 2);
    for r in 0..n {
        for c in r..n {
            let mut terms: Vec<(u32, f64)> = g
                .iter()
                .map(|(e, coef)| {
                    let idx = moments.index_of(&shifted(e, basis.get(r), basis.get(c))).expect("degree checked");
                    (idx as u32, *coef)
                })
                .filter(|&(_, v)| v != 0.0)
                .collect();
            terms.sort_by_key(|&(i, _)| i);
            entries.push(SymEntry { r: r as u32, c: c as u32, terms });
        }
    }
    Ok(SymMap { size: n, entries })
}

fn to_float_terms(t: &[(Exponents, Rational)]) -> Vec<(Exponents, f64)> {
    t.iter().map(|(e, c)| (e.clone(), to_f64(c))).collect()
}

/// Builds the order-`n` moment relaxation of `sys`.
pub fn assemble_relaxation(sys: &PolySystem, n: u32, opts: &RelaxationOptions) -> Result<MomentRelaxation, MomentError> {
    let order: Vec<VarId> = sys.var_ids();
    let nv = order.len();
    let needed = sys.max_half_degree();
    if n < needed {
        return Err(MomentError::OrderTooSmall { needed, got: n });
    }
    let moments = enumerate_monomials(nv, 2 * n);
    let mut blocks = Vec::new();
    let full = enumerate_monomials(nv, n);
    let one = [(alloc::vec![0u16; nv], 1.0)];
    blocks.push(PsdBlock { label: "moment".into(), order: n, map: localizing_matrix_map(&one, &full, &moments)? });

    let mut ineqs: Vec<(String, Vec<(Exponents, Rational)>)> = Vec::new();
    for c in &sys.inequalities {
        ineqs.push((c.label.clone(), dense_terms(&c.poly, &order)?));
    }
    if opts.range_localizers {
        for v in &sys.vars {
            let x = Polynomial::var(v.id);
            let lo = Polynomial::constant(crate::rational::int(v.lo));
            let hi = Polynomial::constant(crate::rational::int(v.hi));
            let p = x.sub(&lo).mul(&hi.sub(&x));
            ineqs.push((format!("range_{}", v.name), dense_terms(&p, &order)?));
        }
    }
    for (label, terms) in &ineqs {
        let deg = terms.iter().map(|(e, _)| e.iter().map(|&k| k as u32).sum::<u32>()).max().unwrap_or(0);
        let d = n - deg.div_ceil(2);
        let basis = enumerate_monomials(nv, d);
        blocks.push(PsdBlock { label: label.clone(), order: d, map: localizing_matrix_map(&to_float_terms(terms), &basis, &moments)? });
    }

    let mut equalities = Vec::new();
    equalities.push(EqualityRow { label: "normalization".into(), terms: alloc::vec![(0, 1.0)], rhs: 1.0 });
    let mut seen: BTreeSet<Vec<(u32, Rational)>> = BTreeSet::new();
    for c in &sys.equalities {
        let terms = dense_terms(&c.poly, &order)?;
        let deg = c.poly.degree();
        let mdeg = if opts.extended_multipliers { 2 * n - deg } else { 2 * (n - deg.div_ceil(2)) };
        let mult = enumerate_monomials(nv, mdeg);
        let zero = alloc::vec![0u16; nv];
        for (mi, g) in mult.iter().enumerate() {
            let mut row: Vec<(u32, Rational)> = terms
                .iter()
                .map(|(e, coef)| (moments.index_of(&shifted(e, g, &zero)).expect("degree checked") as u32, coef.clone()))
                .collect();
            row.sort_by_key(|r| r.0);
            if row.is_empty() {
                continue;
            }
            let lead = row.last().unwrap().1.clone();
            let canon: Vec<(u32, Rational)> = row.iter().map(|(i, v)| (*i, v / &lead)).collect();
            if !seen.insert(canon.clone()) {
                continue;
            }
            let mx = canon.iter().map(|(_, v)| v.abs()).fold(Rational::zero(), |a, b| if b > a { b } else { a });
            equalities.push(EqualityRow {
                label: format!("{}*m{}", c.label, mi),
                terms: canon.iter().map(|(i, v)| (*i, to_f64(&(v / &mx)))).collect(),
                rhs: 0.0,
            });
        }
    }

    Ok(MomentRelaxation {
        order: n,
        var_ids: order,
        var_names: sys.vars.iter().map(|v| v.name.clone()).collect(),
        var_scale: sys.vars.iter().map(|v| (v.hi.max(v.lo.abs()).max(1)) as f64).collect(),
        moments,
        blocks,
        equalities,
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::model::MolpProblem;
    use crate::poly::{build_sys_i, eliminate_lambda, Block, Constraint, Variable, Variant};
    use crate::scaling::ScalingConstants;
    use alloc::vec;

    pub(crate) fn univariate(eqs: Vec<Polynomial>, ineqs: Vec<Polynomial>, hi: i64) -> PolySystem {
        PolySystem {
            equalities: eqs.into_iter().enumerate().map(|(i, p)| Constraint { label: format!("e{}", i), poly: p }).collect(),
            inequalities: ineqs.into_iter().enumerate().map(|(i, p)| Constraint { label: format!("g{}", i), poly: p }).collect(),
            vars: vec![Variable { id: 0, name: "x".into(), block: Block::X, index: 0, lo: 0, hi }],
            eliminated: vec![],
            system: 0,
            variant: Variant::FullU,
            m_const: 1,
            mi: 1,
            dims: (1, 0, 0),
        }
    }

    #[test]
    fn univariate_maps() {
        let b1 = enumerate_monomials(1, 1);
        let mom = enumerate_monomials(1, 3);
        assert_eq!(moment_matrix_map(&b1, &mom), vec![vec![0, 1], vec![1, 2]]);
        let x = [(vec![1u16], 1.0)];
        let m = localizing_matrix_map(&x, &b1, &mom).unwrap();
        let y = [10.0, 11.0, 12.0, 13.0];
        assert_eq!(m.evaluate(&y), DMatrix::from_row_slice(2, 2, &[11.0, 12.0, 12.0, 13.0]));
        let g = [(vec![0u16], 2.0), (vec![1u16], -1.0)];
        let m = localizing_matrix_map(&g, &b1, &mom).unwrap();
        assert_eq!(m.evaluate(&y), DMatrix::from_row_slice(2, 2, &[9.0, 10.0, 10.0, 11.0]));
        let one = [(vec![0u16], 1.0)];
        let mm = localizing_matrix_map(&one, &b1, &mom).unwrap();
        assert_eq!(mm.evaluate(&y), DMatrix::from_row_slice(2, 2, &[10.0, 11.0, 11.0, 12.0]));
        let b2 = enumerate_monomials(1, 2);
        assert!(localizing_matrix_map(&x, &b2, &mom).is_err());
    }

    #[test]
    fn univariate_toy() {
        let x = Polynomial::var(0);
        let sys = univariate(vec![x.mul(&x).sub(&x)], vec![x.clone()], 1);
        let rel = assemble_relaxation(&sys, 1, &RelaxationOptions::plain()).unwrap();
        assert_eq!(rel.blocks.len(), 2);
        assert_eq!(rel.blocks[0].map.size, 2);
        assert_eq!(rel.blocks[1].map.size, 1);
        assert_eq!(rel.equalities.len(), 2);
        assert_eq!(rel.equalities[1].terms, vec![(1, -1.0), (2, 1.0)]);
        let sixth = univariate(vec![x.pow(6)], vec![], 1);
        assert!(matches!(
            assemble_relaxation(&sixth, 1, &RelaxationOptions::plain()),
            Err(MomentError::OrderTooSmall { needed: 3, got: 1 })
        ));
    }

    #[test]
    fn example1_sizes() {
        let p = MolpProblem::new(
            vec![vec![1, 0], vec![0, 1]],
            vec![vec![2, 1], vec![1, 1], vec![1, 2]],
            vec![4, 3, 4],
            vec![5, 5],
            vec![1, 1, 1],
        )
        .unwrap();
        let consts = ScalingConstants::overridden(1, vec![6, 6, 6]);
        let sys = eliminate_lambda(&build_sys_i(&p, 0, &consts, Variant::FullU).unwrap()).unwrap();
        let rel = assemble_relaxation(&sys, 4, &RelaxationOptions::default()).unwrap();
        assert_eq!(rel.blocks[0].map.size, 210);
        assert!(rel.blocks[1..].iter().all(|b| b.map.size == 84));
        assert_eq!(rel.dim(), 3003);
        // Dirac moments of a solution satisfy every equality.
        let z = [1.0, 2.0, 2.0, 0.0, 0.0, 4.0];
        let y = rel.dirac_moments(&z);
        for row in &rel.equalities {
            let v: f64 = row.terms.iter().map(|&(a, c)| c * y[a as usize]).sum();
            assert!((v - row.rhs).abs() < 1e-6 * (1.0 + y.iter().fold(0.0f64, |a, b| a.max(b.abs()))));
        }
    }
}
