use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use num_traits::{One, Zero};

use super::{PolyError, Polynomial, VarId};
use crate::model::MolpProblem;
use crate::rational::{int, Rational};
use crate::scaling::ScalingConstants;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    X,
    U,
    Lambda,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Variable {
    pub id: VarId,
    pub name: String,
    pub block: Block,
    /// Position inside its block (0-based).
    pub index: usize,
    pub lo: i64,
    pub hi: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub label: String,
    pub poly: Polynomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Variant {
    /// All `m` dual variables with the case split `u_i >= 1`.
    #[default]
    FullU,
    /// `u_i` pinned to `M_i`.
    ReducedU,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolySystem {
    pub equalities: Vec<Constraint>,
    pub inequalities: Vec<Constraint>,
    /// Catalog, in basis order.
    pub vars: Vec<Variable>,
    /// Variables removed from the catalog and the affine expressions that recover them.
    pub eliminated: Vec<(Variable, Polynomial)>,
    /// 0-based constraint index `i`.
    pub system: usize,
    pub variant: Variant,
    pub m_const: i64,
    pub mi: i64,
    pub dims: (usize, usize, usize),
}

impl PolySystem {
    pub fn var_ids(&self) -> Vec<VarId> {
        self.vars.iter().map(|v| v.id).collect()
    }

    pub fn var_name(&self, id: VarId) -> String {
        self.vars
            .iter()
            .chain(self.eliminated.iter().map(|(v, _)| v))
            .find(|v| v.id == id)
            .map_or_else(|| format!("v{}", id), |v| v.name.clone())
    }

    /// Largest half-degree `ceil(deg/2)` over all constraints.
    pub fn max_half_degree(&self) -> u32 {
        self.equalities
            .iter()
            .chain(&self.inequalities)
            .map(|c| c.poly.degree().div_ceil(2))
            .max()
            .unwrap_or(0)
            .max(1)
    }

    /// Extends a catalog point with the eliminated variables.
    pub fn complete_point(&self, point: &BTreeMap<VarId, Rational>) -> Result<BTreeMap<VarId, Rational>, PolyError> {
        let mut full = point.clone();
        for (v, expr) in &self.eliminated {
            let val = expr.evaluate(&full)?;
            full.insert(v.id, val);
        }
        Ok(full)
    }

    /// Index of the first violated constraint (equalities first, then inequalities).
    pub fn first_violation(&self, point: &BTreeMap<VarId, Rational>) -> Result<Option<(bool, usize)>, PolyError> {
        for (i, c) in self.equalities.iter().enumerate() {
            if !c.poly.evaluate(point)?.is_zero() {
                return Ok(Some((true, i)));
            }
        }
        for (i, c) in self.inequalities.iter().enumerate() {
            if c.poly.evaluate(point)? < Rational::zero() {
                return Ok(Some((false, i)));
            }
        }
        Ok(None)
    }

    /// Human-readable listing, one constraint per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let variant = match self.variant {
            Variant::FullU => "full-u",
            Variant::ReducedU => "reduced-u",
        };
        let _ = writeln!(s, "# system {} ({}), M = {}, M_i = {}", self.system + 1, variant, self.m_const, self.mi);
        for v in &self.vars {
            let _ = writeln!(s, "var {} in [{}, {}]", v.name, v.lo, v.hi);
        }
        let name = |id: VarId| self.var_name(id);
        for (v, e) in &self.eliminated {
            let _ = write!(s, "let {} = ", v.name);
            let _ = e.write_with(&mut s, &name);
            s.push('\n');
        }
        for (c, suffix) in self
            .equalities
            .iter()
            .map(|c| (c, "= 0"))
            .chain(self.inequalities.iter().map(|c| (c, ">= 0")))
        {
            let _ = write!(s, "{}: ", c.label);
            let _ = c.poly.write_with(&mut s, &name);
            let _ = writeln!(s, " {}", suffix);
        }
        s
    }
}

/// `prod_{l=0}^{K} (v - l)`.
pub fn grid_polynomial(var: VarId, k: i64) -> Polynomial {
    let v = Polynomial::var(var);
    let mut p = Polynomial::constant(Rational::one());
    for l in 0..=k {
        p = p.mul(&v.sub(&Polynomial::constant(int(l))));
    }
    p
}

fn lin(terms: impl IntoIterator<Item = (VarId, i64)>, constant: i64) -> Polynomial {
    let mut p = Polynomial::constant(int(constant));
    for (v, c) in terms {
        p = p.add(&Polynomial::var(v).scale(&int(c)));
    }
    p
}

/// Builds the polynomial system for constraint `i` (0-based).
pub fn build_sys_i(
    problem: &MolpProblem,
    i: usize,
    consts: &ScalingConstants,
    variant: Variant,
) -> Result<PolySystem, PolyError> {
    let (n, m, k) = (problem.n(), problem.m(), problem.k());
    if i >= m || consts.mi.len() != m {
        return Err(PolyError::BadIndex(i));
    }
    let big_m = consts.m;
    let mi = consts.mi[i];
    let xid = |j: usize| j as VarId;
    let uid = |s: usize| (n + s) as VarId;
    let lid = |r: usize| (n + m + r) as VarId;
    let has_u = |s: usize| variant == Variant::FullU || s != i;
    // u_s as a polynomial (the pinned u_i is the constant M_i).
    let upoly = |s: usize| if has_u(s) { Polynomial::var(uid(s)) } else { Polynomial::constant(int(mi)) };

    let mut vars = Vec::new();
    for j in 0..n {
        vars.push(Variable {
            id: xid(j),
            name: format!("x{}", j + 1),
            block: Block::X,
            index: j,
            lo: 0,
            hi: problem.ub_primal[j] * big_m,
        });
    }
    for s in (0..m).filter(|&s| has_u(s)) {
        vars.push(Variable {
            id: uid(s),
            name: format!("u{}", s + 1),
            block: Block::U,
            index: s,
            lo: 0,
            hi: problem.ub_dual[s] * mi,
        });
    }
    for r in 0..k {
        vars.push(Variable { id: lid(r), name: format!("l{}", r + 1), block: Block::Lambda, index: r, lo: 0, hi: mi });
    }

    let mut eqs = Vec::new();
    let mut ineqs = Vec::new();
    let c = |label: String, poly: Polynomial| Constraint { label, poly };

    eqs.push(c("h0".into(), lin((0..k).map(|r| (lid(r), 1)), -mi)));
    let slack = |s: usize| lin((0..n).map(|j| (xid(j), -problem.a[s][j])), big_m * problem.b[s]);
    let mut h1 = Polynomial::zero();
    for s in 0..m {
        h1 = h1.add(&upoly(s).mul(&slack(s)));
    }
    eqs.push(c("h1".into(), h1));
    // reduced costs sum_l lambda_l c^l_j - (u^t A)_j
    let reduced = |j: usize| {
        let mut p = lin((0..k).map(|r| (lid(r), problem.c[r][j])), 0);
        for s in 0..m {
            p = p.sub(&upoly(s).scale(&int(problem.a[s][j])));
        }
        p
    };
    let mut h2 = Polynomial::zero();
    for j in 0..n {
        h2 = h2.add(&reduced(j).mul(&Polynomial::var(xid(j))));
    }
    eqs.push(c("h2".into(), h2));
    for j in 0..n {
        eqs.push(c(format!("p{}", j + 1), grid_polynomial(xid(j), problem.ub_primal[j] * big_m)));
    }
    for s in (0..m).filter(|&s| has_u(s)) {
        eqs.push(c(format!("q{}", s + 1), grid_polynomial(uid(s), problem.ub_dual[s] * mi)));
    }
    for r in 0..k {
        eqs.push(c(format!("t{}", r + 1), grid_polynomial(lid(r), mi)));
    }

    for s in 0..m {
        ineqs.push(c(format!("g0_{}", s + 1), slack(s).scale(&-Rational::one())));
    }
    for j in 0..n {
        ineqs.push(c(format!("g{}", j + 1), reduced(j)));
    }
    if variant == Variant::FullU {
        ineqs.push(c(format!("u{}-1", i + 1), lin([(uid(i), 1)], -1)));
    }
    for v in &vars {
        ineqs.push(c(format!("{}>=0", v.name), Polynomial::var(v.id)));
    }

    Ok(PolySystem {
        equalities: eqs,
        inequalities: ineqs,
        vars,
        eliminated: Vec::new(),
        system: i,
        variant,
        m_const: big_m,
        mi,
        dims: (n, m, k),
    })
}

/// Replaces `var` by an affine `replacement` everywhere and removes it from the
/// catalog. Equalities that become identically zero are dropped.
pub fn substitute_affine(sys: &PolySystem, var: VarId, replacement: &Polynomial) -> Result<PolySystem, PolyError> {
    if replacement.degree() > 1 || replacement.contains_var(var) {
        return Err(PolyError::NonAffineReplacement);
    }
    let pos = sys.vars.iter().position(|v| v.id == var).ok_or(PolyError::UnknownVariable(var))?;
    let mut out = sys.clone();
    let removed = out.vars.remove(pos);
    let sub = |cs: &[Constraint]| -> Vec<Constraint> {
        cs.iter()
            .map(|c| Constraint { label: c.label.clone(), poly: c.poly.substitute(var, replacement) })
            .collect()
    };
    out.equalities = sub(&sys.equalities).into_iter().filter(|c| !c.poly.is_zero()).collect();
    out.inequalities = sub(&sys.inequalities);
    for (_, e) in out.eliminated.iter_mut() {
        *e = e.substitute(var, replacement);
    }
    out.eliminated.push((removed, replacement.clone()));
    Ok(out)
}

/// Eliminates the last weight via `lambda_k = M_i - sum_{r<k} lambda_r`.
pub fn eliminate_lambda(sys: &PolySystem) -> Result<PolySystem, PolyError> {
    let lambdas: Vec<&super::Variable> = sys.vars.iter().filter(|v| v.block == Block::Lambda).collect();
    let Some(last) = lambdas.last() else {
        return Ok(sys.clone());
    };
    let mut repl = Polynomial::constant(int(sys.mi));
    for v in &lambdas[..lambdas.len() - 1] {
        repl = repl.sub(&Polynomial::var(v.id));
    }
    substitute_affine(sys, last.id, &repl)
}
