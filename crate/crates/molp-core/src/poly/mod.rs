//! Sparse multivariate polynomials with exact rational coefficients, and the
//! per-constraint systems built from them.

mod system;

pub use system::{build_sys_i, eliminate_lambda, grid_polynomial, substitute_affine, Block, Constraint, PolySystem, Variable, Variant};

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt::{self, Write};

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::Rational;

pub type VarId = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("variable {0} is not assigned")]
    UnassignedVariable(VarId),
    #[error("replacement must be affine and free of the substituted variable")]
    NonAffineReplacement,
    #[error("system index {0} out of range")]
    BadIndex(usize),
    #[error("variable {0} is not in the catalog")]
    UnknownVariable(VarId),
}

/// Product of variables raised to positive powers, stored sorted by variable id.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<(VarId, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(v: VarId) -> Self {
        Monomial(alloc::vec![(v, 1)])
    }

    pub fn from_pairs(mut pairs: Vec<(VarId, u32)>) -> Self {
        pairs.retain(|&(_, e)| e > 0);
        pairs.sort_unstable();
        let mut out: Vec<(VarId, u32)> = Vec::with_capacity(pairs.len());
        for (v, e) in pairs {
            match out.last_mut() {
                Some((lv, le)) if *lv == v => *le += e,
                _ => out.push((v, e)),
            }
        }
        Monomial(out)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, e)| e).sum()
    }

    pub fn exponent(&self, v: VarId) -> u32 {
        self.0.iter().find(|&&(w, _)| w == v).map_or(0, |&(_, e)| e)
    }

    pub fn pairs(&self) -> &[(VarId, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    /// Removes `v` and returns its exponent.
    pub fn without(&self, v: VarId) -> (Monomial, u32) {
        let e = self.exponent(v);
        (Monomial(self.0.iter().copied().filter(|&(w, _)| w != v).collect()), e)
    }

    /// Dense exponent vector over the given variable order.
    pub fn dense(&self, order: &[VarId]) -> Option<Vec<u16>> {
        let mut out = alloc::vec![0u16; order.len()];
        for &(v, e) in &self.0 {
            let pos = order.iter().position(|&w| w == v)?;
            out[pos] = e as u16;
        }
        Some(out)
    }
}

impl Ord for Monomial {
    /// Graded order: total degree first, then lexicographic with smaller variable
    /// ids ranking higher.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| {
            for (a, b) in self.0.iter().zip(&other.0) {
                if a.0 != b.0 {
                    return b.0.cmp(&a.0);
                }
                if a.1 != b.1 {
                    return a.1.cmp(&b.1);
                }
            }
            self.0.len().cmp(&other.0.len())
        })
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn constant(c: Rational) -> Self {
        let mut p = Polynomial::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn var(v: VarId) -> Self {
        let mut p = Polynomial::zero();
        p.add_term(Monomial::var(v), Rational::one());
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn variables(&self) -> Vec<VarId> {
        let mut vs: Vec<VarId> = self.terms.keys().flat_map(|m| m.0.iter().map(|&(v, _)| v)).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    pub fn contains_var(&self, v: VarId) -> bool {
        self.terms.keys().any(|m| m.exponent(v) > 0)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut r = self.clone();
        for (m, c) in &other.terms {
            r.add_term(m.clone(), c.clone());
        }
        r
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial { terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut r = Polynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                r.add_term(m1.mul(m2), c1 * c2);
            }
        }
        r
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut r = Polynomial::constant(Rational::one());
        for _ in 0..e {
            r = r.mul(self);
        }
        r
    }

    pub fn evaluate(&self, point: &BTreeMap<VarId, Rational>) -> Result<Rational, PolyError> {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for &(v, e) in &m.0 {
                let x = point.get(&v).ok_or(PolyError::UnassignedVariable(v))?;
                t *= num_traits::pow(x.clone(), e as usize);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Replaces every occurrence of `v` by `replacement`.
    pub fn substitute(&self, v: VarId, replacement: &Polynomial) -> Polynomial {
        let mut r = Polynomial::zero();
        let mut powers: Vec<Polynomial> = alloc::vec![Polynomial::constant(Rational::one())];
        for (m, c) in &self.terms {
            let (rest, e) = m.without(v);
            if e == 0 {
                r.add_term(m.clone(), c.clone());
                continue;
            }
            while powers.len() <= e as usize {
                let next = powers.last().unwrap().mul(replacement);
                powers.push(next);
            }
            let mut restp = Polynomial::zero();
            restp.add_term(rest, c.clone());
            r = r.add(&restp.mul(&powers[e as usize]));
        }
        r
    }

    /// Formats with the given variable names.
    pub fn write_with(&self, out: &mut impl Write, name: &dyn Fn(VarId) -> String) -> fmt::Result {
        if self.terms.is_empty() {
            return out.write_str("0");
        }
        for (idx, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            if idx == 0 {
                if neg {
                    out.write_str("-")?;
                }
            } else {
                out.write_str(if neg { " - " } else { " + " })?;
            }
            let unit = mag.is_one();
            if !unit || m.is_one() {
                write!(out, "{}", mag)?;
            }
            for (k, &(v, e)) in m.0.iter().enumerate() {
                if k > 0 || !unit {
                    out.write_str("*")?;
                }
                out.write_str(&name(v))?;
                if e > 1 {
                    write!(out, "^{}", e)?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_with(f, &|v| alloc::format!("v{}", v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use alloc::string::ToString;

    #[test]
    fn arithmetic_and_display() {
        let x = Polynomial::var(0);
        let p = x.mul(&x).add(&Polynomial::constant(int(1)));
        assert_eq!(p.to_string(), "v0^2 + 1");
        let mut pt = BTreeMap::new();
        pt.insert(0, int(2));
        assert_eq!(p.evaluate(&pt).unwrap(), int(5));
        assert_eq!(p.evaluate(&BTreeMap::new()), Err(PolyError::UnassignedVariable(0)));
        assert_eq!(p.sub(&p), Polynomial::zero());
    }

    #[test]
    fn graded_order() {
        let x1 = Monomial::var(0);
        let x2 = Monomial::var(1);
        let mut v = alloc::vec![x2.mul(&x2), x1.clone(), Monomial::one(), x1.mul(&x2), x2.clone(), x1.mul(&x1)];
        v.sort();
        assert_eq!(v, alloc::vec![Monomial::one(), x2.clone(), x1.clone(), x2.mul(&x2), x1.mul(&x2), x1.mul(&x1)]);
    }

    #[test]
    fn substitution() {
        // x*y with y = 6 - x -> 6x - x^2
        let x = Polynomial::var(0);
        let y = Polynomial::var(1);
        let r = Polynomial::constant(int(6)).sub(&x);
        let p = x.mul(&y).substitute(1, &r);
        assert_eq!(p, x.scale(&int(6)).sub(&x.mul(&x)));
        assert_eq!(x.substitute(1, &r), x);
    }
}
