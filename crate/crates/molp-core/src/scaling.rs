//! Integrality scaling constants `M`, `M_i` and sound dual bounds.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::model::MolpProblem;
use crate::oracle::{binomial, for_each_combination};

pub const DEFAULT_SUBSET_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalingError {
    #[error("{count} submatrices exceed the enumeration cap {cap}; supply an override")]
    CombinatorialLimit { count: u128, cap: u128 },
    #[error("constraint index {0} out of range")]
    BadIndex(usize),
    #[error("scaling constant {0} does not fit in 64 bits")]
    Overflow(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ComputedLcm,
    UserOverride,
    ConservativeMultiple,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScalingConstants {
    pub m: i64,
    pub mi: Vec<i64>,
    pub m_provenance: Provenance,
    pub mi_provenance: Vec<Provenance>,
}

impl ScalingConstants {
    pub fn overridden(m: i64, mi: Vec<i64>) -> Self {
        let mi_provenance = vec![Provenance::UserOverride; mi.len()];
        ScalingConstants { m, mi, m_provenance: Provenance::UserOverride, mi_provenance }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MiMode {
    Enumerate,
    Override(i64),
    /// lcm of `1..=factor_max`, multiplied onto the enumerated value when it is cheap,
    /// otherwise used alone.
    Conservative { factor_max: i64 },
}

/// Fraction-free (Bareiss) determinant.
pub fn integer_determinant(sq: &[Vec<BigInt>]) -> BigInt {
    let n = sq.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = sq.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

pub fn integer_determinant_i64(sq: &[Vec<i64>]) -> BigInt {
    let m: Vec<Vec<BigInt>> = sq.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
    integer_determinant(&m)
}

fn lcm_of_minors(rows: &[Vec<i64>], size: usize, cap: u128) -> Result<BigInt, ScalingError> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let count = binomial(rows.len(), size) * binomial(ncols, size);
    if count > cap {
        return Err(ScalingError::CombinatorialLimit { count, cap });
    }
    let mut acc = BigInt::one();
    for_each_combination(rows.len(), size, |rs| {
        for_each_combination(ncols, size, |cs| {
            let sub: Vec<Vec<i64>> = rs.iter().map(|&r| cs.iter().map(|&c| rows[r][c]).collect()).collect();
            let d = integer_determinant_i64(&sub);
            if !d.is_zero() {
                acc = acc.lcm(&d.abs());
            }
        });
    });
    Ok(acc)
}

fn to_i64(v: &BigInt) -> Result<i64, ScalingError> {
    v.to_i64().ok_or_else(|| ScalingError::Overflow(format!("{}", v)))
}

/// lcm of `|det|` over the nonsingular `n x n` submatrices of `[A; I_n]`.
pub fn compute_m(problem: &MolpProblem) -> Result<i64, ScalingError> {
    compute_m_capped(problem, DEFAULT_SUBSET_CAP)
}

pub fn compute_m_capped(problem: &MolpProblem, cap: u128) -> Result<i64, ScalingError> {
    let n = problem.n();
    let mut rows = problem.a.clone();
    for j in 0..n {
        let mut r = vec![0; n];
        r[j] = 1;
        rows.push(r);
    }
    let count = binomial(rows.len(), n);
    if count > cap {
        return Err(ScalingError::CombinatorialLimit { count, cap });
    }
    let mut acc = BigInt::one();
    for_each_combination(rows.len(), n, |rs| {
        let sub: Vec<Vec<i64>> = rs.iter().map(|&r| rows[r].clone()).collect();
        let d = integer_determinant_i64(&sub);
        if !d.is_zero() {
            acc = acc.lcm(&d.abs());
        }
    });
    to_i64(&acc)
}

/// lcm of `|det|` over the `n x n` submatrices of `A` alone (the literal reading).
pub fn compute_m_a_only(problem: &MolpProblem) -> Result<i64, ScalingError> {
    let n = problem.n();
    if problem.m() < n {
        return Ok(1);
    }
    let mut acc = BigInt::one();
    for_each_combination(problem.m(), n, |rs| {
        let sub: Vec<Vec<i64>> = rs.iter().map(|&r| problem.a[r].clone()).collect();
        let d = integer_determinant_i64(&sub);
        if !d.is_zero() {
            acc = acc.lcm(&d.abs());
        }
    });
    to_i64(&acc)
}

/// Coefficient matrix of the certificate system in the variables `(lambda, u)`:
/// one row per column `j` of the reduced costs `sum lambda_l c^l_j - (u^t A)_j`,
/// then the simplex row `sum lambda = 1`. Every basic certificate solves a square
/// subsystem of these rows together with bound rows `lambda_l = 0`, `u_s = 0`, so
/// its denominators divide a minor of this matrix.
pub fn certificate_matrix(problem: &MolpProblem) -> Vec<Vec<i64>> {
    let (n, k) = (problem.n(), problem.k());
    let mut rows = Vec::with_capacity(n + 1);
    for j in 0..n {
        let mut r: Vec<i64> = problem.c.iter().map(|c| c[j]).collect();
        r.extend(problem.a.iter().map(|a| -a[j]));
        rows.push(r);
    }
    let mut s = vec![1; k];
    s.resize(k + problem.m(), 0);
    rows.push(s);
    rows
}

/// `M_i` for system `i` (0-based).
pub fn compute_mi(problem: &MolpProblem, i: usize, mode: MiMode) -> Result<i64, ScalingError> {
    compute_mi_capped(problem, i, mode, DEFAULT_SUBSET_CAP)
}

pub fn compute_mi_capped(problem: &MolpProblem, i: usize, mode: MiMode, cap: u128) -> Result<i64, ScalingError> {
    if i >= problem.m() {
        return Err(ScalingError::BadIndex(i));
    }
    match mode {
        MiMode::Override(v) => Ok(v),
        MiMode::Enumerate => enumerate_mi(problem, cap),
        MiMode::Conservative { factor_max } => {
            let mut acc = BigInt::one();
            for f in 1..=factor_max.max(1) {
                acc = acc.lcm(&BigInt::from(f));
            }
            if let Ok(e) = enumerate_mi(problem, cap) {
                acc = acc.lcm(&BigInt::from(e));
            }
            to_i64(&acc)
        }
    }
}

fn enumerate_mi(problem: &MolpProblem, cap: u128) -> Result<i64, ScalingError> {
    let rows = certificate_matrix(problem);
    let maxsize = rows.len().min(problem.k() + problem.m());
    let mut total: u128 = 0;
    for s in 1..=maxsize {
        total += binomial(rows.len(), s) * binomial(problem.k() + problem.m(), s);
    }
    if total > cap {
        return Err(ScalingError::CombinatorialLimit { count: total, cap });
    }
    let mut acc = BigInt::one();
    for s in 1..=maxsize {
        acc = acc.lcm(&lcm_of_minors(&rows, s, u128::MAX)?);
    }
    to_i64(&acc)
}

/// All constants at once: `M` computed over `[A; I]`, `M_i` per `mode`.
pub fn compute_constants(problem: &MolpProblem, mode: MiMode) -> Result<ScalingConstants, ScalingError> {
    let m = compute_m(problem)?;
    let mut mi = Vec::with_capacity(problem.m());
    let mut prov = Vec::with_capacity(problem.m());
    for i in 0..problem.m() {
        mi.push(compute_mi(problem, i, mode)?);
        prov.push(match mode {
            MiMode::Enumerate => Provenance::ComputedLcm,
            MiMode::Override(_) => Provenance::UserOverride,
            MiMode::Conservative { .. } => Provenance::ConservativeMultiple,
        });
    }
    Ok(ScalingConstants { m, mi, m_provenance: Provenance::ComputedLcm, mi_provenance: prov })
}

/// Hadamard-type bound on every dual coordinate of a basic certificate.
///
/// A basic `u_s` equals `det(B_s) / det(B)` for a nonsingular integer `B` drawn from
/// [`certificate_matrix`] plus unit rows, with the right-hand side `e_simplex` in
/// column `s` of `B_s`. `|det(B)| >= 1`, and `|det(B_s)|` is bounded by the product
/// of the full column norms of the other columns (unit rows add at most 1 to each).
pub fn suggest_dual_bounds(problem: &MolpProblem) -> Vec<i64> {
    let rows = certificate_matrix(problem);
    let ncols = problem.k() + problem.m();
    let norms_sq: Vec<BigInt> = (0..ncols)
        .map(|c| rows.iter().map(|r| BigInt::from(r[c]) * r[c]).sum::<BigInt>() + 1)
        .collect();
    (0..problem.m())
        .map(|s| {
            let col = problem.k() + s;
            let prod: BigInt = norms_sq
                .iter()
                .enumerate()
                .filter(|&(c, _)| c != col)
                .fold(BigInt::one(), |acc, (_, v)| acc * v);
            let root = prod.sqrt();
            let bound = if &root * &root == prod { root } else { root + 1 };
            bound.to_i64().unwrap_or(i64::MAX).max(1)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

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

    #[test]
    fn determinants() {
        assert_eq!(integer_determinant_i64(&[vec![2, 1], vec![1, 1]]), BigInt::from(1));
        assert_eq!(integer_determinant_i64(&[vec![2, 1], vec![1, 2]]), BigInt::from(3));
        let id: Vec<Vec<i64>> = (0..5).map(|i| (0..5).map(|j| (i == j) as i64).collect()).collect();
        assert_eq!(integer_determinant_i64(&id), BigInt::from(1));
        assert_eq!(integer_determinant_i64(&[vec![0, 1], vec![1, 0]]), BigInt::from(-1));
        assert_eq!(integer_determinant_i64(&[vec![1, 2], vec![2, 4]]), BigInt::from(0));
    }

    #[test]
    fn example1_m() {
        let p = example1();
        assert_eq!(compute_m_a_only(&p).unwrap(), 3);
        assert_eq!(compute_m(&p).unwrap(), 6);
        assert!(matches!(compute_m_capped(&p, 5), Err(ScalingError::CombinatorialLimit { .. })));
    }

    #[test]
    fn example1_mi_modes() {
        let p = example1();
        for i in 0..3 {
            assert_eq!(compute_mi(&p, i, MiMode::Override(6)).unwrap(), 6);
        }
        let e = compute_mi(&p, 0, MiMode::Enumerate).unwrap();
        let c = compute_mi(&p, 0, MiMode::Conservative { factor_max: 6 }).unwrap();
        assert_eq!(c % 60, 0);
        assert_eq!(c % e, 0);
        assert!(matches!(compute_mi(&p, 3, MiMode::Enumerate), Err(ScalingError::BadIndex(3))));
    }

    #[test]
    fn unimodular_single_objective() {
        let p = MolpProblem::new(vec![vec![1]], vec![vec![1]], vec![1], vec![3], vec![1]).unwrap();
        assert_eq!(compute_mi(&p, 0, MiMode::Enumerate).unwrap(), 1);
    }

    #[test]
    fn dual_bounds_positive() {
        assert!(suggest_dual_bounds(&example1()).iter().all(|&b| b >= 1));
        let p = MolpProblem::new(vec![vec![1, 0], vec![0, 1]], vec![vec![1, 0], vec![0, 1]], vec![1, 1], vec![3, 3], vec![1, 1])
            .unwrap();
        assert!(suggest_dual_bounds(&p).iter().all(|&b| b >= 1));
    }
}
