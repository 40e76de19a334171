//! Solution extraction from a moment vector: flat-extension rank test,
//! multiplication matrices, simultaneous Schur read-off, rounding and exact
//! verification.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;
use nalgebra::{DMatrix, SVD};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{verify_sys1, MolpProblem, ValidTriplet};
use crate::moment::{Exponents, MomentRelaxation, MonomialBasis};
use crate::oracle::{is_pareto, is_vertex};
use crate::poly::{PolySystem, VarId};
use crate::rational::{int, round_to_int, Rational};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtractError {
    #[error("numerical rank of M_{order} is ambiguous (gap {gap:.3e})")]
    AmbiguousRank { order: u32, gap: f64 },
    #[error("no flat extension up to the relaxation order")]
    NotFlat,
    #[error("extraction basis is ill-conditioned (condition number {cond:.3e})")]
    IllConditionedBasis { cond: f64 },
    #[error("combined multiplication matrix has a complex eigenvalue")]
    ComplexEigenvalue,
    #[error("extracted point {x:?} is not Pareto optimal")]
    OracleContradiction { x: Vec<Rational> },
    #[error("dimension mismatch")]
    Dimension,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractOptions {
    pub tol_rank: f64,
    pub gap_factor: f64,
    pub tol_round: f64,
    /// Flatness is tested as `rank M_t = rank M_{t - shift}`.
    pub shift: u32,
    pub seed: u64,
    pub max_cond: f64,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions { tol_rank: 1e-6, gap_factor: 1e3, tol_round: 1e-4, shift: 1, seed: 0, max_cond: 1e12 }
    }
}

/// Singular values in decreasing order.
pub fn singular_values(mat: &DMatrix<f64>) -> Vec<f64> {
    if mat.nrows() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = mat.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    s
}

/// Rank from a decreasing spectrum; `Err(gap)` when the gap test fails.
pub fn rank_from_spectrum(s: &[f64], tol_rank: f64, gap_factor: f64) -> Result<usize, f64> {
    let Some(&s1) = s.first() else {
        return Ok(0);
    };
    if s1 <= 0.0 {
        return Ok(0);
    }
    let r = s.iter().take_while(|&&v| v >= tol_rank * s1).count();
    if r < s.len() {
        let next = s[r];
        let gap = if next > 0.0 { s[r - 1] / next } else { f64::INFINITY };
        if gap < gap_factor {
            return Err(gap);
        }
    }
    Ok(r)
}

/// Numerical rank of a symmetric matrix with the relative tolerance and gap test.
pub fn numeric_rank(mat: &DMatrix<f64>, tol_rank: f64, gap_factor: f64) -> Result<usize, ExtractError> {
    rank_from_spectrum(&singular_values(mat), tol_rank, gap_factor).map_err(|gap| ExtractError::AmbiguousRank { order: 0, gap })
}

/// Moment matrix `M_t(y)` over `basis`, where `y` is indexed by `basis` too.
pub fn moment_matrix(basis: &MonomialBasis, y: &[f64], t: u32) -> DMatrix<f64> {
    let size = basis.count_upto(t);
    DMatrix::from_fn(size, size, |r, c| y[basis.product_index(r, c, basis).expect("moment of degree within basis")])
}

/// Ranks and spectra of `M_0 .. M_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankProfile {
    /// `None` where the gap test failed.
    pub ranks: Vec<Option<usize>>,
    pub spectra: Vec<Vec<f64>>,
}

pub fn rank_profile(basis: &MonomialBasis, y: &[f64], n: u32, tol_rank: f64, gap_factor: f64) -> RankProfile {
    let mut ranks = Vec::new();
    let mut spectra = Vec::new();
    for t in 0..=n {
        let s = singular_values(&moment_matrix(basis, y, t));
        ranks.push(rank_from_spectrum(&s, tol_rank, gap_factor).ok());
        spectra.push(s);
    }
    RankProfile { ranks, spectra }
}

/// Smallest `t` in `[shift, N]` with `rank M_t = rank M_{t - shift}`, skipping orders
/// whose rank is ambiguous.
pub fn flat_extension_check(profile: &RankProfile, shift: u32) -> Result<(u32, usize), ExtractError> {
    let n = profile.ranks.len() as u32 - 1;
    let mut ambiguous = None;
    for t in shift.max(1)..=n {
        match (profile.ranks[t as usize], profile.ranks[(t - shift) as usize]) {
            (Some(a), Some(b)) if a == b => return Ok((t, a)),
            (Some(_), Some(_)) => {}
            (None, _) => ambiguous = ambiguous.or(Some(t)),
            (_, None) => ambiguous = ambiguous.or(Some(t - shift)),
        }
    }
    match ambiguous {
        Some(order) => {
            let s = &profile.spectra[order as usize];
            let gap = gap_at_tolerance(s);
            Err(ExtractError::AmbiguousRank { order, gap })
        }
        None => Err(ExtractError::NotFlat),
    }
}

fn gap_at_tolerance(s: &[f64]) -> f64 {
    s.windows(2).map(|w| if w[1] > 0.0 { w[0] / w[1] } else { f64::INFINITY }).fold(f64::INFINITY, f64::min)
}

/// Greedy pivoted Cholesky on `M_t` restricted to columns of degree `<= max_deg`.
/// A lower-degree column wins whenever its residual is within a factor 100 of
/// the best remaining residual.
pub fn extraction_basis(m: &DMatrix<f64>, degrees: &[u32], r: usize, max_deg: u32, max_cond: f64) -> Result<Vec<usize>, ExtractError> {
    let size = m.nrows();
    let cand: Vec<usize> = (0..size).filter(|&j| degrees[j] <= max_deg).collect();
    let mut d: Vec<f64> = (0..size).map(|j| m[(j, j)]).collect();
    let scale = cand.iter().map(|&j| d[j]).fold(0.0, f64::max);
    let mut l = DMatrix::<f64>::zeros(size, r);
    let mut piv = Vec::with_capacity(r);
    while piv.len() < r {
        let free: Vec<usize> = cand.iter().copied().filter(|j| !piv.contains(j)).collect();
        let best = free.iter().map(|&j| d[j]).fold(0.0, f64::max);
        if best <= 1e-14 * scale {
            return Err(ExtractError::IllConditionedBasis { cond: f64::INFINITY });
        }
        let j = free
            .iter()
            .copied()
            .filter(|&j| d[j] >= 1e-2 * best)
            .min_by(|&a, &b| degrees[a].cmp(&degrees[b]).then(d[b].partial_cmp(&d[a]).unwrap_or(core::cmp::Ordering::Equal)))
            .expect("nonempty");
        let k = piv.len();
        let pivot = d[j].sqrt();
        for i in 0..size {
            let mut v = m[(i, j)];
            for q in 0..k {
                v -= l[(i, q)] * l[(j, q)];
            }
            l[(i, k)] = v / pivot;
        }
        for i in 0..size {
            d[i] -= l[(i, k)] * l[(i, k)];
        }
        piv.push(j);
    }
    let sub = DMatrix::from_fn(r, r, |a, b| m[(piv[a], piv[b])]);
    let s = singular_values(&sub);
    let cond = s[0] / s[r - 1].max(f64::MIN_POSITIVE);
    if cond > max_cond {
        return Err(ExtractError::IllConditionedBasis { cond });
    }
    Ok(piv)
}

/// For each variable `v`, the `r x r` matrix `X` minimizing `||M_t[:, B] X - M_t[:, vB]||`.
pub fn multiplication_matrices(basis: &MonomialBasis, m: &DMatrix<f64>, pivots: &[usize]) -> Result<Vec<DMatrix<f64>>, ExtractError> {
    let size = m.nrows();
    let r = pivots.len();
    let cb = DMatrix::from_fn(size, r, |i, k| m[(i, pivots[k])]);
    let svd = SVD::new(cb, true, true);
    let smax = svd.singular_values.max();
    let mut out = Vec::with_capacity(basis.nvars());
    for v in 0..basis.nvars() {
        let mut cols = Vec::with_capacity(r);
        for &p in pivots {
            let mut e: Exponents = basis.get(p).to_vec();
            e[v] += 1;
            let idx = basis.index_of(&e).filter(|&i| i < size).ok_or(ExtractError::Dimension)?;
            cols.push(idx);
        }
        let rhs = DMatrix::from_fn(size, r, |i, k| m[(i, cols[k])]);
        let x = svd.solve(&rhs, 1e-13 * smax).map_err(|_| ExtractError::IllConditionedBasis { cond: f64::INFINITY })?;
        out.push(x);
    }
    Ok(out)
}

/// Reads common eigenvalues from commuting matrices through the Schur form of a
/// seeded random convex combination. Returns one point per Schur vector.
pub fn common_eigen_extract(mats: &[DMatrix<f64>], seed: u64) -> Result<Vec<Vec<f64>>, ExtractError> {
    let Some(first) = mats.first() else {
        return Ok(Vec::new());
    };
    let r = first.nrows();
    if mats.iter().any(|m| m.nrows() != r || m.ncols() != r) {
        return Err(ExtractError::Dimension);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w: Vec<f64> = mats.iter().map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    let mut comb = DMatrix::<f64>::zeros(r, r);
    for (m, &c) in mats.iter().zip(&w) {
        comb += m * c;
    }
    let schur = nalgebra::linalg::Schur::try_new(comb, 1e-14, 10_000).ok_or(ExtractError::ComplexEigenvalue)?;
    let (q, t) = schur.unpack();
    let tn = t.amax().max(1.0);
    for j in 0..r.saturating_sub(1) {
        if t[(j + 1, j)].abs() > 1e-8 * tn {
            return Err(ExtractError::ComplexEigenvalue);
        }
    }
    Ok((0..r)
        .map(|j| {
            let qj = q.column(j);
            mats.iter().map(|m| qj.dot(&(m * qj))).collect()
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    NonIntegral { var: String, value: f64 },
    OutOfRange { var: String, value: i64 },
    ConstraintViolation { label: String },
}

/// Integer point of a system, including eliminated variables.
pub type SystemPoint = BTreeMap<VarId, Rational>;

/// Rounds each numeric point (catalog order) and checks it exactly against `sys`.
/// Duplicates after rounding are merged.
pub fn round_and_verify(points: &[Vec<f64>], sys: &PolySystem, tol_round: f64) -> (Vec<SystemPoint>, Vec<(Vec<f64>, Rejection)>) {
    let mut ok: Vec<SystemPoint> = Vec::new();
    let mut rejected = Vec::new();
    'outer: for p in points {
        if p.len() != sys.vars.len() {
            rejected.push((p.clone(), Rejection::NonIntegral { var: String::new(), value: f64::NAN }));
            continue;
        }
        let mut point = SystemPoint::new();
        for (v, &val) in sys.vars.iter().zip(p) {
            let rounded = val.round();
            if !val.is_finite() || (val - rounded).abs() > tol_round {
                rejected.push((p.clone(), Rejection::NonIntegral { var: v.name.clone(), value: val }));
                continue 'outer;
            }
            let Some(z) = round_to_int(val) else {
                rejected.push((p.clone(), Rejection::NonIntegral { var: v.name.clone(), value: val }));
                continue 'outer;
            };
            let zi = rounded as i64;
            if zi < v.lo || zi > v.hi {
                rejected.push((p.clone(), Rejection::OutOfRange { var: v.name.clone(), value: zi }));
                continue 'outer;
            }
            point.insert(v.id, Rational::from_integer(z));
        }
        let full = match sys.complete_point(&point) {
            Ok(f) => f,
            Err(_) => {
                rejected.push((p.clone(), Rejection::ConstraintViolation { label: "elimination".into() }));
                continue;
            }
        };
        match sys.first_violation(&full) {
            Ok(None) => {
                if !ok.contains(&full) {
                    ok.push(full);
                }
            }
            Ok(Some((is_eq, i))) => {
                let label = if is_eq { sys.equalities[i].label.clone() } else { sys.inequalities[i].label.clone() };
                rejected.push((p.clone(), Rejection::ConstraintViolation { label }));
            }
            Err(_) => rejected.push((p.clone(), Rejection::ConstraintViolation { label: "evaluation".into() })),
        }
    }
    (ok, rejected)
}

/// Pareto candidate recovered from system `i`, with every verified certificate
/// projecting onto it (sorted).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParetoCandidate {
    pub x: Vec<Rational>,
    pub certificates: Vec<ValidTriplet>,
    pub system: usize,
    /// False for Pareto points of the variety that are not vertices of the region.
    pub extreme: bool,
}

/// Divides the blocks by `M` and `M_i`, checks each certificate and each
/// x-projection with the exact oracle.
pub fn unscale_and_project(points: &[SystemPoint], sys: &PolySystem, problem: &MolpProblem) -> Result<Vec<ParetoCandidate>, ExtractError> {
    let (n, m, k) = sys.dims;
    let big_m = int(sys.m_const);
    let mi = int(sys.mi);
    let mut out: Vec<ParetoCandidate> = Vec::new();
    for p in points {
        let get = |id: usize| p.get(&(id as VarId)).cloned();
        let x: Vec<Rational> = (0..n).map(|j| get(j).map(|v| v / &big_m)).collect::<Option<_>>().ok_or(ExtractError::Dimension)?;
        let u: Vec<Rational> = (0..m)
            .map(|s| match get(n + s) {
                Some(v) => Some(v / &mi),
                None if s == sys.system => Some(int(1)),
                None => None,
            })
            .collect::<Option<_>>()
            .ok_or(ExtractError::Dimension)?;
        let lambda: Vec<Rational> = (0..k).map(|r| get(n + m + r).map(|v| v / &mi)).collect::<Option<_>>().ok_or(ExtractError::Dimension)?;
        let certificate = ValidTriplet { x: x.clone(), u, lambda };
        let pareto = is_pareto(problem, &x).unwrap_or(false);
        if !pareto || !verify_sys1(problem, &certificate) {
            return Err(ExtractError::OracleContradiction { x });
        }
        match out.iter_mut().find(|c| c.x == x) {
            Some(c) => {
                if !c.certificates.contains(&certificate) {
                    c.certificates.push(certificate);
                }
            }
            None => {
                let extreme = is_vertex(problem, &x);
                out.push(ParetoCandidate { x, certificates: alloc::vec![certificate], system: sys.system, extreme })
            }
        }
    }
    for c in &mut out {
        c.certificates.sort_by(|a, b| (&a.u, &a.lambda).cmp(&(&b.u, &b.lambda)));
    }
    out.sort_by(|a, b| a.x.cmp(&b.x));
    Ok(out)
}

/// End-to-end extraction result for one relaxation.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionResult {
    pub order: u32,
    pub rank: usize,
    pub pivots: Vec<Exponents>,
    /// Numeric points in catalog coordinates (original, unscaled units).
    pub numeric_points: Vec<Vec<f64>>,
    pub verified: Vec<SystemPoint>,
    pub rejected: Vec<(Vec<f64>, Rejection)>,
    pub profile: RankProfile,
}

/// Runs rank test, basis selection, multiplication matrices, Schur read-off and
/// exact verification on a solved relaxation. `y_scaled` is the moment vector of
/// the range-normalized variables.
pub fn extract(rel: &MomentRelaxation, y_scaled: &[f64], sys: &PolySystem, opts: &ExtractOptions) -> Result<ExtractionResult, ExtractError> {
    if y_scaled.len() != rel.dim() {
        return Err(ExtractError::Dimension);
    }
    let basis = &rel.moments;
    let profile = rank_profile(basis, y_scaled, rel.order, opts.tol_rank, opts.gap_factor);
    let (t, r) = flat_extension_check(&profile, opts.shift)?;
    let mt = moment_matrix(basis, y_scaled, t);
    let degrees: Vec<u32> = (0..mt.nrows()).map(|i| basis.degree_of(i)).collect();
    let pivots = extraction_basis(&mt, &degrees, r, t - opts.shift.max(1), opts.max_cond)?;
    let mats = multiplication_matrices(basis, &mt, &pivots)?;
    let scaled_points = common_eigen_extract(&mats, opts.seed)?;
    let numeric_points: Vec<Vec<f64>> =
        scaled_points.iter().map(|p| p.iter().zip(&rel.var_scale).map(|(a, s)| a * s).collect()).collect();
    let (verified, rejected) = round_and_verify(&numeric_points, sys, opts.tol_round);
    Ok(ExtractionResult {
        order: t,
        rank: r,
        pivots: pivots.iter().map(|&i| basis.get(i).to_vec()).collect(),
        numeric_points,
        verified,
        rejected,
        profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moment::enumerate_monomials;
    use alloc::vec;

    fn univariate_moments(points: &[f64], deg: u32) -> (MonomialBasis, Vec<f64>) {
        let b = enumerate_monomials(1, deg);
        let y = b
            .iter()
            .map(|e| points.iter().map(|p| num_traits::Float::powi(*p, e[0] as i32)).sum::<f64>() / points.len() as f64)
            .collect();
        (b, y)
    }

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn numeric_rank_examples() {
        assert_eq!(numeric_rank(&DMatrix::identity(3, 3), 1e-6, 1e3), Ok(3));
        let v = nalgebra::DVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert_eq!(numeric_rank(&(&v * v.transpose()), 1e-6, 1e3), Ok(1));
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 0.5]);
        assert_eq!(numeric_rank(&m, 1e-6, 1e3), Ok(2));
        let amb = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1e-5, 1e-7]));
        assert!(matches!(numeric_rank(&amb, 1e-6, 1e3), Err(ExtractError::AmbiguousRank { .. })));
    }

    #[test]
    fn flatness() {
        // Dirac at 2: rank 1 everywhere, flat at the first admissible order.
        let (b, y) = univariate_moments(&[2.0], 6);
        let prof = rank_profile(&b, &y, 3, 1e-6, 1e3);
        assert_eq!(flat_extension_check(&prof, 3), Ok((3, 1)));
        assert_eq!(flat_extension_check(&prof, 1), Ok((1, 1)));
        // three points at order 1: rank M_1 = 2 != rank M_0 = 1
        let (b, y) = univariate_moments(&[0.0, 1.0, 2.0], 2);
        let prof = rank_profile(&b, &y, 1, 1e-6, 1e3);
        assert_eq!(flat_extension_check(&prof, 1), Err(ExtractError::NotFlat));
        let (b, y) = univariate_moments(&[0.0, 1.0, 2.0], 8);
        let prof = rank_profile(&b, &y, 4, 1e-6, 1e3);
        assert_eq!(prof.ranks, vec![Some(1), Some(2), Some(3), Some(3), Some(3)]);
        assert_eq!(flat_extension_check(&prof, 1), Ok((3, 3)));
    }

    #[test]
    fn basis_and_multiplication_uniform_01() {
        let (b, y) = univariate_moments(&[0.0, 1.0], 4);
        let m1 = moment_matrix(&b, &y, 1);
        assert_eq!(extraction_basis(&m1, &[0, 1], 2, 1, 1e12), Ok(vec![0, 1]));
        let dirac = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert_eq!(extraction_basis(&dirac, &[0, 1], 1, 1, 1e12), Ok(vec![0]));
        let m2 = moment_matrix(&b, &y, 2);
        let mats = multiplication_matrices(&b, &m2, &[0, 1]).unwrap();
        let expect = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 1.0]);
        assert!((&mats[0] - expect).amax() < 1e-12);
        let pts = common_eigen_extract(&mats, 7).unwrap();
        let xs = sorted(pts.iter().map(|p| p[0]).collect());
        assert!((xs[0] - 0.0).abs() < 1e-6 && (xs[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn three_point_grid() {
        let (b, y) = univariate_moments(&[0.0, 1.0, 2.0], 6);
        let m3 = moment_matrix(&b, &y, 3);
        let degrees: Vec<u32> = (0..4).collect();
        let piv = extraction_basis(&m3, &degrees, 3, 2, 1e12).unwrap();
        assert_eq!(piv, vec![0, 1, 2]);
        let mats = multiplication_matrices(&b, &m3, &piv).unwrap();
        let pts = common_eigen_extract(&mats, 1).unwrap();
        let xs = sorted(pts.iter().map(|p| p[0]).collect());
        for (a, e) in xs.iter().zip([0.0, 1.0, 2.0]) {
            assert!((a - e).abs() < 1e-6, "{:?}", xs);
        }
    }

    #[test]
    fn commuting_diagonal_matrices() {
        let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 2.0]));
        let b = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![3.0, 4.0]));
        for seed in 0..5 {
            let mut pts = common_eigen_extract(&[a.clone(), b.clone()], seed).unwrap();
            pts.sort_by(|p, q| p[0].partial_cmp(&q[0]).unwrap());
            assert!((pts[0][0] - 1.0).abs() < 1e-9 && (pts[0][1] - 3.0).abs() < 1e-9);
            assert!((pts[1][0] - 2.0).abs() < 1e-9 && (pts[1][1] - 4.0).abs() < 1e-9);
        }
        let rot = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert_eq!(common_eigen_extract(&[rot], 0), Err(ExtractError::ComplexEigenvalue));
    }
}
