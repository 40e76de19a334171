//! Dense exact linear algebra over the rationals.

use alloc::vec::Vec;

use num_traits::Zero;

use crate::rational::Rational;

/// Row-reduces `m` in place to reduced row echelon form and returns the pivot columns.
pub fn rref(m: &mut [Vec<Rational>]) -> Vec<usize> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r][c..].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let d = &f * &m[r][j];
                    m[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// Solves the square system `a x = b`; `None` when `a` is singular.
pub fn solve_square(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let n = a.len();
    let mut aug: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let piv = rref(&mut aug);
    if piv.len() < n || piv.iter().any(|&c| c >= n) {
        return None;
    }
    Some(aug.into_iter().map(|mut r| r.pop().unwrap()).collect())
}

/// Solves `a x = b` for a possibly rectangular system; returns any solution.
pub fn solve_any(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let cols = a.first().map_or(0, |r| r.len());
    let mut aug: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let piv = rref(&mut aug);
    if piv.last() == Some(&cols) {
        return None;
    }
    let mut x = alloc::vec![Rational::zero(); cols];
    for (r, &c) in piv.iter().enumerate() {
        x[c] = aug[r][cols].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn solves_two_by_two() {
        let a = alloc::vec![alloc::vec![int(2), int(1)], alloc::vec![int(1), int(2)]];
        let x = solve_square(&a, &[int(4), int(4)]).unwrap();
        assert_eq!(x, alloc::vec![rat(4, 3), rat(4, 3)]);
    }

    #[test]
    fn singular_is_none() {
        let a = alloc::vec![alloc::vec![int(1), int(2)], alloc::vec![int(2), int(4)]];
        assert!(solve_square(&a, &[int(1), int(2)]).is_none());
        assert_eq!(rank(&a), 1);
    }

    #[test]
    fn inconsistent_rectangular() {
        let a = alloc::vec![alloc::vec![int(1), int(1)], alloc::vec![int(1), int(1)]];
        assert!(solve_any(&a, &[int(1), int(2)]).is_none());
        assert!(solve_any(&a, &[int(1), int(1)]).is_some());
    }
}
