//! Exact ground truth: LP solving, vertex enumeration, Pareto tests and certificates.

pub mod lp;
pub mod pareto;
pub mod vertices;

pub use lp::{simplex_solve, LpInstance, LpSolution, LpStatus};
pub use pareto::{certify_weight, certify_weight_through, is_pareto, pareto_edges, pareto_extreme_set, OracleError};
pub use vertices::{enumerate_vertices, is_vertex, stacked_rows, VertexSet};

/// Calls `f` on every `r`-subset of `0..n` in lexicographic order.
pub(crate) fn for_each_combination(n: usize, r: usize, mut f: impl FnMut(&[usize])) {
    if r > n {
        return;
    }
    let mut idx: alloc::vec::Vec<usize> = (0..r).collect();
    loop {
        f(&idx);
        let Some(i) = (0..r).rev().find(|&i| idx[i] != i + n - r) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub(crate) fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        // acc * (n - i) is divisible by i + 1; saturate instead of overflowing
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i + 1) as u128,
            None => return u128::MAX,
        };
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combinations_count() {
        let mut c = 0;
        for_each_combination(7, 2, |_| c += 1);
        assert_eq!(c, 21);
        let mut c = 0;
        for_each_combination(3, 0, |s| {
            assert!(s.is_empty());
            c += 1
        });
        assert_eq!(c, 1);
        let mut c = 0;
        for_each_combination(3, 3, |_| c += 1);
        assert_eq!(c, 1);
        assert_eq!(binomial(7, 2), 21);
    }
}
