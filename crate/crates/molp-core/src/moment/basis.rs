use alloc::collections::BTreeMap;
use alloc::vec::Vec;

pub type Exponents = Vec<u16>;

/// Monomials of total degree `<= degree` in graded lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonomialBasis {
    nvars: usize,
    degree: u32,
    monos: Vec<Exponents>,
    index: BTreeMap<Exponents, usize>,
    /// `starts[d]` is the position of the first monomial of degree `d`.
    starts: Vec<usize>,
}

impl MonomialBasis {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monos.is_empty()
    }

    pub fn get(&self, i: usize) -> &[u16] {
        &self.monos[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Exponents> {
        self.monos.iter()
    }

    pub fn index_of(&self, e: &[u16]) -> Option<usize> {
        self.index.get(e).copied()
    }

    /// Number of monomials of degree `<= d` (a prefix of the basis).
    pub fn count_upto(&self, d: u32) -> usize {
        if d >= self.degree {
            self.monos.len()
        } else {
            self.starts[d as usize + 1]
        }
    }

    pub fn degree_of(&self, i: usize) -> u32 {
        self.monos[i].iter().map(|&e| e as u32).sum()
    }

    /// Index of the product of basis elements `a` and `b` in `other`.
    pub fn product_index(&self, a: usize, b: usize, other: &MonomialBasis) -> Option<usize> {
        let e: Exponents = self.monos[a].iter().zip(&self.monos[b]).map(|(x, y)| x + y).collect();
        other.index_of(&e)
    }
}

fn push_degree(nvars: usize, d: u32, prefix: &mut Exponents, out: &mut Vec<Exponents>) {
    if prefix.len() + 1 == nvars {
        prefix.push(d as u16);
        out.push(prefix.clone());
        prefix.pop();
        return;
    }
    for e in (0..=d).rev() {
        prefix.push(e as u16);
        push_degree(nvars, d - e, prefix, out);
        prefix.pop();
    }
}

pub fn enumerate_monomials(nvars: usize, degree: u32) -> MonomialBasis {
    let mut monos = Vec::new();
    let mut starts = Vec::with_capacity(degree as usize + 1);
    for d in 0..=degree {
        starts.push(monos.len());
        if nvars == 0 {
            if d == 0 {
                monos.push(Vec::new());
            }
            continue;
        }
        push_degree(nvars, d, &mut Vec::with_capacity(nvars), &mut monos);
    }
    let index = monos.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
    MonomialBasis { nvars, degree, monos, index, starts }
}

/// `C(v + d, d)`.
pub fn basis_size(nvars: usize, degree: u32) -> usize {
    crate::oracle::binomial(nvars + degree as usize, degree as usize).min(usize::MAX as u128) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn sizes_and_order() {
        assert_eq!(enumerate_monomials(6, 4).len(), 210);
        assert_eq!(enumerate_monomials(6, 3).len(), 84);
        assert_eq!(enumerate_monomials(1, 3).len(), 4);
        let b = enumerate_monomials(2, 2);
        let got: Vec<Exponents> = b.iter().cloned().collect();
        assert_eq!(got, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]);
        assert_eq!(b.count_upto(1), 3);
        assert_eq!(b.count_upto(0), 1);
        for v in 1..=8 {
            for d in 0..=5 {
                assert_eq!(enumerate_monomials(v, d).len(), basis_size(v, d));
            }
        }
    }
}
