//! Problem documents in TOML.
//!
//! ```toml
//! C = [[1, 0], [0, 1]]
//! A = [[2, 1], [1, 1], [1, 2]]
//! b = [4, 3, 4]
//! ub_primal = [5, 5]
//! ub_dual = [1, 1, 1]
//! ```
//!
//! Entries may be integers, decimal numbers or rational strings such as `"-7/2"`.
//! Matrices may also be given flat in row-major order, in which case `k`/`m`
//! and `n` fix the shape.

use std::fmt::Write as _;

use molp_core::model::{ModelError, MolpProblem};
use molp_core::rational::parse_rational;
use molp_core::Rational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("invalid document: {0}")]
    Syntax(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("dimension error: {0}")]
    Dimension(String),
}

impl From<ModelError> for FormatError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Dimension(s) => FormatError::Dimension(s),
            other => FormatError::Schema(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum Entry {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Entry {
    fn to_rational(&self) -> Result<Rational, FormatError> {
        match self {
            Entry::Int(v) => Ok(Rational::from_integer((*v).into())),
            // the shortest round-trip decimal is what the user wrote
            Entry::Float(f) => parse_rational(&format!("{}", f)).ok_or_else(|| FormatError::Schema(format!("not a finite number: {}", f))),
            Entry::Text(s) => parse_rational(s.trim()).ok_or_else(|| FormatError::Schema(format!("not a rational number: {:?}", s))),
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum MatrixField {
    Nested(Vec<Vec<Entry>>),
    Flat(Vec<Entry>),
}

/// Raw document as read from TOML.
#[derive(Debug, Clone, Deserialize, Serialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub k: Option<usize>,
    pub m: Option<usize>,
    pub n: Option<usize>,
    #[serde(rename = "C")]
    pub c: Option<MatrixField>,
    #[serde(rename = "A")]
    pub a: Option<MatrixField>,
    pub b: Option<Vec<Entry>>,
    pub ub_primal: Option<Vec<i64>>,
    pub ub_dual: Option<Vec<i64>>,
    pub names: Option<Vec<String>>,
}

fn rows(field: &MatrixField, nrows: Option<usize>, ncols: Option<usize>, what: &str) -> Result<Vec<Vec<Rational>>, FormatError> {
    let out: Vec<Vec<Rational>> = match field {
        MatrixField::Nested(r) => r.iter().map(|row| row.iter().map(Entry::to_rational).collect()).collect::<Result<_, _>>()?,
        MatrixField::Flat(v) => {
            let vals: Vec<Rational> = v.iter().map(Entry::to_rational).collect::<Result<_, _>>()?;
            if vals.is_empty() {
                Vec::new()
            } else {
                let cols = match (nrows, ncols) {
                    (_, Some(c)) if c > 0 => c,
                    (Some(r), _) if r > 0 => vals.len() / r,
                    _ => return Err(FormatError::Schema(format!("flat {} needs n (or its row count)", what))),
                };
                if !vals.len().is_multiple_of(cols) {
                    return Err(FormatError::Dimension(format!("flat {} has {} entries, not a multiple of {}", what, vals.len(), cols)));
                }
                vals.chunks(cols).map(|c| c.to_vec()).collect()
            }
        }
    };
    if let Some(r) = nrows {
        if out.len() != r {
            return Err(FormatError::Dimension(format!("{} has {} rows, expected {}", what, out.len(), r)));
        }
    }
    if let Some(c) = ncols {
        if let Some(row) = out.iter().find(|row| row.len() != c) {
            return Err(FormatError::Dimension(format!("{} has a row of length {}, expected {}", what, row.len(), c)));
        }
    }
    Ok(out)
}

impl ProblemDocument {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        toml::from_str(text).map_err(|e| FormatError::Syntax(e.to_string()))
    }

    /// Converts to an integral problem. `ub_dual_default` fills a missing `ub_dual`.
    pub fn to_problem(&self, ub_dual_default: Option<i64>) -> Result<MolpProblem, FormatError> {
        let c = self.c.as_ref().ok_or_else(|| FormatError::Schema("missing field C".into()))?;
        let a = self.a.as_ref().ok_or_else(|| FormatError::Schema("missing field A".into()))?;
        let b = self.b.as_ref().ok_or_else(|| FormatError::Schema("missing field b".into()))?;
        let ub_primal = self.ub_primal.clone().ok_or_else(|| FormatError::Schema("missing field ub_primal".into()))?;
        let n = self.n.or(Some(ub_primal.len()));
        let c = rows(c, self.k, n, "C")?;
        let m = self.m.or(Some(b.len()));
        let a = rows(a, m, n, "A")?;
        let b: Vec<Rational> = b.iter().map(Entry::to_rational).collect::<Result<_, _>>()?;
        let ub_dual = match (&self.ub_dual, ub_dual_default) {
            (Some(v), _) => v.clone(),
            (None, Some(d)) => vec![d; b.len()],
            (None, None) => return Err(FormatError::Schema("missing field ub_dual".into())),
        };
        let p = MolpProblem::from_rational(c, a, b, ub_primal, ub_dual)?;
        match &self.names {
            Some(names) => Ok(p.with_names(names.clone())?),
            None => Ok(p),
        }
    }
}

/// Parses a problem document; `ub_dual` is required.
pub fn parse_problem(text: &str) -> Result<MolpProblem, FormatError> {
    ProblemDocument::parse(text)?.to_problem(None)
}

fn int_row(v: &[i64]) -> String {
    let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(", "))
}

fn int_matrix(rows: &[Vec<i64>]) -> String {
    let items: Vec<String> = rows.iter().map(|r| int_row(r)).collect();
    format!("[{}]", items.join(", "))
}

/// Writes the problem in the canonical nested form.
pub fn serialize_problem(p: &MolpProblem) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "k = {}\nm = {}\nn = {}", p.k(), p.m(), p.n());
    let _ = writeln!(s, "C = {}", int_matrix(&p.c));
    let _ = writeln!(s, "A = {}", int_matrix(&p.a));
    let _ = writeln!(s, "b = {}", int_row(&p.b));
    let _ = writeln!(s, "ub_primal = {}", int_row(&p.ub_primal));
    let _ = writeln!(s, "ub_dual = {}", int_row(&p.ub_dual));
    if let Some(names) = &p.names {
        let items: Vec<String> = names.iter().map(|n| format!("{:?}", n)).collect();
        let _ = writeln!(s, "names = [{}]", items.join(", "));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE1: &str = "C = [[1, 0], [0, 1]]\nA = [[2, 1], [1, 1], [1, 2]]\nb = [4, 3, 4]\nub_primal = [5, 5]\nub_dual = [1, 1, 1]\n";

    #[test]
    fn example1_document() {
        let p = parse_problem(EXAMPLE1).unwrap();
        assert_eq!((p.k(), p.m(), p.n()), (2, 3, 2));
        assert_eq!(p.a[2], vec![1, 2]);
        assert_eq!(parse_problem(&serialize_problem(&p)).unwrap(), p);
    }

    #[test]
    fn flat_and_rational_entries() {
        let doc = "k = 1\nn = 2\nC = [1, 1]\nA = [[\"1/2\", \"1/3\"]]\nb = [\"1/6\"]\nub_primal = [4, 4]\nub_dual = [2]\n";
        let p = parse_problem(doc).unwrap();
        assert_eq!(p.a, vec![vec![3, 2]]);
        assert_eq!(p.b, vec![1]);
        assert_eq!(p.c, vec![vec![1, 1]]);
        let dec = "C = [[0.5, 1]]\nA = [[1, 1]]\nb = [0.25]\nub_primal = [1, 1]\nub_dual = [1]\n";
        let p = parse_problem(dec).unwrap();
        assert_eq!(p.c, vec![vec![1, 2]]);
        assert_eq!((p.a[0].clone(), p.b[0]), (vec![4, 4], 1));
    }

    #[test]
    fn shape_errors() {
        let bad = "C = [[1, 0], [0, 1]]\nA = [[1, 1, 1]]\nb = [1]\nub_primal = [5, 5]\nub_dual = [1]\n";
        assert!(matches!(parse_problem(bad), Err(FormatError::Dimension(_))));
        let missing = "C = [[1, 0]]\nA = [[1, 1]]\nb = [1]\nub_primal = [5, 5]\n";
        assert!(matches!(parse_problem(missing), Err(FormatError::Schema(_))));
        assert!(ProblemDocument::parse(missing).unwrap().to_problem(Some(1)).is_ok());
        assert!(matches!(parse_problem("C = ["), Err(FormatError::Syntax(_))));
        let typo = format!("{}extra = 1\n", EXAMPLE1);
        assert!(matches!(parse_problem(&typo), Err(FormatError::Syntax(_))));
    }
}
