//! SDPA sparse format for moment relaxations.
//!
//! The relaxation is written in SDPA's dual form, `F(y) = sum_a y_a F_a - F_0 >= 0`,
//! with one variable per moment (including `y_0`). Blocks are the PSD blocks of
//! the relaxation in order, followed by one diagonal block holding every
//! equality `e . y = f` twice, as `e . y - f >= 0` and `f - e . y >= 0`.
//! The objective vector is zero. See `docs/FORMAT.md`.

use std::fmt::Write as _;

use molp_core::moment::MomentRelaxation;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SdpaError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// One nonzero: matrix number (0 = constant), block, row, column (1-based, row <= col).
#[derive(Debug, Clone, PartialEq)]
pub struct SdpaEntry {
    pub mat: usize,
    pub block: usize,
    pub row: usize,
    pub col: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpaProblem {
    pub comments: Vec<String>,
    pub nvars: usize,
    /// Positive sizes for symmetric blocks, negative for diagonal blocks.
    pub block_struct: Vec<i64>,
    pub c: Vec<f64>,
    pub entries: Vec<SdpaEntry>,
}

pub fn from_relaxation(rel: &MomentRelaxation, comment: &str) -> SdpaProblem {
    let mut entries = Vec::new();
    let mut block_struct = Vec::new();
    for (bi, b) in rel.blocks.iter().enumerate() {
        block_struct.push(b.map.size as i64);
        for e in &b.map.entries {
            for &(a, v) in &e.terms {
                if v != 0.0 {
                    entries.push(SdpaEntry { mat: a as usize + 1, block: bi + 1, row: e.r as usize + 1, col: e.c as usize + 1, value: v });
                }
            }
        }
    }
    if !rel.equalities.is_empty() {
        let blk = rel.blocks.len() + 1;
        block_struct.push(-2 * rel.equalities.len() as i64);
        for (k, row) in rel.equalities.iter().enumerate() {
            let (p, q) = (2 * k + 1, 2 * k + 2);
            for &(a, v) in &row.terms {
                if v != 0.0 {
                    entries.push(SdpaEntry { mat: a as usize + 1, block: blk, row: p, col: p, value: v });
                    entries.push(SdpaEntry { mat: a as usize + 1, block: blk, row: q, col: q, value: -v });
                }
            }
            if row.rhs != 0.0 {
                entries.push(SdpaEntry { mat: 0, block: blk, row: p, col: p, value: row.rhs });
                entries.push(SdpaEntry { mat: 0, block: blk, row: q, col: q, value: -row.rhs });
            }
        }
    }
    entries.sort_by_key(|e| (e.mat, e.block, e.row, e.col));
    SdpaProblem {
        comments: comment.lines().map(String::from).collect(),
        nvars: rel.dim(),
        block_struct,
        c: vec![0.0; rel.dim()],
        entries,
    }
}

fn num(v: f64) -> String {
    // Rust's shortest round-trip formatting; always readable back bit-exactly
    format!("{:?}", v)
}

pub fn write(p: &SdpaProblem) -> String {
    let mut s = String::new();
    for c in &p.comments {
        let _ = writeln!(s, "\" {}", c);
    }
    let _ = writeln!(s, "{} = mDIM", p.nvars);
    let _ = writeln!(s, "{} = nBLOCK", p.block_struct.len());
    let bs: Vec<String> = p.block_struct.iter().map(|b| b.to_string()).collect();
    let _ = writeln!(s, "{} = bLOCKsTRUCT", bs.join(" "));
    let cs: Vec<String> = p.c.iter().map(|&v| num(v)).collect();
    let _ = writeln!(s, "{}", cs.join(" "));
    for e in &p.entries {
        let _ = writeln!(s, "{} {} {} {} {}", e.mat, e.block, e.row, e.col, num(e.value));
    }
    s
}

/// Reads the sparse format. Separators `,(){}` count as whitespace, text after
/// the leading numbers of the header lines is ignored.
pub fn read(text: &str) -> Result<SdpaProblem, SdpaError> {
    let mut comments = Vec::new();
    let mut lines = text.lines().enumerate().filter_map(|(i, l)| {
        let t = l.trim();
        if t.starts_with('"') || t.starts_with('*') {
            comments.push(t.trim_start_matches(['"', '*']).trim().to_string());
            None
        } else if t.is_empty() {
            None
        } else {
            Some((i + 1, t.replace([',', '(', ')', '{', '}'], " ")))
        }
    });
    let err = |line: usize, msg: &str| SdpaError::Parse { line, msg: msg.into() };
    let mut header = |what: &str| -> Result<(usize, Vec<String>), SdpaError> {
        let (ln, l) = lines.next().ok_or_else(|| err(0, &format!("missing {}", what)))?;
        Ok((ln, l.split_whitespace().map(String::from).collect()))
    };
    let (ln, t) = header("mDIM")?;
    let nvars: usize = t.first().and_then(|v| v.parse().ok()).ok_or_else(|| err(ln, "bad mDIM"))?;
    let (ln, t) = header("nBLOCK")?;
    let nblocks: usize = t.first().and_then(|v| v.parse().ok()).ok_or_else(|| err(ln, "bad nBLOCK"))?;
    let (ln, t) = header("bLOCKsTRUCT")?;
    let block_struct: Vec<i64> = t.iter().take(nblocks).map(|v| v.parse().map_err(|_| err(ln, "bad block size"))).collect::<Result<_, _>>()?;
    if block_struct.len() != nblocks {
        return Err(err(ln, "too few block sizes"));
    }
    let mut c = Vec::with_capacity(nvars);
    let mut entries = Vec::new();
    let mut pending: Vec<(usize, String)> = Vec::new();
    for (ln, l) in lines {
        pending.push((ln, l));
    }
    let mut it = pending.into_iter();
    while c.len() < nvars {
        let (ln, l) = it.next().ok_or_else(|| err(0, "missing objective vector"))?;
        for tok in l.split_whitespace() {
            if c.len() < nvars {
                c.push(tok.parse::<f64>().map_err(|_| err(ln, "bad objective entry"))?);
            }
        }
    }
    for (ln, l) in it {
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() < 5 {
            return Err(err(ln, "entry needs 5 fields"));
        }
        let ix = |k: usize| t[k].parse::<usize>().map_err(|_| err(ln, "bad index"));
        let e = SdpaEntry { mat: ix(0)?, block: ix(1)?, row: ix(2)?, col: ix(3)?, value: t[4].parse().map_err(|_| err(ln, "bad value"))? };
        if e.mat > nvars || e.block == 0 || e.block > nblocks {
            return Err(err(ln, "index out of range"));
        }
        let size = block_struct[e.block - 1].unsigned_abs() as usize;
        if e.row == 0 || e.col == 0 || e.row > size || e.col > size || (block_struct[e.block - 1] < 0 && e.row != e.col) {
            return Err(err(ln, "entry outside its block"));
        }
        entries.push(e);
    }
    Ok(SdpaProblem { comments, nvars, block_struct, c, entries })
}
