use molp::sdpa::{from_relaxation, read, write, SdpaEntry};
use molp_core::model::MolpProblem;
use molp_core::moment::{assemble_relaxation, RelaxationOptions};
use molp_core::pipeline::{system_for, PipelineOptions};
use molp_core::poly::{Block, Constraint, PolySystem, Polynomial, Variable, Variant};
use molp_core::scaling::ScalingConstants;

fn univariate(eqs: Vec<Polynomial>, ineqs: Vec<Polynomial>) -> PolySystem {
    PolySystem {
        equalities: eqs.into_iter().enumerate().map(|(i, p)| Constraint { label: format!("e{}", i), poly: p }).collect(),
        inequalities: ineqs.into_iter().enumerate().map(|(i, p)| Constraint { label: format!("g{}", i), poly: p }).collect(),
        vars: vec![Variable { id: 0, name: "x".into(), block: Block::X, index: 0, lo: 0, hi: 1 }],
        eliminated: vec![],
        system: 0,
        variant: Variant::FullU,
        m_const: 1,
        mi: 1,
        dims: (1, 0, 0),
    }
}

#[test]
fn univariate_toy_round_trip() {
    let x = Polynomial::var(0);
    let sys = univariate(vec![x.mul(&x).sub(&x)], vec![x.clone()]);
    let rel = assemble_relaxation(&sys, 1, &RelaxationOptions::plain()).unwrap();
    let p = from_relaxation(&rel, "toy\nsecond line");
    // M_1 (2x2), localizer of x (1x1), and y_0 = 1, y_2 - y_1 = 0 as 4 diagonal entries
    assert_eq!(p.block_struct, vec![2, 1, -4]);
    assert_eq!(p.nvars, 3);
    let text = write(&p);
    assert!(text.starts_with("\" toy\n\" second line\n3 = mDIM\n3 = nBLOCK\n2 1 -4 = bLOCKsTRUCT\n"));
    let back = read(&text).unwrap();
    assert_eq!(back, p);
    // y_0 = 1 becomes y_0 - 1 >= 0 and 1 - y_0 >= 0
    assert!(p.entries.contains(&SdpaEntry { mat: 0, block: 3, row: 1, col: 1, value: 1.0 }));
    assert!(p.entries.contains(&SdpaEntry { mat: 0, block: 3, row: 2, col: 2, value: -1.0 }));
    assert!(p.entries.contains(&SdpaEntry { mat: 1, block: 3, row: 1, col: 1, value: 1.0 }));
}

#[test]
fn empty_system_is_minimal() {
    let rel = assemble_relaxation(&univariate(vec![], vec![]), 1, &RelaxationOptions::plain()).unwrap();
    let p = from_relaxation(&rel, "");
    assert_eq!(p.block_struct, vec![2, -2]);
    assert_eq!(read(&write(&p)).unwrap(), p);
}

#[test]
fn example1_block_sizes() {
    let problem = MolpProblem::new(vec![vec![1, 0], vec![0, 1]], vec![vec![2, 1], vec![1, 1], vec![1, 2]], vec![4, 3, 4], vec![5, 5], vec![1, 1, 1]).unwrap();
    let consts = ScalingConstants::overridden(1, vec![6, 6, 6]);
    let sys = system_for(&problem, 0, &consts, &PipelineOptions::default()).unwrap();
    let rel = assemble_relaxation(&sys, 4, &RelaxationOptions::default()).unwrap();
    let p = from_relaxation(&rel, "example 1, system 1");
    assert_eq!(p.block_struct[0], 210);
    let psd = &p.block_struct[1..p.block_struct.len() - 1];
    assert!(psd.iter().all(|&b| b == 84), "{:?}", psd);
    assert_eq!(*p.block_struct.last().unwrap(), -2 * rel.equalities.len() as i64);
    let back = read(&write(&p)).unwrap();
    assert_eq!(back.entries.len(), p.entries.len());
    assert_eq!(back, p);
}

#[test]
fn reader_accepts_punctuation_and_rejects_garbage() {
    let text = "* comment\n2 =mdim\n1 =nblock\n{2}\n1.0, 0.0\n0 1 1 1 1.0\n1 1 1 2 2.0\n";
    let p = read(text).unwrap();
    assert_eq!(p.block_struct, vec![2]);
    assert_eq!(p.c, vec![1.0, 0.0]);
    assert_eq!(p.entries.len(), 2);
    assert!(read("2 = mDIM\n1 = nBLOCK\n2\n0 0\n1 1 3 1 1.0\n").is_err());
    assert!(read("2 = mDIM\n1 = nBLOCK\n-2\n0 0\n1 1 1 2 1.0\n").is_err());
    assert!(read("x").is_err());
}
