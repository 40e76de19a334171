use molp::format::{parse_problem, serialize_problem};
use molp_core::MolpProblem;
use proptest::prelude::*;

fn problem() -> impl Strategy<Value = MolpProblem> {
    (1usize..=3, 0usize..=3, 1usize..=3).prop_flat_map(|(k, m, n)| {
        let mat = move |r: usize| proptest::collection::vec(proptest::collection::vec(-50i64..=50, n), r);
        (
            mat(k),
            mat(m),
            proptest::collection::vec(-20i64..=20, m),
            proptest::collection::vec(1i64..=9, n),
            proptest::collection::vec(1i64..=9, m),
            any::<bool>(),
        )
            .prop_map(move |(c, a, b, ub, ud, named)| {
                let p = MolpProblem::new(c, a, b, ub, ud).unwrap();
                if named {
                    p.with_names((0..n).map(|j| format!("v_{}", j)).collect()).unwrap()
                } else {
                    p
                }
            })
    })
}

proptest! {
    #[test]
    fn serialize_then_parse_is_identity(p in problem()) {
        let text = serialize_problem(&p);
        let back = parse_problem(&text).unwrap();
        prop_assert_eq!(back, p);
    }
}
