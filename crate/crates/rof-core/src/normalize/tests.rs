use super::*;
use crate::formula::{parse_formula, Assignment};

fn syms(bits: &str) -> Vec<Sym> {
    bits.bytes().map(|b| Sym(b - b'0')).collect()
}

fn parsed(text: &str) -> Formula {
    parse_formula(text).unwrap()
}

fn normalized_text(text: &str, k: u32) -> String {
    to_kx_basic(&parsed(text), k).unwrap().to_text().unwrap()
}

/// Both formulas compute the same function on every Boolean assignment.
fn assert_equivalent(f: &Formula, g: &Formula) {
    let n = f.n_vars().max(g.n_vars());
    assert!(n <= 16, "exhaustive check needs a small variable count");
    for bits in 0u32..1 << n {
        let vals: Vec<bool> = (0..n).map(|i| bits >> i & 1 == 1).collect();
        let a = Assignment::from_bits(Alphabet::Bool, &vals);
        assert_eq!(
            f.evaluate(&a).unwrap(),
            g.evaluate(&a).unwrap(),
            "disagree on assignment {bits:0width$b}",
            width = n as usize
        );
    }
}

#[test]
fn forceful_triples_of_and() {
    let t = find_forceful(&syms("0001"), 2);
    assert_eq!(
        t,
        vec![
            Forceful { child: 0, a: false, b: false },
            Forceful { child: 1, a: false, b: false },
        ]
    );
}

#[test]
fn xor_is_unforceable() {
    assert!(find_forceful(&syms("0110"), 2).is_empty());
}

#[test]
fn projection_forces_both_ways() {
    let t = find_forceful(&syms("0101"), 2);
    assert!(t.contains(&Forceful { child: 0, a: false, b: false }));
    assert!(t.contains(&Forceful { child: 0, a: true, b: true }));
}

#[test]
fn monotonicity_of_small_tables() {
    assert!(is_monotone_table(&syms("0001"), 2));
    assert!(is_monotone_table(&syms("0111"), 2));
    assert!(is_monotone_table(&syms("00010111"), 3));
    assert!(is_monotone_table(&syms("01"), 1));
    assert!(!is_monotone_table(&syms("0110"), 2));
    assert!(!is_monotone_table(&syms("10"), 1));
}

#[test]
fn mdnf_of_standard_gates() {
    assert_eq!(compute_mdnf(&syms("0111"), 2).unwrap(), vec![vec![0], vec![1]]);
    assert_eq!(compute_mdnf(&syms("0001"), 2).unwrap(), vec![vec![0, 1]]);
    assert_eq!(
        compute_mdnf(&syms("00010111"), 3).unwrap(),
        vec![vec![0, 1], vec![0, 2], vec![1, 2]]
    );
    assert!(matches!(
        compute_mdnf(&syms("0110"), 2),
        Err(NormalizeError::NonMonotone)
    ));
}

#[test]
fn nested_ands_merge() {
    assert_eq!(normalized_text("(and x0 (and x1 x2))", 2), "(and x0 x1 x2)");
}

#[test]
fn negation_pushes_to_leaves() {
    assert_eq!(
        normalized_text("(not (or x0 x1))", 2),
        "(and (not x0) (not x1))"
    );
    assert_eq!(
        normalized_text("(not (and (not x0) x1))", 2),
        "(or x0 (not x1))"
    );
}

#[test]
fn forceful_table_splits_into_or() {
    assert_eq!(normalized_text("(tbl2 0111 x0 x1)", 2), "(or x0 x1)");
    assert_eq!(
        normalized_text("(tbl2 0111 (not x0) x1)", 2),
        "(or (not x0) x1)"
    );
}

#[test]
fn projection_table_collapses_to_child() {
    let out = to_kx_basic(&parsed("(tbl2 0101 x0 x1)"), 2).unwrap();
    assert_eq!(out.to_text().unwrap(), "x0");
    assert_eq!(out.variables(), vec![0]);
}

#[test]
fn xor_table_survives_unchanged() {
    let out = to_kx_basic(&parsed("(tbl2 0110 x0 x1)"), 2).unwrap();
    assert_eq!(out.to_text().unwrap(), "(tbl2 0110 x0 x1)");
    assert!(matches!(out.kind(out.root()), GateKind::Table(t) if *t == syms("0110")));
}

#[test]
fn rewrites_preserve_the_function() {
    for text in [
        "(tbl2 0111 x0 x1)",
        "(tbl3 00010111 x0 x1 x2)",
        "(tbl3 01101001 x0 x1 x2)",
        "(not (tbl2 1000 x0 (or x1 x2)))",
        "(and (or x0 (not x1)) (tbl2 0110 x2 (and x3 x4)))",
        "(or (and x0 x1) (tbl3 00010110 x2 x3 x4))",
    ] {
        let f = parsed(text);
        let g = to_kx_basic(&f, 3).unwrap();
        assert_equivalent(&f, &g);
        assert!(is_kx_basic(&g, 3), "not k-x-basic: {}", g.to_text().unwrap());
    }
}

#[test]
fn normalization_is_idempotent() {
    for text in [
        "(and x0 (and x1 x2))",
        "(not (or x0 (and x1 (not x2))))",
        "(tbl2 0111 x0 (tbl2 0001 x1 x2))",
        "(tbl2 0110 x0 x1)",
    ] {
        let once = to_kx_basic(&parsed(text), 2).unwrap();
        let twice = to_kx_basic(&once, 2).unwrap();
        assert_eq!(once, twice);
    }
}

#[test]
fn constant_collapse_is_reported() {
    match to_kx_basic(&parsed("(and x0 (tbl1 00 x1))"), 2) {
        Err(NormalizeError::TriviallyConstant { value }) => assert!(!value),
        other => panic!("expected constant collapse, got {other:?}"),
    }
    match to_kx_basic(&parsed("(or x0 (tbl1 11 x1))"), 2) {
        Err(NormalizeError::TriviallyConstant { value }) => assert!(value),
        other => panic!("expected constant collapse, got {other:?}"),
    }
}

#[test]
fn wide_tables_are_rejected() {
    match to_kx_basic(&parsed("(tbl3 00010111 x0 x1 x2)"), 2) {
        Err(NormalizeError::ArityExceedsK { arity, k }) => {
            assert_eq!((arity, k), (3, 2));
        }
        other => panic!("expected arity error, got {other:?}"),
    }
}

#[test]
fn mv_formulas_are_rejected() {
    let f = parsed("(mv2 bal4 x0 x1)");
    assert!(matches!(to_kx_basic(&f, 2), Err(NormalizeError::NotBoolean)));
    assert!(matches!(to_k_basic(&f, 2), Err(NormalizeError::NotBoolean)));
}

#[test]
fn k_basic_keeps_and_or_structure() {
    let out = to_k_basic(&parsed("(and x0 (or x1 x2))"), 2).unwrap();
    assert_eq!(out.to_text().unwrap(), "(and x0 (or x1 x2))");
    assert!(is_k_basic(&out, 2));
}

#[test]
fn k_basic_merges_nested_ors() {
    let out = to_k_basic(&parsed("(or x0 (or x1 x2))"), 2).unwrap();
    assert_eq!(out.to_text().unwrap(), "(or x0 x1 x2)");
}

#[test]
fn split_rewrites_are_counted() {
    let (_, splits) = to_kx_basic_counted(&parsed("(tbl2 0111 x0 x1)"), 2).unwrap();
    assert_eq!(splits, 1);
    let (_, splits) = to_kx_basic_counted(&parsed("(and x0 x1)"), 2).unwrap();
    assert_eq!(splits, 0);
}

#[test]
fn k_basic_turns_majority_into_terms() {
    let out = to_k_basic(&parsed("(tbl3 00010111 x0 x1 x2)"), 3).unwrap();
    match out.kind(out.root()) {
        GateKind::Mdnf(terms) => {
            assert_eq!(*terms, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        }
        other => panic!("expected term-set gate, got {other:?}"),
    }
    assert!(is_k_basic(&out, 3));
    assert_equivalent(&parsed("(tbl3 00010111 x0 x1 x2)"), &out);
}

#[test]
fn k_basic_rejects_negations_and_xor() {
    assert!(matches!(
        to_k_basic(&parsed("(not x0)"), 2),
        Err(NormalizeError::NonMonotone)
    ));
    assert!(matches!(
        to_k_basic(&parsed("(and x0 (not x1))"), 2),
        Err(NormalizeError::NonMonotone)
    ));
    assert!(matches!(
        to_k_basic(&parsed("(tbl2 0110 x0 x1)"), 2),
        Err(NormalizeError::NonMonotone)
    ));
}

#[test]
fn structural_predicates() {
    assert!(is_basic(&parsed("(and x0 (or x1 x2))").with_stats()));
    assert!(is_basic(&parsed("x0").with_stats()));
    assert!(!is_basic(&parsed("(and x0 (and x1 x2))").with_stats()));
    assert!(!is_basic(&parsed("(and x0 (not x1))").with_stats()));
    assert!(!is_basic(&parsed("(tbl2 0110 x0 x1)").with_stats()));

    let xor_mix = parsed("(or (and x0 x1) (tbl2 0110 x2 x3))").with_stats();
    assert!(is_kx_basic(&xor_mix, 2));
    assert!(!is_k_basic(&xor_mix, 2));
    assert!(!is_kx_basic(&xor_mix, 1));
    assert!(!is_kx_basic(&parsed("(and x0 (and x1 x2))").with_stats(), 2));
    assert!(!is_kx_basic(&parsed("(tbl2 0001 x0 x1)").with_stats(), 2));
}

#[test]
fn normalized_output_carries_stats() {
    let out = to_kx_basic(&parsed("(and x0 (or x1 (not x2)))"), 2).unwrap();
    assert_eq!(out.stats().unwrap().size[0], out.variables().len() as u64);
}
