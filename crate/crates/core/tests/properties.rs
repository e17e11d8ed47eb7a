mod common;

use calcdev::formula::{Expr, Sort};
use calcdev::program::{check_wellformed, AnnotatedProgram, NodePath, Construct};
use calcdev::solver::{interpret, State, Value};
use calcdev::wp::{annotate, wp_stmt};
use common::checks::{self, truth};
use common::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, max_global_rejects: 100_000, ..ProptestConfig::default() })]

    #[test]
    fn print_then_parse_is_identity(e in bool_expr(4, vec![]).prop_filter("depth at most 6", |e| e.depth() <= 6)) {
        checks::round_trip(&e)?;
        checks::parens_are_minimal(&e)?;
    }

    #[test]
    fn substitution_lemma(
        e in bool_expr(4, vec![]),
        t in int_expr(2, vec![]),
        var in prop_oneof![Just("x"), Just("y")],
        s in state_strategy(-2, 3),
    ) {
        checks::substitution_lemma(&e, &t, var, &s)?;
    }

    #[test]
    fn wp_agrees_with_execution(st in stmt(3), post in small_bool(3)) {
        checks::wp_matches_execution(&st, &post)?;
    }

    #[test]
    fn wp_distributes_over_conjunction_and_is_monotone(st in stmt(3), a in small_bool(2), b in small_bool(2)) {
        let both = wp_stmt(&st, &Expr::and(a.clone(), b.clone())).unwrap();
        let wa = wp_stmt(&st, &a).unwrap();
        let wb = wp_stmt(&st, &b).unwrap();
        let weaker = wp_stmt(&st, &Expr::or(a.clone(), b.clone())).unwrap();
        for s in all_states(0, 3) {
            let (x, y, z) = (truth(&both, &s).unwrap(), truth(&wa, &s).unwrap(), truth(&wb, &s).unwrap());
            prop_assert_eq!(x, y && z);
            // a ⇒ a ∨ b, so wp(S, a) ⇒ wp(S, a ∨ b).
            prop_assert!(!y || truth(&weaker, &s).unwrap());
        }
    }

    #[test]
    fn every_annotation_mutation_is_reported(st in stmt(3), post in small_bool(2), pick in any::<prop::sample::Index>(), on_pre in any::<bool>()) {
        let ap = annotate(&st, &Expr::Bool(true), &post).unwrap();
        prop_assert!(check_wellformed(&ap).is_empty());
        let candidates: Vec<NodePath> = ap
            .nodes()
            .into_iter()
            .filter(|(path, n)| path.parent().is_some() || !n.children().is_empty())
            .map(|(path, _)| path)
            .collect();
        prop_assume!(!candidates.is_empty());
        let path = pick.get(&candidates).clone();
        let node = ap.node(&path).unwrap().clone();
        let odd = Expr::eq(Expr::int_var("x"), Expr::int(77));
        let mutated = if on_pre {
            AnnotatedProgram { pre: odd, ..node }
        } else {
            AnnotatedProgram { post: odd, ..node }
        };
        let bad = ap.replace_node(&path, mutated).unwrap();
        let vs = check_wellformed(&bad);
        prop_assert!(!vs.is_empty(), "no violation after mutating {}", path);
        prop_assert!(
            vs.iter().any(|v| v.path == path || v.related.as_ref() == Some(&path)),
            "violations {:?} do not mention {}", vs, path
        );
    }
}

#[test]
fn loop_interpreter_matches_wp_of_unrolled_body() {
    // do x < 3 -> x := x + 1 od from x ≤ 3 ends with x = max(x, 3).
    let body = AnnotatedProgram::new(
        Expr::Bool(true),
        Expr::Bool(true),
        Construct::Assign {
            targets: vec![calcdev::program::Target::Var("x".into(), Sort::Int)],
            exprs: vec![Expr::add(Expr::int_var("x"), Expr::int(1))],
        },
    );
    let lp = Construct::While {
        invariants: vec![],
        bound: None,
        guard: Expr::lt(Expr::int_var("x"), Expr::int(3)),
        body: Box::new(body),
    };
    for x in -2..6 {
        let s: State = [("x".to_string(), Value::Int(x))].into_iter().collect();
        let out = interpret(&lp, &s, 100).unwrap();
        assert_eq!(out["x"], Value::Int(x.max(3)));
    }
}
