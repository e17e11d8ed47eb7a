//! Random tree operations and the structural checks run after each one.

use std::sync::Arc;

use calcdev::solver::RecordedProver;
use calcdev::tactic::{render_state, TacticEngine};
use calcdev::tree::{DerivationTree, Document};
use calcdev::Session;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

pub const POOL: &[&str] = &[
    "init4{vars=[x: Int, y: Int], pre=0 \\le y, post=x = y \\wedge 0 \\le x}",
    "init4{vars=[x: Int], pre=true, post=x = 3}",
    "takeConjunctsAsInvariants{which=[0]}",
    "takeConjunctsAsInvariants{which=[1]}",
    "introComposition{mid=0 \\le y}",
    "introAssignment{targets=[x], exprs=[x']}",
    "guessProgram{prog=\"x := y\"}",
    "guessProgram{prog=\"x := 3\"}",
    "stepInto{label=Program.postcondition}",
    "simplifyAuto{}",
    "guessFormula{next=x' = y}",
    "guessFormula{next=x' = 3}",
    "stepOut{}",
    "focus{path=@0}",
    "noSuchTactic{}",
];

#[derive(Clone, Debug)]
pub enum Op {
    Apply(usize),
    ApplyAt(prop::sample::Index, usize),
    Navigate(prop::sample::Index),
    NavigateMissing,
}

pub fn op() -> impl Strategy<Value = Op> {
    prop_oneof![
        4 => (0..POOL.len()).prop_map(Op::Apply),
        2 => (any::<prop::sample::Index>(), 0..POOL.len()).prop_map(|(i, t)| Op::ApplyAt(i, t)),
        2 => any::<prop::sample::Index>().prop_map(Op::Navigate),
        1 => Just(Op::NavigateMissing),
    ]
}

pub fn check_invariants(t: &DerivationTree) -> Result<(), TestCaseError> {
    for (k, n) in t.nodes().iter().enumerate() {
        prop_assert_eq!(n.id, k);
        match n.parent {
            None => prop_assert_eq!(k, 0),
            Some(p) => {
                prop_assert!(p < k);
                prop_assert!(t.nodes()[p].children.contains(&k));
            }
        }
        for c in &n.children {
            prop_assert_eq!(t.nodes()[*c].parent, Some(k));
        }
        prop_assert!(n.children.windows(2).all(|w| w[0] < w[1]), "children out of creation order");
    }
    prop_assert!(t.active() < t.len());
    let path = t.active_path();
    prop_assert_eq!(path[0], 0);
    prop_assert_eq!(t.active_path_view().len(), path.len());
    Ok(())
}

/// Runs `ops` on a fresh session, checking after every step, then checks
/// that the saved document replays to the same bytes.
pub fn run_ops(ops: &[Op]) -> Result<(), TestCaseError> {
    let mut s = Session::new("fuzz", super::oracle());
    for o in ops {
        let before = s.tree().len();
        let snapshot: Vec<Vec<String>> = s.tree().nodes().iter().map(|n| render_state(&n.state)).collect();
        match o {
            Op::Apply(t) => match s.apply_text(POOL[*t]) {
                Ok((id, _)) => {
                    prop_assert_eq!(id, before);
                    prop_assert_eq!(s.tree().active(), id);
                }
                Err(_) => prop_assert_eq!(s.tree().len(), before),
            },
            Op::ApplyAt(i, t) => {
                let at = i.index(before);
                if s.apply_at(at, POOL[*t]).is_err() {
                    prop_assert_eq!(s.tree().len(), before);
                } else {
                    prop_assert_eq!(s.tree().nodes()[before].parent, Some(at));
                }
            }
            Op::Navigate(i) => {
                let id = i.index(before);
                let on_path = s.tree().active_path().contains(&id);
                let at = s.navigate(id).unwrap();
                prop_assert_eq!(s.tree().active(), at);
                if on_path {
                    prop_assert_eq!(at, id);
                } else {
                    prop_assert!(s.tree().nodes()[at].children.is_empty());
                    prop_assert!(s.tree().active_path().contains(&id));
                }
            }
            Op::NavigateMissing => {
                let active = s.tree().active();
                prop_assert!(s.navigate(before + 5).is_err());
                prop_assert_eq!(s.tree().active(), active);
            }
        }
        // Existing nodes never change.
        for (k, snap) in snapshot.iter().enumerate() {
            prop_assert_eq!(&render_state(&s.tree().nodes()[k].state), snap);
        }
        check_invariants(s.tree())?;
    }
    let doc = s.document();
    let json = doc.to_json();
    let engine = TacticEngine::new(Arc::new(RecordedProver::new(doc.check_records(), None)));
    let back = DerivationTree::from_document(&Document::from_json(&json).unwrap(), &engine)
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    prop_assert_eq!(back.to_document(doc.check_records()).to_json(), json);
    Ok(())
}

/// A hand-built tree with several branches under each sibling, and the
/// node every navigation must land on.
///
/// ```text
/// 0 ─ 1 ┬ 2 ┬ 4
///       │   └ 5 ─ 6
///       ├ 3 ─ 7
///       └ 8
/// ```
pub fn rightmost_descent_cases() -> Result<usize, String> {
    let mut s = Session::new("nav", super::oracle());
    let err = |e: calcdev::SessionError| e.to_string();
    let assign = "introAssignment{targets=[x], exprs=[x']}";
    let into = "stepInto{label=Program.postcondition}";
    s.apply_text(POOL[1]).map_err(err)?;
    s.apply_at(1, assign).map_err(err)?;
    s.apply_at(1, assign).map_err(err)?;
    s.apply_at(2, into).map_err(err)?;
    s.apply_at(2, into).map_err(err)?;
    s.apply_at(5, "guessFormula{next=x' = 3}").map_err(err)?;
    s.apply_at(3, into).map_err(err)?;
    s.apply_at(1, POOL[7]).map_err(err)?;
    let view: Vec<Vec<usize>> = s.tree().active_path_view().into_iter().map(|e| e.siblings).collect();
    if view != vec![vec![], vec![], vec![2, 3]] {
        return Err(format!("sibling markers {view:?}"));
    }
    // (target, expected active node), applied in order.
    let cases = [
        (2, 6), // sibling marker: newest branch under 2 is 5, then 6
        (6, 6), // the active node itself
        (3, 7),
        (1, 1), // back along the active path
        (4, 4),
        (5, 6),
        (0, 0),
        (8, 8),
        (2, 6),
    ];
    for (k, (target, want)) in cases.iter().enumerate() {
        let got = s.navigate(*target).map_err(err)?;
        if got != *want || s.tree().active() != *want {
            return Err(format!("case {k}: navigate({target}) gave {got}, expected {want}"));
        }
        let leaf = s.tree().rightmost_leaf(*target).map_err(|e| e.to_string())?;
        if s.tree().rightmost_leaf(leaf).map_err(|e| e.to_string())? != leaf {
            return Err(format!("rightmost descent from {target} is not idempotent"));
        }
    }
    // A new branch under 2 becomes its rightmost one.
    s.apply_at(2, into).map_err(err)?;
    s.navigate(8).map_err(err)?;
    let got = s.navigate(2).map_err(err)?;
    if got != 9 {
        return Err(format!("after branching, navigate(2) gave {got}, expected 9"));
    }
    Ok(cases.len() + 1)
}
