use std::sync::Arc;

use calcdev::{Session, SolverBridge};

fn run(name: &str) -> Session {
    let path = format!("{}/../../scripts/{name}", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(path).unwrap();
    let mut s = Session::new("t", Arc::new(SolverBridge::oracle()));
    if let Err((line, e)) = s.run_script(&text) {
        panic!("{name}:{line}: {e}\n{}", s.execute(":state").map(|r| r.text).unwrap_or_default());
    }
    s
}

#[test]
fn sorted_descending_derivation_completes() {
    let s = run("sorted-descending.calx");
    assert!(s.tree().active_state().is_complete(), "{}", calcdev::tactic::render_state(s.tree().active_state()).join("\n"));
}

#[test]
fn integer_division_derivation_completes() {
    let s = run("integer-division.calx");
    assert!(s.tree().active_state().is_complete());
}

#[test]
#[ignore]
fn print_final() {
    let mut s = run("sorted-descending.calx");
    println!("{}", s.execute(":show minimal").unwrap().text);
    println!("{}", s.execute(":tree").unwrap().text);
    println!("{}", s.execute(":obligations").unwrap().text);
}
