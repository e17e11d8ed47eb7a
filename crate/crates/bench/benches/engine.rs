use std::hint::black_box;
use std::sync::Arc;

use calcdev::formula::{pretty_print, PrintMode};
use calcdev::solver::brute_force;
use calcdev::{generate_obligations, parse_formula, Env, FiniteDomain, Goal, Session, Sort, SolverBridge};
use criterion::{criterion_group, criterion_main, Criterion};

const SORTED: &str = include_str!("../../../scripts/sorted-descending.calx");
const DEAD_END: &str = "r' \\equiv (r \\wedge \\neg f[n]) \\vee (\\forall i: 0 \\le i < n+1: f[i])";

fn env() -> Env {
    Env::new()
        .with_var("r", Sort::Bool)
        .with_var("n", Sort::Int)
        .with_var("f", Sort::array_of(Sort::Bool))
        .with_meta("r", Sort::Bool)
}

fn finished() -> Session {
    let mut s = Session::new("bench", Arc::new(SolverBridge::oracle()));
    s.run_script(SORTED).expect("script runs");
    s
}

fn formulas(c: &mut Criterion) {
    let env = env();
    c.bench_function("parse dead-end formula", |b| b.iter(|| parse_formula(black_box(DEAD_END), &env).unwrap()));
    let e = parse_formula(DEAD_END, &env).unwrap();
    c.bench_function("print dead-end formula", |b| b.iter(|| pretty_print(black_box(&e), PrintMode::Normal)));
}

fn verification(c: &mut Criterion) {
    let s = finished();
    let p = s.tree().active_state().program_state().unwrap().program.clone();
    c.bench_function("obligations of the final array program", |b| b.iter(|| generate_obligations(black_box(&p))));
    let obligations = generate_obligations(&p);
    let o = obligations.iter().find(|o| o.label.starts_with("While.invariant-preservation[P0]")).unwrap();
    let goal = Goal::new(o.hypotheses.clone(), o.goal.clone());
    let dom = FiniteDomain::default();
    c.bench_function("brute force P0 preservation", |b| b.iter(|| brute_force(black_box(&goal), &dom).unwrap()));
}

fn derivation(c: &mut Criterion) {
    let mut g = c.benchmark_group("script");
    g.sample_size(10);
    g.bench_function("array derivation end to end", |b| b.iter(finished));
    g.finish();
}

criterion_group!(benches, formulas, verification, derivation);
criterion_main!(benches);
