#![allow(dead_code)]

pub mod checks;
pub mod fuzz;

use std::sync::Arc;

use calcdev::formula::{BinOp, Expr, QuantOp, Sort};
use calcdev::program::{Stmt, Target};
use calcdev::solver::{State, Value};
use proptest::prelude::*;

pub fn arr_sort() -> Sort {
    Sort::array_of(Sort::Int)
}

fn int_leaf(bound: Vec<String>) -> BoxedStrategy<Expr> {
    let mut opts: Vec<BoxedStrategy<Expr>> = vec![
        (0i64..5).prop_map(Expr::int).boxed(),
        prop_oneof![Just("x"), Just("y")].prop_map(Expr::int_var).boxed(),
        (0i64..4).prop_map(|i| Expr::read(Expr::var("a", arr_sort()), Expr::int(i))).boxed(),
    ];
    if !bound.is_empty() {
        opts.push(proptest::sample::select(bound).prop_map(Expr::int_var).boxed());
    }
    proptest::strategy::Union::new(opts).boxed()
}

fn bool_leaf() -> BoxedStrategy<Expr> {
    prop_oneof![
        any::<bool>().prop_map(Expr::Bool),
        prop_oneof![Just("p"), Just("q")].prop_map(Expr::bool_var),
    ]
    .boxed()
}

/// Well-sorted Int expressions over `x, y: Int`, `a: Array(Int)` and the
/// bound variables in scope.
pub fn int_expr(depth: u32, bound: Vec<String>) -> BoxedStrategy<Expr> {
    if depth == 0 {
        return int_leaf(bound);
    }
    let sub = || int_expr(depth - 1, bound.clone());
    prop_oneof![
        3 => int_leaf(bound.clone()),
        2 => (prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul)], sub(), sub())
            .prop_map(|(op, a, b)| Expr::binary(op, a, b)),
        1 => sub().prop_map(Expr::neg),
        1 => sub().prop_map(|i| Expr::read(Expr::var("a", arr_sort()), i)),
        1 => (sub(), sub(), sub()).prop_map(|(i, v, j)| Expr::read(Expr::update(Expr::var("a", arr_sort()), i, v), j)),
        1 => quant(depth, bound.clone(), QuantOp::Sum),
        1 => quant(depth, bound.clone(), QuantOp::Count),
    ]
    .boxed()
}

/// Well-sorted Bool expressions; quantifiers bind `i`, `j` or `k` over a
/// range `lo ≤ v < hi`.
pub fn bool_expr(depth: u32, bound: Vec<String>) -> BoxedStrategy<Expr> {
    if depth == 0 {
        return bool_leaf();
    }
    let b = || bool_expr(depth - 1, bound.clone());
    let i = || int_expr(depth - 1, bound.clone());
    let logic = prop_oneof![
        Just(BinOp::And),
        Just(BinOp::Or),
        Just(BinOp::Implies),
        Just(BinOp::Equiv)
    ];
    let rel = prop_oneof![
        Just(BinOp::Lt),
        Just(BinOp::Le),
        Just(BinOp::Gt),
        Just(BinOp::Ge),
        Just(BinOp::Eq),
        Just(BinOp::Ne)
    ];
    prop_oneof![
        2 => bool_leaf(),
        3 => (logic, b(), b()).prop_map(|(op, x, y)| Expr::binary(op, x, y)),
        3 => (rel, i(), i()).prop_map(|(op, x, y)| Expr::binary(op, x, y)),
        1 => b().prop_map(Expr::not),
        1 => quant(depth, bound.clone(), QuantOp::Forall),
        1 => quant(depth, bound.clone(), QuantOp::Exists),
    ]
    .boxed()
}

fn quant(depth: u32, bound: Vec<String>, op: QuantOp) -> BoxedStrategy<Expr> {
    let d = depth - 1;
    prop_oneof![Just("i"), Just("j"), Just("k")]
        .prop_flat_map(move |v| {
            let mut inner = bound.clone();
            if !inner.iter().any(|b| b == v) {
                inner.push(v.to_string());
            }
            let lo = int_expr(d.min(1), bound.clone());
            let hi = int_expr(d.min(1), bound.clone());
            let term = match op {
                QuantOp::Sum => int_expr(d, inner.clone()),
                _ => bool_expr(d, inner.clone()),
            };
            (lo, hi, term).prop_map(move |(lo, hi, t)| {
                let var = Expr::int_var(v);
                let range = Expr::and(Expr::le(lo, var.clone()), Expr::lt(var, hi));
                Expr::quant(op, vec![v.to_string()], range, t)
            })
        })
        .boxed()
}

pub fn state_strategy(lo: i64, hi: i64) -> impl Strategy<Value = State> {
    (lo..=hi, lo..=hi, any::<bool>(), any::<bool>(), proptest::collection::vec(lo..=hi, 4)).prop_map(
        |(x, y, p, q, a)| {
            let mut s = State::new();
            s.insert("x".into(), Value::Int(x));
            s.insert("y".into(), Value::Int(y));
            s.insert("p".into(), Value::Bool(p));
            s.insert("q".into(), Value::Bool(q));
            s.insert("a".into(), Value::array(a.into_iter().map(Value::Int).collect()));
            s
        },
    )
}

/// Every state with `x, y ∈ [lo, hi]` and `p`.
pub fn all_states(lo: i64, hi: i64) -> Vec<State> {
    let mut out = Vec::new();
    for x in lo..=hi {
        for y in lo..=hi {
            for p in [false, true] {
                let mut s = State::new();
                s.insert("x".into(), Value::Int(x));
                s.insert("y".into(), Value::Int(y));
                s.insert("p".into(), Value::Bool(p));
                out.push(s);
            }
        }
    }
    out
}

/// Expressions over `x, y: Int` and `p: Bool` only.
pub fn small_int(depth: u32) -> BoxedStrategy<Expr> {
    let leaf = prop_oneof![(0i64..4).prop_map(Expr::int), prop_oneof![Just("x"), Just("y")].prop_map(Expr::int_var)];
    leaf.prop_recursive(depth, 8, 2, |inner| {
        (prop_oneof![Just(BinOp::Add), Just(BinOp::Sub), Just(BinOp::Mul)], inner.clone(), inner)
            .prop_map(|(op, a, b)| Expr::binary(op, a, b))
    })
    .boxed()
}

pub fn small_bool(depth: u32) -> BoxedStrategy<Expr> {
    let leaf = prop_oneof![
        any::<bool>().prop_map(Expr::Bool),
        Just(Expr::bool_var("p")),
        (prop_oneof![Just(BinOp::Lt), Just(BinOp::Le), Just(BinOp::Eq), Just(BinOp::Ne)], small_int(1), small_int(1))
            .prop_map(|(op, a, b)| Expr::binary(op, a, b)),
    ];
    leaf.prop_recursive(depth, 12, 2, |inner| {
        prop_oneof![
            (prop_oneof![Just(BinOp::And), Just(BinOp::Or), Just(BinOp::Implies), Just(BinOp::Equiv)], inner.clone(), inner.clone())
                .prop_map(|(op, a, b)| Expr::binary(op, a, b)),
            inner.prop_map(Expr::not),
        ]
    })
    .boxed()
}

/// Loop-free statements over `x, y: Int` and `p: Bool`.
pub fn stmt(depth: u32) -> BoxedStrategy<Stmt> {
    let assign = prop_oneof![
        (small_int(2)).prop_map(|e| Stmt::Assign(vec![Target::Var("x".into(), Sort::Int)], vec![e])),
        (small_int(2), small_int(2)).prop_map(|(a, b)| Stmt::Assign(
            vec![Target::Var("x".into(), Sort::Int), Target::Var("y".into(), Sort::Int)],
            vec![a, b]
        )),
        small_bool(1).prop_map(|e| Stmt::Assign(vec![Target::Var("p".into(), Sort::Bool)], vec![e])),
        Just(Stmt::Skip),
    ];
    assign
        .prop_recursive(depth, 16, 3, |inner| {
            prop_oneof![
                proptest::collection::vec(inner.clone(), 2..4).prop_map(Stmt::Seq),
                proptest::collection::vec((small_bool(1), inner), 1..3).prop_map(Stmt::If),
            ]
        })
        .boxed()
}

pub fn oracle() -> Arc<calcdev::SolverBridge> {
    Arc::new(calcdev::SolverBridge::oracle())
}
