use std::fmt::Write as _;
use std::hash::{Hash, Hasher};

use super::{Expr, Sort};

/// Bound variables are compared by binding position, free ones by name.
pub(crate) fn alpha_eq(a: &Expr, b: &Expr) -> bool {
    let mut left = Vec::new();
    let mut right = Vec::new();
    eq_in(a, b, &mut left, &mut right)
}

fn lookup(stack: &[String], name: &str) -> Option<usize> {
    stack.iter().rposition(|n| n == name)
}

fn eq_in(a: &Expr, b: &Expr, l: &mut Vec<String>, r: &mut Vec<String>) -> bool {
    match (a, b) {
        (Expr::Int(x), Expr::Int(y)) => x == y,
        (Expr::Bool(x), Expr::Bool(y)) => x == y,
        (Expr::Var(x, s), Expr::Var(y, t)) => {
            s == t
                && match (lookup(l, x), lookup(r, y)) {
                    (Some(i), Some(j)) => i == j,
                    (None, None) => x == y,
                    _ => false,
                }
        }
        (Expr::Meta(x, s), Expr::Meta(y, t)) => x == y && s == t,
        (Expr::Read(a1, i1), Expr::Read(a2, i2)) => eq_in(a1, a2, l, r) && eq_in(i1, i2, l, r),
        (Expr::Update(a1, i1, v1), Expr::Update(a2, i2, v2)) => {
            eq_in(a1, a2, l, r) && eq_in(i1, i2, l, r) && eq_in(v1, v2, l, r)
        }
        (Expr::Unary(o1, x), Expr::Unary(o2, y)) => o1 == o2 && eq_in(x, y, l, r),
        (Expr::Binary(o1, a1, b1), Expr::Binary(o2, a2, b2)) => {
            o1 == o2 && eq_in(a1, a2, l, r) && eq_in(b1, b2, l, r)
        }
        (Expr::Quant(p), Expr::Quant(q)) => {
            if p.op != q.op || p.vars.len() != q.vars.len() {
                return false;
            }
            let (ml, mr) = (l.len(), r.len());
            l.extend(p.vars.iter().cloned());
            r.extend(q.vars.iter().cloned());
            let ok = eq_in(&p.range, &q.range, l, r) && eq_in(&p.term, &q.term, l, r);
            l.truncate(ml);
            r.truncate(mr);
            ok
        }
        _ => false,
    }
}

pub(crate) fn alpha_hash<H: Hasher>(e: &Expr, state: &mut H) {
    let mut stack = Vec::new();
    hash_in(e, &mut stack, state);
}

fn hash_in<H: Hasher>(e: &Expr, stack: &mut Vec<String>, h: &mut H) {
    std::mem::discriminant(e).hash(h);
    match e {
        Expr::Int(v) => v.hash(h),
        Expr::Bool(v) => v.hash(h),
        Expr::Var(n, s) => {
            s.hash(h);
            match lookup(stack, n) {
                Some(i) => (0u8, i).hash(h),
                None => (1u8, n).hash(h),
            }
        }
        Expr::Meta(n, s) => (n, s).hash(h),
        Expr::Unary(op, a) => {
            op.hash(h);
            hash_in(a, stack, h);
        }
        Expr::Binary(op, a, b) => {
            op.hash(h);
            hash_in(a, stack, h);
            hash_in(b, stack, h);
        }
        Expr::Read(..) | Expr::Update(..) => {
            for c in e.children() {
                hash_in(c, stack, h);
            }
        }
        Expr::Quant(q) => {
            q.op.hash(h);
            q.vars.len().hash(h);
            let mark = stack.len();
            stack.extend(q.vars.iter().cloned());
            hash_in(&q.range, stack, h);
            hash_in(&q.term, stack, h);
            stack.truncate(mark);
        }
    }
}

/// Canonical prefix rendering, identical for alpha-equivalent expressions.
/// Used as a cache key.
pub fn alpha_key(e: &Expr) -> String {
    let mut out = String::new();
    let mut stack = Vec::new();
    key_in(e, &mut stack, &mut out);
    out
}

fn sort_tag(s: &Sort) -> String {
    match s {
        Sort::Bool => "B".into(),
        Sort::Int => "I".into(),
        Sort::Array(e) => format!("A{}", sort_tag(e)),
    }
}

fn key_in(e: &Expr, stack: &mut Vec<String>, out: &mut String) {
    match e {
        Expr::Int(v) => {
            let _ = write!(out, "{v}");
        }
        Expr::Bool(v) => out.push_str(if *v { "T" } else { "F" }),
        Expr::Var(n, s) => match lookup(stack, n) {
            Some(i) => {
                let _ = write!(out, "${i}");
            }
            None => {
                let _ = write!(out, "{n}:{}", sort_tag(s));
            }
        },
        Expr::Meta(n, s) => {
            let _ = write!(out, "{n}':{}", sort_tag(s));
        }
        Expr::Unary(op, a) => {
            let _ = write!(out, "({op:?} ");
            key_in(a, stack, out);
            out.push(')');
        }
        Expr::Binary(op, a, b) => {
            let _ = write!(out, "({op:?} ");
            key_in(a, stack, out);
            out.push(' ');
            key_in(b, stack, out);
            out.push(')');
        }
        Expr::Read(a, i) => {
            out.push_str("(read ");
            key_in(a, stack, out);
            out.push(' ');
            key_in(i, stack, out);
            out.push(')');
        }
        Expr::Update(a, i, v) => {
            out.push_str("(upd ");
            key_in(a, stack, out);
            out.push(' ');
            key_in(i, stack, out);
            out.push(' ');
            key_in(v, stack, out);
            out.push(')');
        }
        Expr::Quant(q) => {
            let _ = write!(out, "({:?} {} ", q.op, q.vars.len());
            let mark = stack.len();
            stack.extend(q.vars.iter().cloned());
            key_in(&q.range, stack, out);
            out.push(' ');
            key_in(&q.term, stack, out);
            stack.truncate(mark);
            out.push(')');
        }
    }
}
