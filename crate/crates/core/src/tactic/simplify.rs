//! Rewrite rules applied by `simplifyAuto`, bottom-up to a fixpoint:
//!
//! - `one-point`: `(∀i: i = e ∧ R: T)` becomes `R[i:=e] ⇒ T[i:=e]` (`∃`: `∧`)
//! - `range-split`: for an upper bound `i < e+1` or `i ≤ e`, peel off the
//!   point `i = e`: `(∀i: R ∧ i < e+1: T)` becomes
//!   `(∀i: R ∧ i < e: T) ∧ (R[i:=e] ⇒ T[i:=e])`; the implication is dropped
//!   when `R[i:=e]` follows from the assumptions (a recorded side condition)
//! - `empty-range`: `(Q i: false: T)` becomes the identity of `Q`
//! - `identity` / `idempotence`: unit and zero laws of `∧ ∨ ⇒ ≡`, `P ∧ P`, `P ∨ P`
//! - `double-negation`: `¬¬P`, `¬true`, `¬false`
//! - `literal`: arithmetic and comparisons between integer literals

use crate::formula::{substitute, BinOp, Expr, QuantOp, Quantified, Substitution, UnOp};
use crate::solver::{evaluate, State, Value};
use crate::wp::Status;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rewrite {
    pub rule: &'static str,
    pub before: Expr,
    pub after: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Simplified {
    pub result: Expr,
    pub rewrites: Vec<Rewrite>,
    /// Side conditions of `range-split` with their verdicts.
    pub side_conditions: Vec<(Expr, Status)>,
}

const MAX_REWRITES: usize = 500;

/// Normalise `e`. `side` decides side conditions under the caller's
/// assumptions.
pub fn simplify(e: &Expr, side: &mut dyn FnMut(&Expr) -> Status) -> Simplified {
    let mut s = Simplifier {
        side,
        rewrites: Vec::new(),
        side_conditions: Vec::new(),
    };
    let result = s.go(e);
    Simplified {
        result,
        rewrites: s.rewrites,
        side_conditions: s.side_conditions,
    }
}

struct Simplifier<'a> {
    side: &'a mut dyn FnMut(&Expr) -> Status,
    rewrites: Vec<Rewrite>,
    side_conditions: Vec<(Expr, Status)>,
}

fn map_children(e: &Expr, f: &mut impl FnMut(&Expr) -> Expr) -> Expr {
    match e {
        Expr::Int(_) | Expr::Bool(_) | Expr::Var(..) | Expr::Meta(..) => e.clone(),
        Expr::Read(a, i) => Expr::read(f(a), f(i)),
        Expr::Update(a, i, v) => Expr::update(f(a), f(i), f(v)),
        Expr::Unary(op, a) => Expr::Unary(*op, Box::new(f(a))),
        Expr::Binary(op, a, b) => Expr::binary(*op, f(a), f(b)),
        Expr::Quant(q) => Expr::quant(q.op, q.vars.clone(), f(&q.range), f(&q.term)),
    }
}

impl Simplifier<'_> {
    fn go(&mut self, e: &Expr) -> Expr {
        let mut cur = map_children(e, &mut |c| self.go(c));
        while self.rewrites.len() < MAX_REWRITES {
            match self.rule(&cur) {
                Some((rule, next)) => {
                    self.rewrites.push(Rewrite {
                        rule,
                        before: cur.clone(),
                        after: next.clone(),
                    });
                    cur = map_children(&next, &mut |c| self.go(c));
                }
                None => break,
            }
        }
        cur
    }

    fn rule(&mut self, e: &Expr) -> Option<(&'static str, Expr)> {
        let t = Expr::Bool(true);
        let f = Expr::Bool(false);
        match e {
            Expr::Unary(UnOp::Not, a) => match &**a {
                Expr::Unary(UnOp::Not, inner) => Some(("double-negation", (**inner).clone())),
                Expr::Bool(b) => Some(("double-negation", Expr::Bool(!b))),
                _ => None,
            },
            Expr::Binary(op, a, b) => {
                let (a, b) = (&**a, &**b);
                match op {
                    BinOp::And => {
                        if *a == t {
                            Some(("identity", b.clone()))
                        } else if *b == t {
                            Some(("identity", a.clone()))
                        } else if *a == f || *b == f {
                            Some(("identity", f))
                        } else if a == b {
                            Some(("idempotence", a.clone()))
                        } else {
                            None
                        }
                    }
                    BinOp::Or => {
                        if *a == f {
                            Some(("identity", b.clone()))
                        } else if *b == f {
                            Some(("identity", a.clone()))
                        } else if *a == t || *b == t {
                            Some(("identity", t))
                        } else if a == b {
                            Some(("idempotence", a.clone()))
                        } else {
                            None
                        }
                    }
                    BinOp::Implies => {
                        if *a == t {
                            Some(("identity", b.clone()))
                        } else if *b == t || *a == f {
                            Some(("identity", t))
                        } else {
                            None
                        }
                    }
                    BinOp::Equiv => {
                        if *a == t {
                            Some(("identity", b.clone()))
                        } else if *b == t {
                            Some(("identity", a.clone()))
                        } else {
                            None
                        }
                    }
                    _ => match (a, b) {
                        (Expr::Int(_), Expr::Int(_)) => {
                            let v = evaluate(e, &State::new()).ok()?;
                            Some((
                                "literal",
                                match v {
                                    Value::Int(i) => Expr::int(i),
                                    Value::Bool(b) => Expr::Bool(b),
                                    Value::Array(_) => return None,
                                },
                            ))
                        }
                        _ => None,
                    },
                }
            }
            Expr::Quant(q) => self.quant_rule(q),
            _ => None,
        }
    }

    fn quant_rule(&mut self, q: &Quantified) -> Option<(&'static str, Expr)> {
        if q.range == Expr::Bool(false) {
            return q.op.identity().map(|id| ("empty-range", id));
        }
        let conjuncts: Vec<Expr> = q.range.conjuncts().into_iter().cloned().collect();
        let mentions_bound = |x: &Expr| x.free_var_names().iter().any(|n| q.vars.contains(n));
        let logical = matches!(q.op, QuantOp::Forall | QuantOp::Exists);

        if logical {
            for (k, c) in conjuncts.iter().enumerate() {
                let hit = match c {
                    Expr::Binary(BinOp::Eq, a, b) => match (&**a, &**b) {
                        (Expr::Var(v, _), e) if q.vars.contains(v) && !mentions_bound(e) => Some((v.clone(), e.clone())),
                        (e, Expr::Var(v, _)) if q.vars.contains(v) && !mentions_bound(e) => Some((v.clone(), e.clone())),
                        _ => None,
                    },
                    _ => None,
                };
                if let Some((v, e)) = hit {
                    let rest: Vec<Expr> = conjuncts.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, c)| c.clone()).collect();
                    return Some(("one-point", self.point(q, &v, &e, rest, false)?));
                }
            }
        }

        if !matches!(q.op, QuantOp::Forall | QuantOp::Exists | QuantOp::Sum) {
            return None;
        }
        for (k, c) in conjuncts.iter().enumerate() {
            let hit = match c {
                Expr::Binary(BinOp::Lt, a, b) => match (&**a, &**b) {
                    (Expr::Var(v, _), Expr::Binary(BinOp::Add, e, one))
                        if q.vars.contains(v) && **one == Expr::int(1) && !mentions_bound(e) =>
                    {
                        Some((v.clone(), (**e).clone()))
                    }
                    _ => None,
                },
                Expr::Binary(BinOp::Le, a, b) => match (&**a, &**b) {
                    (Expr::Var(v, _), e) if q.vars.contains(v) && !mentions_bound(e) => Some((v.clone(), e.clone())),
                    _ => None,
                },
                _ => None,
            };
            let Some((v, e)) = hit else { continue };
            let var = Expr::int_var(v.clone());
            let mut below = conjuncts.clone();
            below[k] = Expr::lt(var, e.clone());
            let rest: Vec<Expr> = conjuncts.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, c)| c.clone()).collect();
            let point = self.point(q, &v, &e, rest, true)?;
            let lower = Expr::quant(q.op, q.vars.clone(), Expr::conj(below), q.term.clone());
            return Some(("range-split", Expr::binary(q.op.fold_op()?, lower, point)));
        }
        None
    }

    /// The quantification restricted to `v = e`, with the remaining range
    /// conjuncts `rest`.
    fn point(&mut self, q: &Quantified, v: &str, e: &Expr, rest: Vec<Expr>, check_side: bool) -> Option<Expr> {
        let sub = Substitution::vars([(v.to_string(), e.clone())]);
        let range = substitute(&Expr::conj(rest), &sub).ok()?;
        let term = substitute(&q.term, &sub).ok()?;
        let vars: Vec<String> = q.vars.iter().filter(|x| *x != v).cloned().collect();
        if !vars.is_empty() {
            return Some(Expr::quant(q.op, vars, range, term));
        }
        if range == Expr::Bool(true) {
            return Some(term);
        }
        if check_side {
            let status = (self.side)(&range);
            let holds = status == Status::Valid;
            self.side_conditions.push((range.clone(), status));
            if holds {
                return Some(term);
            }
        }
        match q.op {
            QuantOp::Forall => Some(Expr::implies(range, term)),
            QuantOp::Exists => Some(Expr::and(range, term)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, Env, Sort};

    fn env() -> Env {
        Env::new()
            .with_var("n", Sort::Int)
            .with_var("P", Sort::Bool)
            .with_var("f", Sort::array_of(Sort::Bool))
    }

    fn simp(text: &str, side_ok: bool) -> Simplified {
        let e = parse_formula(text, &env()).unwrap();
        simplify(&e, &mut |_| if side_ok { Status::Valid } else { Status::Unknown("no".into()) })
    }

    #[test]
    fn splits_range_at_upper_bound() {
        let s = simp("(\\forall i: 0 \\le i < n+1: f[i])", true);
        assert_eq!(s.result, parse_formula("(\\forall i: 0 \\le i < n: f[i]) \\wedge f[n]", &env()).unwrap());
        assert_eq!(s.side_conditions.len(), 1);
        let s = simp("(\\forall i: 0 \\le i < n+1: f[i])", false);
        assert_eq!(
            s.result,
            parse_formula("(\\forall i: 0 \\le i < n: f[i]) \\wedge (0 \\le n \\Rightarrow f[n])", &env()).unwrap()
        );
    }

    #[test]
    fn splits_two_variable_range() {
        let s = simp("(\\forall i, j: 0 \\le i < j < n+1: f[j] \\Rightarrow f[i])", true);
        let want = parse_formula(
            "(\\forall i, j: 0 \\le i < j < n: f[j] \\Rightarrow f[i]) \\wedge (\\forall i: 0 \\le i < n: f[n] \\Rightarrow f[i])",
            &env(),
        )
        .unwrap();
        assert_eq!(s.result, want);
        assert!(s.side_conditions.is_empty());
    }

    #[test]
    fn identity_laws_and_empty_range() {
        assert_eq!(simp("true \\wedge P", true).result, Expr::bool_var("P"));
        assert_eq!(simp("\\neg \\neg P \\vee false", true).result, Expr::bool_var("P"));
        assert_eq!(simp("(\\forall i: false: f[i])", true).result, Expr::Bool(true));
        assert_eq!(simp("(\\exists i: i = 2: f[i])", true).result, Expr::read(Expr::var("f", Sort::array_of(Sort::Bool)), Expr::int(2)));
        assert!(simp("P", true).rewrites.is_empty());
    }
}
