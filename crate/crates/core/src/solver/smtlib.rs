//! SMT-LIB v2 emission and model reading.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use super::brute::default_value;
use super::eval::{ArrayValue, State, Value};
use super::Goal;
use crate::formula::{substitute, BinOp, Expr, QuantOp, Sort, Substitution, UnOp};

/// Non-∀/∃ quantifiers are expanded only up to this many instances.
const MAX_EXPANSION: i64 = 64;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum SmtError {
    #[error("quantifier {0} needs constant bounds for SMT emission")]
    UnsupportedQuantifier(String),
    #[error("metavariable {0}' cannot be sent to a solver")]
    MetaVariable(String),
}

fn sym(name: &str) -> String {
    format!("|{name}|")
}

pub fn sort_smt(s: &Sort) -> String {
    match s {
        Sort::Bool => "Bool".into(),
        Sort::Int => "Int".into(),
        Sort::Array(e) => format!("(Array Int {})", sort_smt(e)),
    }
}

fn int_lit(v: i64) -> String {
    if v < 0 {
        format!("(- {})", v.unsigned_abs())
    } else {
        v.to_string()
    }
}

struct Emitter {
    fresh: usize,
    extra_decls: Vec<String>,
}

impl Emitter {
    fn term(&mut self, e: &Expr) -> Result<String, SmtError> {
        Ok(match e {
            Expr::Int(v) => int_lit(*v),
            Expr::Bool(b) => b.to_string(),
            Expr::Var(n, _) => sym(n),
            Expr::Meta(n, _) => return Err(SmtError::MetaVariable(n.clone())),
            Expr::Read(a, i) => format!("(select {} {})", self.term(a)?, self.term(i)?),
            Expr::Update(a, i, v) => format!("(store {} {} {})", self.term(a)?, self.term(i)?, self.term(v)?),
            Expr::Unary(UnOp::Not, a) => format!("(not {})", self.term(a)?),
            Expr::Unary(UnOp::Neg, a) => format!("(- {})", self.term(a)?),
            Expr::Binary(op, a, b) => {
                let (x, y) = (self.term(a)?, self.term(b)?);
                use BinOp::*;
                match op {
                    // Floored division on top of SMT-LIB's Euclidean div.
                    Div => format!("(ite (>= {y} 0) (div {x} {y}) (div (- {x}) (- {y})))"),
                    Mod => format!("(- {x} (* {y} (ite (>= {y} 0) (div {x} {y}) (div (- {x}) (- {y})))))"),
                    Ne => format!("(not (= {x} {y}))"),
                    _ => {
                        let o = match op {
                            Add => "+",
                            Sub => "-",
                            Mul => "*",
                            Lt => "<",
                            Le => "<=",
                            Gt => ">",
                            Ge => ">=",
                            Eq | Equiv => "=",
                            And => "and",
                            Or => "or",
                            Implies => "=>",
                            Div | Mod | Ne => unreachable!(),
                        };
                        format!("({o} {x} {y})")
                    }
                }
            }
            Expr::Quant(q) => match q.op {
                QuantOp::Forall | QuantOp::Exists => {
                    let binders: Vec<String> = q.vars.iter().map(|v| format!("({} Int)", sym(v))).collect();
                    let (r, t) = (self.term(&q.range)?, self.term(&q.term)?);
                    if q.op == QuantOp::Forall {
                        format!("(forall ({}) (=> {r} {t}))", binders.join(" "))
                    } else {
                        format!("(exists ({}) (and {r} {t}))", binders.join(" "))
                    }
                }
                _ => self.expand(e)?,
            },
        })
    }

    /// Expand a Σ/#/↑/↓ with literal bounds into a finite term.
    fn expand(&mut self, e: &Expr) -> Result<String, SmtError> {
        let Expr::Quant(q) = e else { unreachable!() };
        let unsupported = || SmtError::UnsupportedQuantifier(q.op.symbol().into());
        let mut boxes = Vec::new();
        for v in &q.vars {
            let (lo, hi) = literal_bounds(&q.range, v).ok_or_else(unsupported)?;
            boxes.push((v.clone(), lo, hi));
        }
        let mut points: Vec<Vec<i64>> = vec![vec![]];
        for (_, lo, hi) in &boxes {
            let mut next = Vec::new();
            for p in &points {
                for k in *lo..=*hi {
                    let mut p = p.clone();
                    p.push(k);
                    next.push(p);
                }
            }
            points = next;
            if points.len() as i64 > MAX_EXPANSION {
                return Err(unsupported());
            }
        }
        let mut instances = Vec::new();
        for p in points {
            let s = Substitution::vars(boxes.iter().zip(p).map(|((v, _, _), k)| (v.clone(), Expr::Int(k))));
            let r = substitute(&q.range, &s).expect("integer instance");
            let t = substitute(&q.term, &s).expect("integer instance");
            instances.push((self.term(&r)?, self.term(&t)?));
        }
        Ok(match q.op {
            QuantOp::Sum => {
                let parts: Vec<String> = instances.iter().map(|(r, t)| format!("(ite {r} {t} 0)")).collect();
                format!("(+ 0 {})", parts.join(" "))
            }
            QuantOp::Count => {
                let parts: Vec<String> = instances.iter().map(|(r, t)| format!("(ite (and {r} {t}) 1 0)")).collect();
                format!("(+ 0 {})", parts.join(" "))
            }
            QuantOp::Max | QuantOp::Min => {
                // Over an empty range the value is an unconstrained constant.
                let name = format!("|ext!{}|", self.fresh);
                self.fresh += 1;
                self.extra_decls.push(format!("(declare-const {name} Int)"));
                let cmp = if q.op == QuantOp::Max { ">" } else { "<" };
                let mut acc = name;
                let mut seen = "false".to_string();
                for (r, t) in instances {
                    acc = format!("(ite {r} (ite (or (not {seen}) ({cmp} {t} {acc})) {t} {acc}) {acc})");
                    seen = format!("(or {seen} {r})");
                }
                acc
            }
            _ => unreachable!(),
        })
    }
}

fn literal_bounds(range: &Expr, v: &str) -> Option<(i64, i64)> {
    let mut lo = None::<i64>;
    let mut hi = None::<i64>;
    for c in range.conjuncts() {
        let Expr::Binary(op, l, r) = c else { continue };
        let (op, k) = match (&**l, &**r) {
            (Expr::Var(n, _), Expr::Int(k)) if n == v => (*op, *k),
            (Expr::Int(k), Expr::Var(n, _)) if n == v => (
                match op {
                    BinOp::Lt => BinOp::Gt,
                    BinOp::Le => BinOp::Ge,
                    BinOp::Gt => BinOp::Lt,
                    BinOp::Ge => BinOp::Le,
                    o => *o,
                },
                *k,
            ),
            _ => continue,
        };
        match op {
            BinOp::Lt => hi = Some(hi.map_or(k - 1, |h: i64| h.min(k - 1))),
            BinOp::Le => hi = Some(hi.map_or(k, |h: i64| h.min(k))),
            BinOp::Gt => lo = Some(lo.map_or(k + 1, |l: i64| l.max(k + 1))),
            BinOp::Ge => lo = Some(lo.map_or(k, |l: i64| l.max(k))),
            BinOp::Eq => {
                lo = Some(lo.map_or(k, |l: i64| l.max(k)));
                hi = Some(hi.map_or(k, |h: i64| h.min(k)));
            }
            _ => {}
        }
    }
    Some((lo?, hi?))
}

/// Script asserting the hypotheses and the negated goal. `unsat` means the
/// obligation is valid.
pub fn to_smtlib(goal: &Goal) -> Result<String, SmtError> {
    let mut em = Emitter {
        fresh: 0,
        extra_decls: Vec::new(),
    };
    let mut body = String::new();
    for h in &goal.hypotheses {
        let _ = writeln!(body, "(assert {})", em.term(h)?);
    }
    let _ = writeln!(body, "(assert (not {}))", em.term(&goal.goal)?);
    let mut out = String::from("(set-option :produce-models true)\n(set-logic ALL)\n");
    for (n, s) in goal.free_vars() {
        let _ = writeln!(out, "(declare-const {} {})", sym(&n), sort_smt(&s));
    }
    for d in &em.extra_decls {
        let _ = writeln!(out, "{d}");
    }
    out.push_str(&body);
    out.push_str("(check-sat)\n(get-model)\n");
    Ok(out)
}

/// Minimal s-expression reader for solver output.
#[derive(Clone, Debug, PartialEq)]
pub enum SExp {
    Atom(String),
    List(Vec<SExp>),
}

pub fn parse_sexps(text: &str) -> Vec<SExp> {
    let chars: Vec<char> = text.chars().collect();
    let mut pos = 0;
    let mut out = Vec::new();
    while let Some(e) = read_sexp(&chars, &mut pos) {
        out.push(e);
    }
    out
}

fn read_sexp(c: &[char], pos: &mut usize) -> Option<SExp> {
    while *pos < c.len() && (c[*pos].is_whitespace() || c[*pos] == ';') {
        if c[*pos] == ';' {
            while *pos < c.len() && c[*pos] != '\n' {
                *pos += 1;
            }
        } else {
            *pos += 1;
        }
    }
    if *pos >= c.len() {
        return None;
    }
    match c[*pos] {
        '(' => {
            *pos += 1;
            let mut items = Vec::new();
            loop {
                while *pos < c.len() && c[*pos].is_whitespace() {
                    *pos += 1;
                }
                if *pos >= c.len() {
                    return Some(SExp::List(items));
                }
                if c[*pos] == ')' {
                    *pos += 1;
                    return Some(SExp::List(items));
                }
                items.push(read_sexp(c, pos)?);
            }
        }
        ')' => {
            *pos += 1;
            read_sexp(c, pos)
        }
        '|' => {
            *pos += 1;
            let start = *pos;
            while *pos < c.len() && c[*pos] != '|' {
                *pos += 1;
            }
            let s: String = c[start..*pos].iter().collect();
            *pos += 1;
            Some(SExp::Atom(s))
        }
        '"' => {
            *pos += 1;
            let start = *pos;
            while *pos < c.len() && c[*pos] != '"' {
                *pos += 1;
            }
            let s: String = c[start..*pos].iter().collect();
            *pos += 1;
            Some(SExp::Atom(s))
        }
        _ => {
            let start = *pos;
            while *pos < c.len() && !c[*pos].is_whitespace() && c[*pos] != '(' && c[*pos] != ')' {
                *pos += 1;
            }
            Some(SExp::Atom(c[start..*pos].iter().collect()))
        }
    }
}

type FunDefs<'a> = BTreeMap<String, (&'a [SExp], &'a SExp)>;

/// Read a `(get-model)` response into a state over the goal's variables.
/// Variables the model omits get default values. Returns `None` when a
/// value cannot be interpreted.
pub fn read_model(text: &str, goal: &Goal) -> Option<State> {
    let sexps = parse_sexps(text);
    let mut defs: FunDefs = BTreeMap::new();
    fn collect<'a>(e: &'a SExp, defs: &mut FunDefs<'a>) {
        if let SExp::List(items) = e {
            if let [SExp::Atom(head), SExp::Atom(name), SExp::List(params), _sort, body] = items.as_slice() {
                if head == "define-fun" {
                    defs.insert(name.clone(), (params.as_slice(), body));
                    return;
                }
            }
            for i in items {
                collect(i, defs);
            }
        }
    }
    for s in &sexps {
        collect(s, &mut defs);
    }
    let mut state = State::new();
    for (n, sort) in goal.free_vars() {
        let v = match defs.get(&n) {
            Some((params, body)) if params.is_empty() => model_value(body, &sort, &defs)?,
            _ => default_value(&sort),
        };
        state.insert(n, v);
    }
    Some(state)
}

fn atom(e: &SExp) -> Option<&str> {
    match e {
        SExp::Atom(a) => Some(a),
        _ => None,
    }
}

fn model_value(e: &SExp, sort: &Sort, defs: &FunDefs) -> Option<Value> {
    match (sort, e) {
        (Sort::Bool, SExp::Atom(a)) => match a.as_str() {
            "true" => Some(Value::Bool(true)),
            "false" => Some(Value::Bool(false)),
            _ => None,
        },
        (Sort::Int, SExp::Atom(a)) => a.parse().ok().map(Value::Int),
        (Sort::Int, SExp::List(items)) => match items.as_slice() {
            [SExp::Atom(m), SExp::Atom(a)] if m == "-" => a.parse::<i64>().ok().map(|v| Value::Int(-v)),
            _ => None,
        },
        (Sort::Array(elem), SExp::List(items)) => {
            match items.as_slice() {
                // ((as const (Array Int T)) v)
                [SExp::List(head), v] if head.first().and_then(atom) == Some("as") => {
                    Some(Value::Array(Arc::new(ArrayValue::constant(model_value(v, elem, defs)?))))
                }
                [SExp::Atom(s), a, i, v] if s == "store" => {
                    let Value::Array(base) = model_value(a, sort, defs)? else {
                        return None;
                    };
                    let Value::Int(i) = model_value(i, &Sort::Int, defs)? else {
                        return None;
                    };
                    let v = model_value(v, elem, defs)?;
                    Some(Value::Array(Arc::new(base.set(i, v).ok()?)))
                }
                // (_ as-array f)
                [SExp::Atom(u), SExp::Atom(k), SExp::Atom(f)] if u == "_" && k == "as-array" => {
                    let (params, body) = defs.get(f)?;
                    let [SExp::List(p)] = params else { return None };
                    let x = atom(p.first()?)?;
                    function_table(body, x, elem, defs)
                }
                [SExp::Atom(l), SExp::List(params), body] if l == "lambda" => {
                    let [SExp::List(p)] = params.as_slice() else { return None };
                    let x = atom(p.first()?)?;
                    function_table(body, x, elem, defs)
                }
                _ => None,
            }
        }
        _ => None,
    }
}

/// Tabulate `(ite (= x k) v rest)` chains into an array.
fn function_table(body: &SExp, x: &str, elem: &Sort, defs: &FunDefs) -> Option<Value> {
    let mut entries = BTreeMap::new();
    let mut cur = body;
    loop {
        if let SExp::List(items) = cur {
            if let [SExp::Atom(ite), SExp::List(cond), v, rest] = items.as_slice() {
                if ite == "ite" {
                    let k = match cond.as_slice() {
                        [SExp::Atom(eq), a, b] if eq == "=" => {
                            if atom(a) == Some(x) {
                                model_value(b, &Sort::Int, defs)?
                            } else if atom(b) == Some(x) {
                                model_value(a, &Sort::Int, defs)?
                            } else {
                                return None;
                            }
                        }
                        _ => return None,
                    };
                    let Value::Int(k) = k else { return None };
                    entries.entry(k).or_insert(model_value(v, elem, defs)?);
                    cur = rest;
                    continue;
                }
            }
        }
        let default = model_value(cur, elem, defs)?;
        return Some(Value::Array(Arc::new(ArrayValue {
            len: None,
            default: Some(Box::new(default)),
            entries,
        })));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, Env};

    fn env() -> Env {
        Env::new()
            .with_var("n", Sort::Int)
            .with_var("r", Sort::Bool)
            .with_var("f", Sort::array_of(Sort::Bool))
            .with_var("a", Sort::array_of(Sort::Int))
    }

    #[test]
    fn trivial_script_shape() {
        let s = to_smtlib(&Goal::new(vec![Expr::Bool(true)], Expr::Bool(true))).unwrap();
        assert!(s.contains("(assert true)"));
        assert!(s.contains("(assert (not true))"));
        assert!(s.contains("(check-sat)"));
    }

    #[test]
    fn declares_free_variables_with_sorts() {
        let g = Goal::new(vec![], parse_formula("f[n] \\equiv r", &env()).unwrap());
        let s = to_smtlib(&g).unwrap();
        assert!(s.contains("(declare-const |f| (Array Int Bool))"));
        assert!(s.contains("(declare-const |n| Int)"));
        assert!(s.contains("(= (select |f| |n|) |r|)"));
    }

    #[test]
    fn sum_with_constant_bounds_expands() {
        let g = Goal::new(vec![], parse_formula("(\\sum i: 0 \\le i < 3: a[i]) = n", &env()).unwrap());
        let s = to_smtlib(&g).unwrap();
        assert!(s.contains("(select |a| 2)"));
        let g = Goal::new(vec![], parse_formula("(\\sum i: 0 \\le i < n: a[i]) = n", &env()).unwrap());
        assert!(matches!(to_smtlib(&g), Err(SmtError::UnsupportedQuantifier(_))));
    }

    #[test]
    fn reads_z3_models() {
        let g = Goal::new(vec![], parse_formula("f[n] \\wedge r \\wedge a[0] = n", &env()).unwrap());
        let text = "(\n  (define-fun n () Int\n    (- 7))\n  (define-fun r () Bool\n    false)\n  (define-fun f () (Array Int Bool)\n    (store ((as const (Array Int Bool)) false) 3 true))\n  (define-fun a () (Array Int Int)\n    (_ as-array k!0))\n  (define-fun k!0 ((x!0 Int)) Int\n    (ite (= x!0 1) 5\n      2))\n)";
        let m = read_model(text, &g).unwrap();
        assert_eq!(m["n"], Value::Int(-7));
        assert_eq!(m["r"], Value::Bool(false));
        let Value::Array(f) = &m["f"] else { panic!() };
        assert_eq!(f.get(3), Ok(Value::Bool(true)));
        assert_eq!(f.get(4), Ok(Value::Bool(false)));
        let Value::Array(a) = &m["a"] else { panic!() };
        assert_eq!(a.get(1), Ok(Value::Int(5)));
        assert_eq!(a.get(0), Ok(Value::Int(2)));
    }
}
