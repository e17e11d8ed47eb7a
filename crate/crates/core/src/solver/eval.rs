//! Evaluation over concrete states.
//!
//! Expressions are compiled to a slot-indexed form before evaluation so the
//! brute-force oracle does not pay for name lookups in its inner loop.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::formula::{BinOp, Expr, QuantOp, Sort, UnOp};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Array(Arc<ArrayValue>),
}

/// An integer-indexed array. Finite arrays (`len = Some(n)`) define exactly
/// the indices `0..n`; arrays from solver models are total maps with a
/// default.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ArrayValue {
    pub len: Option<i64>,
    pub default: Option<Box<Value>>,
    pub entries: BTreeMap<i64, Value>,
}

impl ArrayValue {
    pub fn finite(items: Vec<Value>) -> Self {
        ArrayValue {
            len: Some(items.len() as i64),
            default: None,
            entries: items.into_iter().enumerate().map(|(i, v)| (i as i64, v)).collect(),
        }
    }

    pub fn constant(default: Value) -> Self {
        ArrayValue {
            len: None,
            default: Some(Box::new(default)),
            entries: BTreeMap::new(),
        }
    }

    pub fn get(&self, i: i64) -> Result<Value, EvalError> {
        if let Some(n) = self.len {
            if i < 0 || i >= n {
                return Err(EvalError::OutOfBounds { index: i, len: n });
            }
        }
        self.entries
            .get(&i)
            .cloned()
            .or_else(|| self.default.as_deref().cloned())
            .ok_or(EvalError::OutOfBounds { index: i, len: self.len.unwrap_or(0) })
    }

    pub fn set(&self, i: i64, v: Value) -> Result<ArrayValue, EvalError> {
        if let Some(n) = self.len {
            if i < 0 || i >= n {
                return Err(EvalError::OutOfBounds { index: i, len: n });
            }
        }
        let mut out = self.clone();
        out.entries.insert(i, v);
        Ok(out)
    }

    fn normalized(&self) -> (Option<i64>, Option<&Value>, Vec<(i64, &Value)>) {
        let d = self.default.as_deref();
        let entries = self
            .entries
            .iter()
            .filter(|(_, v)| Some(*v) != d)
            .map(|(k, v)| (*k, v))
            .collect();
        (self.len, d, entries)
    }
}

impl PartialEq for ArrayValue {
    fn eq(&self, other: &Self) -> bool {
        self.normalized() == other.normalized()
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Array(a), Value::Array(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for Value {}

impl Value {
    pub fn array(items: Vec<Value>) -> Value {
        Value::Array(Arc::new(ArrayValue::finite(items)))
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn sort(&self) -> Sort {
        match self {
            Value::Int(_) => Sort::Int,
            Value::Bool(_) => Sort::Bool,
            Value::Array(a) => {
                let elem = a
                    .entries
                    .values()
                    .next()
                    .or(a.default.as_deref())
                    .map(|v| v.sort())
                    .unwrap_or(Sort::Int);
                Sort::array_of(elem)
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Array(a) => {
                if a.len.is_some() && a.default.is_none() {
                    let items: Vec<String> = a.entries.values().map(|v| v.to_string()).collect();
                    write!(f, "[{}]", items.join(", "))
                } else {
                    write!(f, "[")?;
                    let mut first = true;
                    for (k, v) in &a.entries {
                        if !first {
                            write!(f, ", ")?;
                        }
                        first = false;
                        write!(f, "{k} ↦ {v}")?;
                    }
                    if let Some(d) = &a.default {
                        if !first {
                            write!(f, ", ")?;
                        }
                        write!(f, "else {d}")?;
                    }
                    write!(f, "]")
                }
            }
        }
    }
}

/// Assignment of values to variable names.
pub type State = BTreeMap<String, Value>;

pub fn show_state(s: &State) -> String {
    s.iter()
        .map(|(k, v)| format!("{k} = {v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("metavariable {0}' has no value")]
    MetaVariable(String),
    #[error("index {index} out of bounds for length {len}")]
    OutOfBounds { index: i64, len: i64 },
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer overflow")]
    Overflow,
    #[error("{0} over an empty range")]
    EmptyRange(&'static str),
    #[error("ill-sorted value in {0}")]
    Sort(&'static str),
}

/// Interval searched for a bound variable whose range gives no explicit
/// bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuantBox {
    pub lo: i64,
    pub hi: i64,
}

impl Default for QuantBox {
    fn default() -> Self {
        QuantBox { lo: -64, hi: 64 }
    }
}

pub fn floor_div(a: i64, b: i64) -> Result<i64, EvalError> {
    if b == 0 {
        return Err(EvalError::DivisionByZero);
    }
    let q = a.checked_div(b).ok_or(EvalError::Overflow)?;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        Ok(q - 1)
    } else {
        Ok(q)
    }
}

pub fn floor_mod(a: i64, b: i64) -> Result<i64, EvalError> {
    let q = floor_div(a, b)?;
    a.checked_sub(q.checked_mul(b).ok_or(EvalError::Overflow)?)
        .ok_or(EvalError::Overflow)
}

#[derive(Clone, Debug)]
struct Bounds {
    lowers: Vec<Code>,
    uppers: Vec<Code>,
}

#[derive(Clone, Debug)]
enum Code {
    Int(i64),
    Bool(bool),
    Slot(usize),
    Meta(String),
    Read(Box<Code>, Box<Code>),
    Update(Box<Code>, Box<Code>, Box<Code>),
    Not(Box<Code>),
    Neg(Box<Code>),
    Bin(BinOp, Box<Code>, Box<Code>),
    Quant {
        op: QuantOp,
        slots: Vec<usize>,
        bounds: Vec<Bounds>,
        range: Box<Code>,
        term: Box<Code>,
    },
}

/// A compiled expression together with the variable order its slots use.
#[derive(Clone, Debug)]
pub struct Compiled {
    code: Code,
    vars: Vec<String>,
    slots: usize,
    pub quant_box: QuantBox,
}

struct Compiler {
    scope: Vec<(String, usize)>,
    next: usize,
}

impl Compiler {
    fn lookup(&self, name: &str) -> Option<usize> {
        self.scope.iter().rev().find(|(n, _)| n == name).map(|(_, s)| *s)
    }

    fn compile(&mut self, e: &Expr) -> Result<Code, EvalError> {
        Ok(match e {
            Expr::Int(v) => Code::Int(*v),
            Expr::Bool(b) => Code::Bool(*b),
            Expr::Var(n, _) => Code::Slot(self.lookup(n).ok_or_else(|| EvalError::Unbound(n.clone()))?),
            Expr::Meta(n, _) => Code::Meta(n.clone()),
            Expr::Read(a, i) => Code::Read(Box::new(self.compile(a)?), Box::new(self.compile(i)?)),
            Expr::Update(a, i, v) => Code::Update(
                Box::new(self.compile(a)?),
                Box::new(self.compile(i)?),
                Box::new(self.compile(v)?),
            ),
            Expr::Unary(UnOp::Not, a) => Code::Not(Box::new(self.compile(a)?)),
            Expr::Unary(UnOp::Neg, a) => Code::Neg(Box::new(self.compile(a)?)),
            Expr::Binary(op, a, b) => Code::Bin(*op, Box::new(self.compile(a)?), Box::new(self.compile(b)?)),
            Expr::Quant(q) => {
                let mark = self.scope.len();
                let mut slots = Vec::new();
                let mut bounds = Vec::new();
                let conj = q.range.conjuncts();
                for (k, v) in q.vars.iter().enumerate() {
                    let later: Vec<&String> = q.vars[k..].iter().collect();
                    let mut b = Bounds {
                        lowers: Vec::new(),
                        uppers: Vec::new(),
                    };
                    for c in &conj {
                        self.derive_bound(c, v, &later, &mut b)?;
                    }
                    bounds.push(b);
                    let slot = self.next;
                    self.next += 1;
                    self.scope.push((v.clone(), slot));
                    slots.push(slot);
                }
                let range = self.compile(&q.range)?;
                let term = self.compile(&q.term)?;
                self.scope.truncate(mark);
                Code::Quant {
                    op: q.op,
                    slots,
                    bounds,
                    range: Box::new(range),
                    term: Box::new(term),
                }
            }
        })
    }

    /// Read an explicit bound for `v` off one range conjunct, when the other
    /// side only mentions variables already in scope.
    fn derive_bound(&mut self, c: &Expr, v: &str, later: &[&String], out: &mut Bounds) -> Result<(), EvalError> {
        let Expr::Binary(op, l, r) = c else {
            return Ok(());
        };
        if !op.is_relational() || *op == BinOp::Ne {
            return Ok(());
        }
        let is_v = |e: &Expr| matches!(e, Expr::Var(n, _) if n == v);
        let known = |e: &Expr| {
            !e.has_meta() && e.free_var_names().iter().all(|n| !later.contains(&n))
        };
        let (op, other) = if is_v(l) && known(r) {
            (*op, &**r)
        } else if is_v(r) && known(l) {
            let flipped = match op {
                BinOp::Lt => BinOp::Gt,
                BinOp::Le => BinOp::Ge,
                BinOp::Gt => BinOp::Lt,
                BinOp::Ge => BinOp::Le,
                other => *other,
            };
            (flipped, &**l)
        } else {
            return Ok(());
        };
        if other.sort() != Sort::Int {
            return Ok(());
        }
        let code = self.compile(other)?;
        let shifted = |c: Code, d: i64| Code::Bin(BinOp::Add, Box::new(c), Box::new(Code::Int(d)));
        match op {
            BinOp::Lt => out.uppers.push(shifted(code, -1)),
            BinOp::Le => out.uppers.push(code),
            BinOp::Gt => out.lowers.push(shifted(code, 1)),
            BinOp::Ge => out.lowers.push(code),
            BinOp::Eq => {
                out.lowers.push(code.clone());
                out.uppers.push(code);
            }
            _ => {}
        }
        Ok(())
    }
}

impl Compiled {
    /// Compile `e` with free variables bound to slots in the order of `vars`.
    pub fn new(e: &Expr, vars: &[String]) -> Result<Compiled, EvalError> {
        let mut c = Compiler {
            scope: vars.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect(),
            next: vars.len(),
        };
        let code = c.compile(e)?;
        Ok(Compiled {
            code,
            vars: vars.to_vec(),
            slots: c.next,
            quant_box: QuantBox::default(),
        })
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn frame(&self) -> Vec<Value> {
        vec![Value::Int(0); self.slots]
    }

    /// Evaluate with the first `vars.len()` entries of `frame` holding the
    /// variable values. Returns whether a quantifier fell back to the search
    /// box through `limited`.
    pub fn eval_frame(&self, frame: &mut [Value], limited: &mut bool) -> Result<Value, EvalError> {
        run(&self.code, frame, self.quant_box, limited)
    }

    pub fn eval_state(&self, state: &State) -> Result<Value, EvalError> {
        let mut frame = self.frame();
        for (i, n) in self.vars.iter().enumerate() {
            frame[i] = state.get(n).cloned().ok_or_else(|| EvalError::Unbound(n.clone()))?;
        }
        let mut limited = false;
        self.eval_frame(&mut frame, &mut limited)
    }
}

fn int(v: Value, ctx: &'static str) -> Result<i64, EvalError> {
    v.as_int().ok_or(EvalError::Sort(ctx))
}

fn boolean(v: Value, ctx: &'static str) -> Result<bool, EvalError> {
    v.as_bool().ok_or(EvalError::Sort(ctx))
}

fn run(c: &Code, f: &mut [Value], qb: QuantBox, limited: &mut bool) -> Result<Value, EvalError> {
    Ok(match c {
        Code::Int(v) => Value::Int(*v),
        Code::Bool(b) => Value::Bool(*b),
        Code::Slot(s) => f[*s].clone(),
        Code::Meta(n) => return Err(EvalError::MetaVariable(n.clone())),
        Code::Read(a, i) => {
            let arr = run(a, f, qb, limited)?;
            let idx = int(run(i, f, qb, limited)?, "index")?;
            match arr {
                Value::Array(a) => a.get(idx)?,
                _ => return Err(EvalError::Sort("array read")),
            }
        }
        Code::Update(a, i, v) => {
            let arr = run(a, f, qb, limited)?;
            let idx = int(run(i, f, qb, limited)?, "index")?;
            let val = run(v, f, qb, limited)?;
            match arr {
                Value::Array(a) => Value::Array(Arc::new(a.set(idx, val)?)),
                _ => return Err(EvalError::Sort("array update")),
            }
        }
        Code::Not(a) => Value::Bool(!boolean(run(a, f, qb, limited)?, "¬")?),
        Code::Neg(a) => Value::Int(
            int(run(a, f, qb, limited)?, "-")?
                .checked_neg()
                .ok_or(EvalError::Overflow)?,
        ),
        Code::Bin(op, a, b) => {
            use BinOp::*;
            match op {
                And => {
                    if !boolean(run(a, f, qb, limited)?, "∧")? {
                        return Ok(Value::Bool(false));
                    }
                    Value::Bool(boolean(run(b, f, qb, limited)?, "∧")?)
                }
                Or => {
                    if boolean(run(a, f, qb, limited)?, "∨")? {
                        return Ok(Value::Bool(true));
                    }
                    Value::Bool(boolean(run(b, f, qb, limited)?, "∨")?)
                }
                Implies => {
                    if !boolean(run(a, f, qb, limited)?, "⇒")? {
                        return Ok(Value::Bool(true));
                    }
                    Value::Bool(boolean(run(b, f, qb, limited)?, "⇒")?)
                }
                Equiv => {
                    let x = boolean(run(a, f, qb, limited)?, "≡")?;
                    Value::Bool(x == boolean(run(b, f, qb, limited)?, "≡")?)
                }
                Eq => Value::Bool(run(a, f, qb, limited)? == run(b, f, qb, limited)?),
                Ne => Value::Bool(run(a, f, qb, limited)? != run(b, f, qb, limited)?),
                _ => {
                    let x = int(run(a, f, qb, limited)?, op.symbol())?;
                    let y = int(run(b, f, qb, limited)?, op.symbol())?;
                    match op {
                        Add => Value::Int(x.checked_add(y).ok_or(EvalError::Overflow)?),
                        Sub => Value::Int(x.checked_sub(y).ok_or(EvalError::Overflow)?),
                        Mul => Value::Int(x.checked_mul(y).ok_or(EvalError::Overflow)?),
                        Div => Value::Int(floor_div(x, y)?),
                        Mod => Value::Int(floor_mod(x, y)?),
                        Lt => Value::Bool(x < y),
                        Le => Value::Bool(x <= y),
                        Gt => Value::Bool(x > y),
                        Ge => Value::Bool(x >= y),
                        _ => unreachable!("logical operators handled above"),
                    }
                }
            }
        }
        Code::Quant {
            op,
            slots,
            bounds,
            range,
            term,
        } => {
            let mut acc = Acc::new(*op);
            quant_loop(0, slots, bounds, range, term, f, qb, limited, &mut acc)?;
            acc.finish()?
        }
    })
}

struct Acc {
    op: QuantOp,
    bool_acc: bool,
    int_acc: Option<i64>,
    done: bool,
}

impl Acc {
    fn new(op: QuantOp) -> Self {
        Acc {
            op,
            bool_acc: op == QuantOp::Forall,
            int_acc: match op {
                QuantOp::Sum | QuantOp::Count => Some(0),
                _ => None,
            },
            done: false,
        }
    }

    fn add(&mut self, v: Value) -> Result<(), EvalError> {
        match self.op {
            QuantOp::Forall => {
                if !boolean(v, "∀")? {
                    self.bool_acc = false;
                    self.done = true;
                }
            }
            QuantOp::Exists => {
                if boolean(v, "∃")? {
                    self.bool_acc = true;
                    self.done = true;
                }
            }
            QuantOp::Count => {
                if boolean(v, "#")? {
                    self.int_acc = Some(self.int_acc.unwrap_or(0).checked_add(1).ok_or(EvalError::Overflow)?);
                }
            }
            QuantOp::Sum => {
                let x = int(v, "Σ")?;
                self.int_acc = Some(self.int_acc.unwrap_or(0).checked_add(x).ok_or(EvalError::Overflow)?);
            }
            QuantOp::Max => {
                let x = int(v, "↑")?;
                self.int_acc = Some(self.int_acc.map_or(x, |a| a.max(x)));
            }
            QuantOp::Min => {
                let x = int(v, "↓")?;
                self.int_acc = Some(self.int_acc.map_or(x, |a| a.min(x)));
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<Value, EvalError> {
        match self.op {
            QuantOp::Forall | QuantOp::Exists => Ok(Value::Bool(self.bool_acc)),
            QuantOp::Max => self.int_acc.map(Value::Int).ok_or(EvalError::EmptyRange("↑")),
            QuantOp::Min => self.int_acc.map(Value::Int).ok_or(EvalError::EmptyRange("↓")),
            _ => Ok(Value::Int(self.int_acc.unwrap_or(0))),
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn quant_loop(
    k: usize,
    slots: &[usize],
    bounds: &[Bounds],
    range: &Code,
    term: &Code,
    f: &mut [Value],
    qb: QuantBox,
    limited: &mut bool,
    acc: &mut Acc,
) -> Result<(), EvalError> {
    if acc.done {
        return Ok(());
    }
    if k == slots.len() {
        if boolean(run(range, f, qb, limited)?, "range")? {
            let v = run(term, f, qb, limited)?;
            acc.add(v)?;
        }
        return Ok(());
    }
    let b = &bounds[k];
    let mut lo = None::<i64>;
    for c in &b.lowers {
        let v = int(run(c, f, qb, limited)?, "bound")?;
        lo = Some(lo.map_or(v, |l| l.max(v)));
    }
    let mut hi = None::<i64>;
    for c in &b.uppers {
        let v = int(run(c, f, qb, limited)?, "bound")?;
        hi = Some(hi.map_or(v, |h| h.min(v)));
    }
    if lo.is_none() || hi.is_none() {
        *limited = true;
    }
    let lo = lo.unwrap_or(qb.lo);
    let hi = hi.unwrap_or(qb.hi);
    let mut i = lo;
    while i <= hi {
        f[slots[k]] = Value::Int(i);
        quant_loop(k + 1, slots, bounds, range, term, f, qb, limited, acc)?;
        if acc.done {
            break;
        }
        i += 1;
    }
    Ok(())
}

/// Evaluate an expression in a named state.
pub fn evaluate(e: &Expr, state: &State) -> Result<Value, EvalError> {
    let vars: Vec<String> = e.free_var_names().into_iter().collect();
    Compiled::new(e, &vars)?.eval_state(state)
}

/// Evaluate a list of expressions sharing a compilation cache keyed by text.
#[derive(Default)]
pub struct Evaluator {
    cache: HashMap<String, Compiled>,
}

impl Evaluator {
    pub fn eval(&mut self, e: &Expr, state: &State) -> Result<Value, EvalError> {
        let key = crate::formula::alpha_key(e);
        if !self.cache.contains_key(&key) {
            let vars: Vec<String> = e.free_var_names().into_iter().collect();
            self.cache.insert(key.clone(), Compiled::new(e, &vars)?);
        }
        self.cache[&key].eval_state(state)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, Env};

    fn env() -> Env {
        Env::new()
            .with_var("n", Sort::Int)
            .with_var("x", Sort::Int)
            .with_var("f", Sort::array_of(Sort::Bool))
            .with_var("a", Sort::array_of(Sort::Int))
    }

    fn eval_str(src: &str, state: &State) -> Result<Value, EvalError> {
        evaluate(&parse_formula(src, &env()).unwrap(), state)
    }

    fn st(pairs: &[(&str, Value)]) -> State {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn floored_division() {
        assert_eq!(floor_div(7, 2), Ok(3));
        assert_eq!(floor_div(-7, 2), Ok(-4));
        assert_eq!(floor_div(7, -2), Ok(-4));
        assert_eq!(floor_mod(-7, 2), Ok(1));
        assert_eq!(floor_mod(7, -2), Ok(-1));
        assert_eq!(floor_div(1, 0), Err(EvalError::DivisionByZero));
    }

    #[test]
    fn empty_range_gives_identity() {
        let s = st(&[("n", Value::Int(0)), ("f", Value::array(vec![]))]);
        assert_eq!(eval_str("(\\forall i: 0 \\le i < n: f[i])", &s), Ok(Value::Bool(true)));
        assert_eq!(eval_str("(\\exists i: 0 \\le i < n: f[i])", &s), Ok(Value::Bool(false)));
        assert_eq!(eval_str("(\\sum i: 0 \\le i < n: i) = 0", &s), Ok(Value::Bool(true)));
        assert!(matches!(eval_str("(\\max i: 0 \\le i < n: i) = 0", &s), Err(EvalError::EmptyRange(_))));
    }

    #[test]
    fn quantifiers_over_arrays() {
        let s = st(&[
            ("n", Value::Int(3)),
            ("a", Value::array(vec![Value::Int(4), Value::Int(-1), Value::Int(2)])),
        ]);
        assert_eq!(eval_str("(\\sum i: 0 \\le i < n: a[i])", &s), Ok(Value::Int(5)));
        assert_eq!(eval_str("(\\max i: 0 \\le i < n: a[i])", &s), Ok(Value::Int(4)));
        assert_eq!(eval_str("(\\min i: 0 \\le i < n: a[i])", &s), Ok(Value::Int(-1)));
        assert_eq!(eval_str("(\\count i: 0 \\le i < n: a[i] > 0)", &s), Ok(Value::Int(2)));
        assert_eq!(eval_str("(\\forall i, j: 0 \\le i < j < n: a[i] \\ne a[j])", &s), Ok(Value::Bool(true)));
    }

    #[test]
    fn reads_and_updates() {
        let s = st(&[("f", Value::array(vec![Value::Bool(false), Value::Bool(true)])), ("n", Value::Int(1))]);
        assert_eq!(eval_str("f[n]", &s), Ok(Value::Bool(true)));
        assert_eq!(eval_str("f[n \\mapsto false][n]", &s), Ok(Value::Bool(false)));
        assert!(matches!(eval_str("f[n+1]", &s), Err(EvalError::OutOfBounds { .. })));
        let total = Value::Array(Arc::new(ArrayValue::constant(Value::Bool(true))));
        assert_eq!(eval_str("f[100]", &st(&[("f", total)])), Ok(Value::Bool(true)));
    }

    #[test]
    fn array_equality_is_extensional() {
        let a = ArrayValue::constant(Value::Int(0)).set(3, Value::Int(0)).unwrap();
        assert_eq!(a, ArrayValue::constant(Value::Int(0)));
    }
}
