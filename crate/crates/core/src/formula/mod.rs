//! Sorted first-order formulas with Eindhoven quantifiers and metavariables.
//!
//! Expressions are immutable values. Equality (and hashing) is
//! alpha-equivalence: `(∀i: R: T)` equals `(∀k: R[i:=k]: T[i:=k])`.

mod alpha;
mod parse;
mod print;
mod subst;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use alpha::alpha_key;
pub use parse::{is_keyword, parse_formula, Env, ExprParser, FormulaError, Lexer, Token, TokenKind};
pub use print::{pretty_print, Anchor, PrintMode, Rendered};
pub use subst::{
    fresh_name, instantiate_metavars, substitute, InstantiationReport, SubstTarget, Substitution,
};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sort {
    Bool,
    Int,
    /// Integer-indexed array; the element sort is `Bool` or `Int`.
    Array(Box<Sort>),
}

impl Sort {
    pub fn array_of(elem: Sort) -> Sort {
        Sort::Array(Box::new(elem))
    }

    pub fn is_scalar(&self) -> bool {
        matches!(self, Sort::Bool | Sort::Int)
    }

    pub fn element(&self) -> Option<&Sort> {
        match self {
            Sort::Array(e) => Some(e),
            _ => None,
        }
    }

    /// Arrays only hold scalars.
    pub fn is_valid(&self) -> bool {
        match self {
            Sort::Bool | Sort::Int => true,
            Sort::Array(e) => e.is_scalar(),
        }
    }
}

impl fmt::Display for Sort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sort::Bool => write!(f, "Bool"),
            Sort::Int => write!(f, "Int"),
            Sort::Array(e) => write!(f, "Array({e})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UnOp {
    Not,
    Neg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
    Implies,
    Equiv,
}

impl BinOp {
    /// Binding strength, higher binds tighter.
    pub fn precedence(self) -> u8 {
        use BinOp::*;
        match self {
            Mul | Div | Mod => 7,
            Add | Sub => 6,
            Lt | Le | Gt | Ge | Eq | Ne => 5,
            And => 4,
            Or => 3,
            Implies => 2,
            Equiv => 1,
        }
    }

    pub fn is_relational(self) -> bool {
        self.precedence() == 5
    }

    pub fn is_arithmetic(self) -> bool {
        self.precedence() >= 6
    }

    pub fn is_logical(self) -> bool {
        self.precedence() <= 4
    }

    pub fn symbol(self) -> &'static str {
        use BinOp::*;
        match self {
            Add => "+",
            Sub => "-",
            Mul => "*",
            Div => "div",
            Mod => "mod",
            Lt => "<",
            Le => "≤",
            Gt => ">",
            Ge => "≥",
            Eq => "=",
            Ne => "≠",
            And => "∧",
            Or => "∨",
            Implies => "⇒",
            Equiv => "≡",
        }
    }

    pub fn latex(self) -> &'static str {
        use BinOp::*;
        match self {
            Le => "\\le",
            Ge => "\\ge",
            Ne => "\\ne",
            And => "\\wedge",
            Or => "\\vee",
            Implies => "\\Rightarrow",
            Equiv => "\\equiv",
            other => other.symbol(),
        }
    }

    /// Logical negation of a relational operator.
    pub fn negated_relation(self) -> Option<BinOp> {
        use BinOp::*;
        Some(match self {
            Lt => Ge,
            Le => Gt,
            Gt => Le,
            Ge => Lt,
            Eq => Ne,
            Ne => Eq,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QuantOp {
    Forall,
    Exists,
    Sum,
    Count,
    Max,
    Min,
}

impl QuantOp {
    pub const ALL: [QuantOp; 6] = [
        QuantOp::Forall,
        QuantOp::Exists,
        QuantOp::Sum,
        QuantOp::Count,
        QuantOp::Max,
        QuantOp::Min,
    ];

    /// Value of the quantification over an empty range. `Max` and `Min` have
    /// no identity within the integers.
    pub fn identity(self) -> Option<Expr> {
        match self {
            QuantOp::Forall => Some(Expr::Bool(true)),
            QuantOp::Exists => Some(Expr::Bool(false)),
            QuantOp::Sum | QuantOp::Count => Some(Expr::Int(0)),
            QuantOp::Max | QuantOp::Min => None,
        }
    }

    pub fn term_sort(self) -> Sort {
        match self {
            QuantOp::Forall | QuantOp::Exists | QuantOp::Count => Sort::Bool,
            QuantOp::Sum | QuantOp::Max | QuantOp::Min => Sort::Int,
        }
    }

    pub fn result_sort(self) -> Sort {
        match self {
            QuantOp::Forall | QuantOp::Exists => Sort::Bool,
            _ => Sort::Int,
        }
    }

    /// Binary operator the quantifier folds with, when it exists in the
    /// expression language.
    pub fn fold_op(self) -> Option<BinOp> {
        match self {
            QuantOp::Forall => Some(BinOp::And),
            QuantOp::Exists => Some(BinOp::Or),
            QuantOp::Sum => Some(BinOp::Add),
            _ => None,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            QuantOp::Forall => "∀",
            QuantOp::Exists => "∃",
            QuantOp::Sum => "Σ",
            QuantOp::Count => "#",
            QuantOp::Max => "↑",
            QuantOp::Min => "↓",
        }
    }

    pub fn latex(self) -> &'static str {
        match self {
            QuantOp::Forall => "\\forall",
            QuantOp::Exists => "\\exists",
            QuantOp::Sum => "\\sum",
            QuantOp::Count => "\\count",
            QuantOp::Max => "\\max",
            QuantOp::Min => "\\min",
        }
    }
}

/// An Eindhoven quantification `(OP vars: range: term)`. Bound variables are
/// integers.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Quantified {
    pub op: QuantOp,
    pub vars: Vec<String>,
    pub range: Expr,
    pub term: Expr,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    Var(String, Sort),
    /// Placeholder for an unknown expression, written `name'`.
    Meta(String, Sort),
    Read(Box<Expr>, Box<Expr>),
    /// Functional array update `a[i ↦ v]`.
    Update(Box<Expr>, Box<Expr>, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Quant(Box<Quantified>),
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        alpha::alpha_eq(self, other)
    }
}

impl Eq for Expr {}

impl std::hash::Hash for Expr {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        alpha::alpha_hash(self, state)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("sort error in {context}: expected {expected}, found {found}")]
pub struct SortError {
    pub context: String,
    pub expected: String,
    pub found: String,
}

impl SortError {
    pub fn new(context: impl Into<String>, expected: impl fmt::Display, found: impl fmt::Display) -> Self {
        SortError {
            context: context.into(),
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }
}

/// Child-index path from the root of an expression.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ExprPath(pub Vec<usize>);

impl ExprPath {
    pub fn root() -> Self {
        ExprPath(Vec::new())
    }

    pub fn child(&self, i: usize) -> Self {
        let mut v = self.0.clone();
        v.push(i);
        ExprPath(v)
    }
}

impl fmt::Display for ExprPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ".")?;
            }
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for ExprPath {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_path_digits(s).map(ExprPath)
    }
}

pub(crate) fn parse_path_digits(s: &str) -> Result<Vec<usize>, String> {
    let body = s
        .trim()
        .strip_prefix('@')
        .ok_or_else(|| format!("path must start with '@': {s:?}"))?;
    if body.is_empty() {
        return Ok(Vec::new());
    }
    body.split('.')
        .map(|p| p.parse::<usize>().map_err(|_| format!("bad path component {p:?} in {s:?}")))
        .collect()
}

impl Expr {
    pub fn int(v: i64) -> Expr {
        Expr::Int(v)
    }

    pub fn bool(v: bool) -> Expr {
        Expr::Bool(v)
    }

    pub fn var(name: impl Into<String>, sort: Sort) -> Expr {
        Expr::Var(name.into(), sort)
    }

    pub fn int_var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into(), Sort::Int)
    }

    pub fn bool_var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into(), Sort::Bool)
    }

    pub fn meta(name: impl Into<String>, sort: Sort) -> Expr {
        Expr::Meta(name.into(), sort)
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Unary(UnOp::Not, Box::new(e))
    }

    pub fn neg(e: Expr) -> Expr {
        Expr::Unary(UnOp::Neg, Box::new(e))
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::And, a, b)
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Or, a, b)
    }

    pub fn implies(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Implies, a, b)
    }

    pub fn equiv(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Equiv, a, b)
    }

    pub fn eq(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Eq, a, b)
    }

    pub fn ne(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Ne, a, b)
    }

    pub fn lt(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Lt, a, b)
    }

    pub fn le(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Le, a, b)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Add, a, b)
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        Expr::binary(BinOp::Sub, a, b)
    }

    pub fn read(array: Expr, index: Expr) -> Expr {
        Expr::Read(Box::new(array), Box::new(index))
    }

    pub fn update(array: Expr, index: Expr, value: Expr) -> Expr {
        Expr::Update(Box::new(array), Box::new(index), Box::new(value))
    }

    pub fn quant(op: QuantOp, vars: Vec<String>, range: Expr, term: Expr) -> Expr {
        Expr::Quant(Box::new(Quantified {
            op,
            vars,
            range,
            term,
        }))
    }

    pub fn forall(vars: &[&str], range: Expr, term: Expr) -> Expr {
        Expr::quant(
            QuantOp::Forall,
            vars.iter().map(|v| v.to_string()).collect(),
            range,
            term,
        )
    }

    /// Left-nested conjunction; the empty conjunction is `true`.
    pub fn conj(items: impl IntoIterator<Item = Expr>) -> Expr {
        items
            .into_iter()
            .reduce(Expr::and)
            .unwrap_or(Expr::Bool(true))
    }

    /// Left-nested disjunction; the empty disjunction is `false`.
    pub fn disj(items: impl IntoIterator<Item = Expr>) -> Expr {
        items
            .into_iter()
            .reduce(Expr::or)
            .unwrap_or(Expr::Bool(false))
    }

    /// Negation that folds relational operators (`¬(a = b)` becomes `a ≠ b`).
    pub fn negate(e: Expr) -> Expr {
        match e {
            Expr::Binary(op, a, b) if op.is_relational() => {
                Expr::Binary(op.negated_relation().expect("relational"), a, b)
            }
            Expr::Unary(UnOp::Not, inner) => *inner,
            Expr::Bool(b) => Expr::Bool(!b),
            other => Expr::not(other),
        }
    }

    /// Conjuncts along the left spine of `∧`, keeping right operands and
    /// relational chains such as `0 ≤ n ≤ N` whole. This is the split used
    /// when conjuncts are named `P0, P1, ...`.
    pub fn top_conjuncts(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        let mut cur = self;
        while let Expr::Binary(BinOp::And, a, b) = cur {
            if cur.is_chain() {
                break;
            }
            out.push(&**b);
            cur = a;
        }
        out.push(cur);
        out.reverse();
        out
    }

    /// A conjunction printed as a relational chain (`a < b ≤ c`).
    pub fn is_chain(&self) -> bool {
        print::is_chain(self)
    }

    /// Flattened top-level conjuncts.
    pub fn conjuncts(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        fn walk<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
            match e {
                Expr::Binary(BinOp::And, a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    /// Sort of a well-sorted expression.
    pub fn sort(&self) -> Sort {
        match self {
            Expr::Int(_) => Sort::Int,
            Expr::Bool(_) => Sort::Bool,
            Expr::Var(_, s) | Expr::Meta(_, s) => s.clone(),
            Expr::Read(a, _) => a.sort().element().cloned().unwrap_or(Sort::Int),
            Expr::Update(a, _, _) => a.sort(),
            Expr::Unary(UnOp::Not, _) => Sort::Bool,
            Expr::Unary(UnOp::Neg, _) => Sort::Int,
            Expr::Binary(op, _, _) => {
                if op.is_arithmetic() {
                    Sort::Int
                } else {
                    Sort::Bool
                }
            }
            Expr::Quant(q) => q.op.result_sort(),
        }
    }

    /// Full sort check. Returns the sort on success.
    pub fn check_sort(&self) -> Result<Sort, SortError> {
        fn expect(e: &Expr, want: &Sort, ctx: &str) -> Result<(), SortError> {
            let got = e.check_sort()?;
            if &got != want {
                return Err(SortError::new(ctx, want, got));
            }
            Ok(())
        }
        match self {
            Expr::Int(_) => Ok(Sort::Int),
            Expr::Bool(_) => Ok(Sort::Bool),
            Expr::Var(name, s) | Expr::Meta(name, s) => {
                if s.is_valid() {
                    Ok(s.clone())
                } else {
                    Err(SortError::new(format!("declaration of {name}"), "scalar or array of scalars", s))
                }
            }
            Expr::Read(a, i) => {
                let sa = a.check_sort()?;
                let elem = sa
                    .element()
                    .cloned()
                    .ok_or_else(|| SortError::new("array read", "Array", &sa))?;
                expect(i, &Sort::Int, "array index")?;
                Ok(elem)
            }
            Expr::Update(a, i, v) => {
                let sa = a.check_sort()?;
                let elem = sa
                    .element()
                    .cloned()
                    .ok_or_else(|| SortError::new("array update", "Array", &sa))?;
                expect(i, &Sort::Int, "array index")?;
                expect(v, &elem, "array update value")?;
                Ok(sa)
            }
            Expr::Unary(UnOp::Not, a) => {
                expect(a, &Sort::Bool, "¬")?;
                Ok(Sort::Bool)
            }
            Expr::Unary(UnOp::Neg, a) => {
                expect(a, &Sort::Int, "unary -")?;
                Ok(Sort::Int)
            }
            Expr::Binary(op, a, b) => {
                use BinOp::*;
                match op {
                    Add | Sub | Mul | Div | Mod => {
                        expect(a, &Sort::Int, op.symbol())?;
                        expect(b, &Sort::Int, op.symbol())?;
                        Ok(Sort::Int)
                    }
                    Lt | Le | Gt | Ge => {
                        expect(a, &Sort::Int, op.symbol())?;
                        expect(b, &Sort::Int, op.symbol())?;
                        Ok(Sort::Bool)
                    }
                    Eq | Ne => {
                        let sa = a.check_sort()?;
                        expect(b, &sa, op.symbol())?;
                        Ok(Sort::Bool)
                    }
                    And | Or | Implies | Equiv => {
                        expect(a, &Sort::Bool, op.symbol())?;
                        expect(b, &Sort::Bool, op.symbol())?;
                        Ok(Sort::Bool)
                    }
                }
            }
            Expr::Quant(q) => {
                let mut seen = BTreeSet::new();
                for v in &q.vars {
                    if !seen.insert(v) {
                        return Err(SortError::new(
                            "quantifier",
                            "distinct bound variables",
                            format!("{v} bound twice"),
                        ));
                    }
                }
                expect(&q.range, &Sort::Bool, "quantifier range")?;
                expect(&q.term, &q.op.term_sort(), "quantifier term")?;
                Ok(q.op.result_sort())
            }
        }
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Int(_) | Expr::Bool(_) | Expr::Var(..) | Expr::Meta(..) => vec![],
            Expr::Read(a, i) => vec![a, i],
            Expr::Update(a, i, v) => vec![a, i, v],
            Expr::Unary(_, a) => vec![a],
            Expr::Binary(_, a, b) => vec![a, b],
            Expr::Quant(q) => vec![&q.range, &q.term],
        }
    }

    pub fn subterm(&self, path: &ExprPath) -> Option<&Expr> {
        let mut cur = self;
        for &i in &path.0 {
            cur = *cur.children().get(i)?;
        }
        Some(cur)
    }

    /// Names bound by quantifiers strictly above the subterm at `path`.
    pub fn binders_along(&self, path: &ExprPath) -> Option<Vec<String>> {
        let mut cur = self;
        let mut out = Vec::new();
        for &i in &path.0 {
            if let Expr::Quant(q) = cur {
                out.extend(q.vars.iter().cloned());
            }
            cur = *cur.children().get(i)?;
        }
        Some(out)
    }

    /// Replace the subterm at `path` (no capture checks).
    pub fn replace_at(&self, path: &ExprPath, new: Expr) -> Option<Expr> {
        fn go(e: &Expr, path: &[usize], new: Expr) -> Option<Expr> {
            let Some((&first, rest)) = path.split_first() else {
                return Some(new);
            };
            let mut e = e.clone();
            let slot: &mut Expr = match (&mut e, first) {
                (Expr::Read(a, _), 0) | (Expr::Update(a, _, _), 0) => a,
                (Expr::Read(_, i), 1) | (Expr::Update(_, i, _), 1) => i,
                (Expr::Update(_, _, v), 2) => v,
                (Expr::Unary(_, a), 0) => a,
                (Expr::Binary(_, a, _), 0) => a,
                (Expr::Binary(_, _, b), 1) => b,
                (Expr::Quant(q), 0) => &mut q.range,
                (Expr::Quant(q), 1) => &mut q.term,
                _ => return None,
            };
            *slot = go(slot, rest, new)?;
            Some(e)
        }
        go(self, &path.0, new)
    }

    /// Free program variables with their sorts. Metavariables are excluded.
    pub fn free_vars(&self) -> BTreeSet<(String, Sort)> {
        let mut out = BTreeSet::new();
        let mut bound = Vec::new();
        collect_free(self, &mut bound, &mut out);
        out
    }

    pub fn free_var_names(&self) -> BTreeSet<String> {
        self.free_vars().into_iter().map(|(n, _)| n).collect()
    }

    /// Metavariables occurring in the expression.
    pub fn meta_vars(&self) -> BTreeSet<(String, Sort)> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| {
            if let Expr::Meta(n, s) = e {
                out.insert((n.clone(), s.clone()));
            }
        });
        out
    }

    pub fn has_meta(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= matches!(e, Expr::Meta(..)));
        found
    }

    pub fn has_quantifier(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= matches!(e, Expr::Quant(..)));
        found
    }

    /// All variable names occurring anywhere, bound or free.
    pub fn all_var_names(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |e| match e {
            Expr::Var(n, _) => {
                out.insert(n.clone());
            }
            Expr::Quant(q) => out.extend(q.vars.iter().cloned()),
            _ => {}
        });
        out
    }

    /// Pre-order traversal.
    pub fn walk(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    pub fn depth(&self) -> usize {
        1 + self.children().iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Structural identity including bound variable names.
    pub fn syntactic_eq(&self, other: &Expr) -> bool {
        match (self, other) {
            (Expr::Int(a), Expr::Int(b)) => a == b,
            (Expr::Bool(a), Expr::Bool(b)) => a == b,
            (Expr::Var(a, s), Expr::Var(b, t)) | (Expr::Meta(a, s), Expr::Meta(b, t)) => {
                a == b && s == t
            }
            (Expr::Read(a, i), Expr::Read(b, j)) => a.syntactic_eq(b) && i.syntactic_eq(j),
            (Expr::Update(a, i, v), Expr::Update(b, j, w)) => {
                a.syntactic_eq(b) && i.syntactic_eq(j) && v.syntactic_eq(w)
            }
            (Expr::Unary(o, a), Expr::Unary(p, b)) => o == p && a.syntactic_eq(b),
            (Expr::Binary(o, a, b), Expr::Binary(p, c, d)) => {
                o == p && a.syntactic_eq(c) && b.syntactic_eq(d)
            }
            (Expr::Quant(q), Expr::Quant(r)) => {
                q.op == r.op
                    && q.vars == r.vars
                    && q.range.syntactic_eq(&r.range)
                    && q.term.syntactic_eq(&r.term)
            }
            _ => false,
        }
    }
}

fn collect_free(e: &Expr, bound: &mut Vec<String>, out: &mut BTreeSet<(String, Sort)>) {
    match e {
        Expr::Var(n, s) => {
            if !bound.contains(n) {
                out.insert((n.clone(), s.clone()));
            }
        }
        Expr::Quant(q) => {
            let mark = bound.len();
            bound.extend(q.vars.iter().cloned());
            collect_free(&q.range, bound, out);
            collect_free(&q.term, bound, out);
            bound.truncate(mark);
        }
        other => {
            for c in other.children() {
                collect_free(c, bound, out);
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_print(self, PrintMode::Normal).text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f_all(bound: Expr) -> Expr {
        Expr::forall(
            &["i"],
            Expr::and(Expr::le(Expr::int(0), Expr::int_var("i")), Expr::lt(Expr::int_var("i"), bound)),
            Expr::read(Expr::var("f", Sort::array_of(Sort::Bool)), Expr::int_var("i")),
        )
    }

    #[test]
    fn free_vars_skip_bound() {
        let e = f_all(Expr::int_var("n"));
        let names = e.free_var_names();
        assert_eq!(names.into_iter().collect::<Vec<_>>(), vec!["f", "n"]);
        assert!(Expr::Bool(true).free_vars().is_empty());
    }

    #[test]
    fn alpha_equivalent_quantifiers_are_equal() {
        let a = f_all(Expr::int_var("n"));
        let b = Expr::forall(
            &["k"],
            Expr::and(Expr::le(Expr::int(0), Expr::int_var("k")), Expr::lt(Expr::int_var("k"), Expr::int_var("n"))),
            Expr::read(Expr::var("f", Sort::array_of(Sort::Bool)), Expr::int_var("k")),
        );
        assert_eq!(a, b);
        assert!(!a.syntactic_eq(&b));
        assert_ne!(a, f_all(Expr::int_var("m")));
    }

    #[test]
    fn sort_checking() {
        assert_eq!(f_all(Expr::int_var("n")).check_sort(), Ok(Sort::Bool));
        let bad = Expr::and(Expr::int(1), Expr::Bool(true));
        assert!(bad.check_sort().is_err());
        let dup = Expr::quant(QuantOp::Forall, vec!["i".into(), "i".into()], Expr::Bool(true), Expr::Bool(true));
        assert!(dup.check_sort().is_err());
        assert!(!Sort::array_of(Sort::array_of(Sort::Int)).is_valid());
    }

    #[test]
    fn paths_address_subterms() {
        let e = f_all(Expr::int_var("n"));
        let p = ExprPath(vec![0, 1, 1]);
        assert_eq!(e.subterm(&p), Some(&Expr::int_var("n")));
        let e2 = e.replace_at(&p, Expr::add(Expr::int_var("n"), Expr::int(1))).unwrap();
        assert_eq!(e2, f_all(Expr::add(Expr::int_var("n"), Expr::int(1))));
        assert_eq!(e.binders_along(&p).unwrap(), vec!["i".to_string()]);
        assert_eq!("@0.1.1".parse::<ExprPath>().unwrap(), p);
        assert_eq!(p.to_string(), "@0.1.1");
    }

    #[test]
    fn negate_folds_relations() {
        let e = Expr::negate(Expr::eq(Expr::int_var("n"), Expr::int_var("N")));
        assert!(e.syntactic_eq(&Expr::ne(Expr::int_var("n"), Expr::int_var("N"))));
        assert_eq!(Expr::conj(vec![]), Expr::Bool(true));
    }

    #[test]
    fn empty_range_identities() {
        assert_eq!(QuantOp::Forall.identity(), Some(Expr::Bool(true)));
        assert_eq!(QuantOp::Exists.identity(), Some(Expr::Bool(false)));
        assert_eq!(QuantOp::Sum.identity(), Some(Expr::Int(0)));
        assert_eq!(QuantOp::Max.identity(), None);
    }
}
