//! Infix rendering with only the parentheses the grammar needs.

use serde::{Deserialize, Serialize};

use super::{BinOp, Expr, ExprPath, UnOp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrintMode {
    Normal,
    /// Also records a path anchor for every subterm.
    Selection,
}

/// Character range `[start, end)` of the subterm at `path`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anchor {
    pub path: ExprPath,
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rendered {
    pub text: String,
    pub anchors: Vec<Anchor>,
}

impl Rendered {
    /// Innermost anchor covering character `pos`.
    pub fn anchor_at(&self, pos: usize) -> Option<&Anchor> {
        self.anchors
            .iter()
            .filter(|a| a.start <= pos && pos < a.end)
            .min_by_key(|a| (a.end - a.start, std::cmp::Reverse(a.path.0.len())))
    }
}

pub fn pretty_print(e: &Expr, mode: PrintMode) -> Rendered {
    let mut p = Printer {
        out: String::new(),
        len: 0,
        anchors: Vec::new(),
        selection: mode == PrintMode::Selection,
    };
    p.expr(e, ExprPath::root());
    Rendered {
        text: p.out,
        anchors: p.anchors,
    }
}

struct Printer {
    out: String,
    len: usize,
    anchors: Vec<Anchor>,
    selection: bool,
}

/// Relational links of a printed chain `a < b ≤ c`, with the paths of the
/// links and of the conjunctions that join them.
struct Chain<'a> {
    links: Vec<(ExprPath, &'a Expr)>,
    joins: Vec<ExprPath>,
}

fn relational_parts(e: &Expr) -> Option<(BinOp, &Expr, &Expr)> {
    match e {
        Expr::Binary(op, a, b) if op.is_relational() => Some((*op, a, b)),
        _ => None,
    }
}

fn chain_of<'a>(e: &'a Expr, path: &ExprPath) -> Option<Chain<'a>> {
    if relational_parts(e).is_some() {
        return Some(Chain {
            links: vec![(path.clone(), e)],
            joins: Vec::new(),
        });
    }
    let Expr::Binary(BinOp::And, l, r) = e else {
        return None;
    };
    let (_, r_lhs, _) = relational_parts(r)?;
    let mut chain = chain_of(l, &path.child(0))?;
    let (_, _, last_rhs) = relational_parts(chain.links.last()?.1)?;
    if !last_rhs.syntactic_eq(r_lhs) {
        return None;
    }
    chain.links.push((path.child(1), r));
    chain.joins.push(path.clone());
    Some(chain)
}

pub(crate) fn is_chain(e: &Expr) -> bool {
    matches!(e, Expr::Binary(BinOp::And, ..)) && chain_of(e, &ExprPath::root()).is_some()
}

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Binary(op, ..) => {
            if is_chain(e) {
                BinOp::Lt.precedence()
            } else {
                op.precedence()
            }
        }
        _ => u8::MAX,
    }
}

fn needs_parens(parent: BinOp, child: &Expr, right: bool) -> bool {
    let Expr::Binary(cop, ..) = child else {
        return false;
    };
    let (cp, pp) = (level(child), parent.precedence());
    if cp < pp {
        return true;
    }
    if cp > pp {
        // ∧ under ∨ is bracketed for readability.
        return parent == BinOp::Or && *cop == BinOp::And && !is_chain(child);
    }
    match parent {
        BinOp::Equiv => true,
        BinOp::Implies => !right,
        p if p.is_relational() => true,
        _ => right,
    }
}

fn spaced(op: BinOp) -> String {
    match op {
        BinOp::Add | BinOp::Sub | BinOp::Mul => op.symbol().to_string(),
        BinOp::Equiv => format!("  {}  ", op.symbol()),
        _ => format!(" {} ", op.symbol()),
    }
}

impl Printer {
    fn push(&mut self, s: &str) {
        self.out.push_str(s);
        self.len += s.chars().count();
    }

    fn anchor(&mut self, path: ExprPath, start: usize) {
        if self.selection {
            self.anchors.push(Anchor {
                path,
                start,
                end: self.len,
            });
        }
    }

    fn expr(&mut self, e: &Expr, path: ExprPath) {
        let start = self.len;
        match e {
            Expr::Int(v) => self.push(&v.to_string()),
            Expr::Bool(b) => self.push(if *b { "true" } else { "false" }),
            Expr::Var(n, _) => self.push(n),
            Expr::Meta(n, _) => {
                self.push(n);
                self.push("'");
            }
            Expr::Read(a, i) => {
                self.operand_postfix(a, path.child(0));
                self.push("[");
                self.expr(i, path.child(1));
                self.push("]");
            }
            Expr::Update(a, i, v) => {
                self.operand_postfix(a, path.child(0));
                self.push("[");
                self.expr(i, path.child(1));
                self.push(" ↦ ");
                self.expr(v, path.child(2));
                self.push("]");
            }
            Expr::Unary(op, a) => {
                self.push(match op {
                    UnOp::Not => "¬",
                    UnOp::Neg => "-",
                });
                let wrap = matches!(**a, Expr::Binary(..))
                    || (*op == UnOp::Neg && matches!(**a, Expr::Int(_)));
                self.wrapped(a, path.child(0), wrap);
            }
            Expr::Binary(op, a, b) => {
                if let Some(chain) = chain_of(e, &path).filter(|c| c.links.len() > 1) {
                    self.chain(chain);
                    return;
                }
                self.wrapped(a, path.child(0), needs_parens(*op, a, false));
                self.push(&spaced(*op));
                self.wrapped(b, path.child(1), needs_parens(*op, b, true));
            }
            Expr::Quant(q) => {
                self.push("(");
                self.push(q.op.symbol());
                self.push(&q.vars.join(", "));
                self.push(": ");
                self.expr(&q.range, path.child(0));
                self.push(": ");
                self.expr(&q.term, path.child(1));
                self.push(")");
            }
        }
        self.anchor(path, start);
    }

    fn operand_postfix(&mut self, a: &Expr, path: ExprPath) {
        let wrap = matches!(a, Expr::Binary(..) | Expr::Unary(..));
        self.wrapped(a, path, wrap);
    }

    fn wrapped(&mut self, e: &Expr, path: ExprPath, wrap: bool) {
        if wrap {
            self.push("(");
            self.expr(e, path);
            self.push(")");
        } else {
            self.expr(e, path);
        }
    }

    fn chain(&mut self, chain: Chain<'_>) {
        let chain_start = self.len;
        let mut link_starts = Vec::new();
        let mut prev_operand: Option<(ExprPath, usize, usize)> = None;
        for (k, (lpath, link)) in chain.links.iter().enumerate() {
            let (op, lhs, rhs) = relational_parts(link).expect("chain link");
            if k == 0 {
                let s = self.len;
                self.wrapped(lhs, lpath.child(0), needs_parens(op, lhs, false));
                link_starts.push(s);
            } else {
                let (_, s, end) = prev_operand.clone().expect("previous operand");
                if self.selection {
                    self.anchors.push(Anchor {
                        path: lpath.child(0),
                        start: s,
                        end,
                    });
                }
                link_starts.push(s);
            }
            self.push(&spaced(op));
            let s = self.len;
            self.wrapped(rhs, lpath.child(1), needs_parens(op, rhs, true));
            prev_operand = Some((lpath.child(1), s, self.len));
            let start = link_starts[k];
            self.anchor(lpath.clone(), start);
            if k > 0 {
                self.anchor(chain.joins[k - 1].clone(), chain_start);
            }
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
            .with_var("a", Sort::Bool)
            .with_var("b", Sort::Bool)
            .with_var("c", Sort::Bool)
            .with_var("r", Sort::Bool)
            .with_var("f", Sort::array_of(Sort::Bool))
    }

    fn show(src: &str) -> String {
        parse_formula(src, &env()).unwrap().to_string()
    }

    #[test]
    fn precedence_forces_parentheses() {
        let e = Expr::and(Expr::bool_var("a"), Expr::or(Expr::bool_var("b"), Expr::bool_var("c")));
        assert_eq!(e.to_string(), "a ∧ (b ∨ c)");
        assert_eq!(show("a \\vee b \\wedge c"), "a ∨ (b ∧ c)");
        assert_eq!(show("(a \\Rightarrow b) \\Rightarrow c"), "(a ⇒ b) ⇒ c");
        assert_eq!(show("a \\Rightarrow b \\Rightarrow c"), "a ⇒ b ⇒ c");
        assert_eq!(show("n - (n - 1) < n*2"), "n-(n-1) < n*2");
    }

    #[test]
    fn node_e_shape() {
        let env = env().with_meta("r", Sort::Bool);
        let e = parse_formula("r' \\equiv (r \\wedge \\neg f[n]) \\vee (\\forall i: 0 \\le i < n+1: f[i])", &env).unwrap();
        let flat: String = e.to_string().split_whitespace().collect();
        assert_eq!(flat, "r'≡(r∧¬f[n])∨(∀i:0≤i<n+1:f[i])");
    }

    #[test]
    fn chains_print_as_chains() {
        assert_eq!(show("0 \\le n < n+1"), "0 ≤ n < n+1");
        assert_eq!(show("0 \\le n \\wedge n < n+1"), "0 ≤ n < n+1");
        assert_eq!(show("0 \\le n \\wedge n+0 < n"), "0 ≤ n ∧ n+0 < n");
    }

    #[test]
    fn negative_numbers() {
        assert_eq!(show("-3 - -n"), "-3--n");
        assert_eq!(Expr::neg(Expr::int(3)).to_string(), "-(3)");
    }

    #[test]
    fn selection_anchors_cover_subterms() {
        let e = parse_formula("a \\wedge \\neg f[n]", &env()).unwrap();
        let r = pretty_print(&e, PrintMode::Selection);
        let root = r.anchors.iter().find(|a| a.path.0.is_empty()).unwrap();
        assert_eq!((root.start, root.end), (0, r.text.chars().count()));
        let pos = r.text.chars().position(|c| c == 'n').unwrap();
        assert_eq!(r.anchor_at(pos).unwrap().path, ExprPath(vec![1, 0, 1]));
        assert_eq!(pretty_print(&e, PrintMode::Normal).anchors.len(), 0);
    }

    #[test]
    fn chain_anchors_include_links() {
        let e = parse_formula("0 \\le n < n+1", &env()).unwrap();
        let r = pretty_print(&e, PrintMode::Selection);
        for path in [vec![0], vec![1], vec![0, 1], vec![1, 0], vec![1, 1]] {
            assert!(r.anchors.iter().any(|a| a.path.0 == path), "{path:?}");
        }
    }
}
