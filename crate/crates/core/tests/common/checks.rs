//! Property bodies shared by the proptest suite and the acceptance report.

use calcdev::formula::{parse_formula, BinOp, pretty_print, substitute, Env, Expr, PrintMode, Sort, Substitution};
use calcdev::program::Stmt;
use calcdev::solver::{evaluate, outcomes, ExecError, State};
use calcdev::wp::{annotate, wp_stmt};
use proptest::test_runner::TestCaseError;

use super::{all_states, arr_sort};

pub fn env() -> Env {
    Env::new()
        .with_var("x", Sort::Int)
        .with_var("y", Sort::Int)
        .with_var("p", Sort::Bool)
        .with_var("q", Sort::Bool)
        .with_var("a", arr_sort())
}

pub fn truth(e: &Expr, s: &State) -> Option<bool> {
    evaluate(e, s).ok().and_then(|v| v.as_bool())
}

pub fn round_trip(e: &Expr) -> Result<(), TestCaseError> {
    let text = pretty_print(e, PrintMode::Normal).text;
    let back = parse_formula(&text, &env()).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
    if &back != e {
        return Err(TestCaseError::fail(format!("{text} reparsed as {back:?}")));
    }
    Ok(())
}

/// Byte ranges of grouping parentheses; the ones opening a quantifier are
/// part of its notation and are skipped.
fn grouping_parens(text: &str) -> Vec<(usize, usize)> {
    let mut open = Vec::new();
    let mut out = Vec::new();
    for (i, c) in text.char_indices() {
        match c {
            '(' => {
                let quant = text[i + 1..].starts_with(['∀', '∃', 'Σ', '#']);
                open.push((i, quant));
            }
            ')' => {
                if let Some((j, quant)) = open.pop() {
                    if !quant {
                        out.push((j, i));
                    }
                }
            }
            _ => {}
        }
    }
    out
}

/// The printer brackets a conjunction that is an operand of a disjunction.
fn conjunction_under_disjunction(text: &str, l: usize, r: usize) -> bool {
    let scope = env().with_var("i", Sort::Int).with_var("j", Sort::Int).with_var("k", Sort::Int);
    let inner = parse_formula(&text[l + 1..r], &scope);
    let and = matches!(inner, Ok(Expr::Binary(BinOp::And, ..)));
    and && (text[..l].trim_end().ends_with('∨') || text[r + 1..].trim_start().starts_with('∨'))
}

/// Dropping any one pair of grouping parentheses from the printed text
/// must change the meaning or break the parse.
pub fn parens_are_minimal(e: &Expr) -> Result<(), TestCaseError> {
    let text = pretty_print(e, PrintMode::Normal).text;
    for (l, r) in grouping_parens(&text) {
        if conjunction_under_disjunction(&text, l, r) {
            continue;
        }
        let cut = format!("{}{}{}", &text[..l], &text[l + 1..r], &text[r + 1..]);
        if let Ok(other) = parse_formula(&cut, &env()) {
            if &other == e {
                return Err(TestCaseError::fail(format!("redundant parentheses in {text}")));
            }
        }
    }
    Ok(())
}

/// e[v := t] in s agrees with e in s[v := t(s)].
pub fn substitution_lemma(e: &Expr, t: &Expr, var: &str, s: &State) -> Result<(), TestCaseError> {
    let Ok(tv) = evaluate(t, s) else { return Ok(()) };
    let lhs = evaluate(&substitute(e, &Substitution::vars([(var.to_string(), t.clone())])).unwrap(), s);
    let mut s2 = s.clone();
    s2.insert(var.to_string(), tv);
    let rhs = evaluate(e, &s2);
    match (lhs, rhs) {
        (Ok(l), Ok(r)) if l == r => Ok(()),
        (Err(_), Err(_)) => Ok(()),
        (l, r) => Err(TestCaseError::fail(format!("{l:?} vs {r:?}"))),
    }
}

/// s ⊨ wp(S, R) exactly when no execution of S from s aborts and every one
/// ends in R. Returns the number of states compared.
pub fn wp_matches_execution(st: &Stmt, post: &Expr) -> Result<usize, TestCaseError> {
    let w = wp_stmt(st, post).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let ap = annotate(st, &Expr::Bool(true), post).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let states = all_states(0, 3);
    for s in &states {
        let pre = truth(&w, s);
        let expect = match outcomes(&ap.body, s, 10_000) {
            Ok(outs) => outs.iter().all(|o| truth(post, o) == Some(true)),
            Err(ExecError::Abort) => false,
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        };
        if pre != Some(expect) {
            return Err(TestCaseError::fail(format!("state {s:?}: wp gives {pre:?}, execution {expect}")));
        }
    }
    Ok(states.len())
}
