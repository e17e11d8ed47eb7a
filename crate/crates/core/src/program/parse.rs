//! Program text: `skip`, `x, a[i] := e, e'`, `if g -> S [] g -> S fi`,
//! `do g -> S od`, sequenced with `;`.

use super::Target;
use crate::formula::{Env, Expr, ExprParser, FormulaError, Lexer, Sort, TokenKind};

/// A program without annotations, as entered by the user.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    Skip,
    Assign(Vec<Target>, Vec<Expr>),
    Seq(Vec<Stmt>),
    If(Vec<(Expr, Stmt)>),
    Do(Expr, Box<Stmt>),
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ProgramParseError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error("{0} is not an assignable variable")]
    NotAssignable(String),
    #[error("{target} := {expr}: sorts differ")]
    Sort { target: String, expr: String },
    #[error("{0} targets but {1} expressions")]
    Arity(usize, usize),
    #[error("bad declaration: {0}")]
    Declaration(String),
}

pub fn parse_stmt(text: &str, env: &Env) -> Result<Stmt, ProgramParseError> {
    let tokens = Lexer::tokenize(text)?;
    let mut p = ExprParser::new(&tokens, env);
    let s = seq(&mut p, env)?;
    p.expect_eof()?;
    Ok(s)
}

/// Comma-separated assignment targets such as `r, f[i]`.
pub fn parse_targets(text: &str, env: &Env) -> Result<Vec<Target>, ProgramParseError> {
    let tokens = Lexer::tokenize(text)?;
    let mut p = ExprParser::new(&tokens, env);
    let ts = targets(&mut p, env)?;
    p.expect_eof()?;
    Ok(ts)
}

fn seq(p: &mut ExprParser, env: &Env) -> Result<Stmt, ProgramParseError> {
    let mut items = vec![stmt(p, env)?];
    while p.eat(&TokenKind::Semicolon) {
        items.push(stmt(p, env)?);
    }
    Ok(if items.len() == 1 { items.pop().expect("one") } else { Stmt::Seq(items) })
}

fn guarded(p: &mut ExprParser, env: &Env) -> Result<(Expr, Stmt), ProgramParseError> {
    let g = p.expr()?;
    p.expect(TokenKind::Arrow, "->")?;
    Ok((g, seq(p, env)?))
}

fn stmt(p: &mut ExprParser, env: &Env) -> Result<Stmt, ProgramParseError> {
    match p.peek() {
        TokenKind::Skip => {
            p.bump();
            Ok(Stmt::Skip)
        }
        TokenKind::If => {
            p.bump();
            let mut branches = vec![guarded(p, env)?];
            while p.eat(&TokenKind::Box) {
                branches.push(guarded(p, env)?);
            }
            p.expect(TokenKind::Fi, "fi")?;
            Ok(Stmt::If(branches))
        }
        TokenKind::Do => {
            p.bump();
            let (g, body) = guarded(p, env)?;
            p.expect(TokenKind::Od, "od")?;
            Ok(Stmt::Do(g, Box::new(body)))
        }
        TokenKind::Ident(_) => {
            let ts = targets(p, env)?;
            p.expect(TokenKind::Assign, ":=")?;
            let mut es = vec![p.expr()?];
            while p.eat(&TokenKind::Comma) {
                es.push(p.expr()?);
            }
            check_assignment(&ts, &es)?;
            Ok(Stmt::Assign(ts, es))
        }
        _ => Err(p.error(&["skip", "if", "do", "assignment"]).into()),
    }
}

pub(crate) fn check_assignment(ts: &[Target], es: &[Expr]) -> Result<(), ProgramParseError> {
    if ts.len() != es.len() {
        return Err(ProgramParseError::Arity(ts.len(), es.len()));
    }
    for (t, e) in ts.iter().zip(es) {
        if t.value_sort() != e.sort() {
            return Err(ProgramParseError::Sort {
                target: t.to_string(),
                expr: e.to_string(),
            });
        }
    }
    Ok(())
}

fn targets(p: &mut ExprParser, env: &Env) -> Result<Vec<Target>, ProgramParseError> {
    let mut out = vec![target(p, env)?];
    while p.eat(&TokenKind::Comma) {
        out.push(target(p, env)?);
    }
    Ok(out)
}

fn target(p: &mut ExprParser, env: &Env) -> Result<Target, ProgramParseError> {
    let TokenKind::Ident(name) = p.peek().clone() else {
        return Err(p.error(&["variable"]).into());
    };
    let at = p.char_pos();
    p.bump();
    let sort = env
        .vars
        .get(&name)
        .cloned()
        .ok_or(FormulaError::UnknownIdentifier { name: name.clone(), pos: at })?;
    if p.eat(&TokenKind::LBracket) {
        if sort.element().is_none() {
            return Err(ProgramParseError::NotAssignable(format!("{name}[..]")));
        }
        let i = p.expr()?;
        p.expect(TokenKind::RBracket, "]")?;
        if i.sort() != Sort::Int {
            return Err(ProgramParseError::Sort {
                target: format!("{name}[{i}]"),
                expr: "index".into(),
            });
        }
        return Ok(Target::Elem(name, sort, i));
    }
    Ok(Target::Var(name, sort))
}

pub fn parse_sort(text: &str) -> Result<Sort, ProgramParseError> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let s = match t.as_str() {
        "Bool" => Sort::Bool,
        "Int" => Sort::Int,
        _ => {
            let inner = t
                .strip_prefix("Array(")
                .and_then(|r| r.strip_suffix(')'))
                .ok_or_else(|| ProgramParseError::Declaration(format!("unknown sort {text}")))?;
            let e = parse_sort(inner)?;
            if !e.is_scalar() {
                return Err(ProgramParseError::Declaration(format!("array of {e}")));
            }
            Sort::array_of(e)
        }
    };
    Ok(s)
}

/// `name: Sort, name: Sort`; an empty string declares nothing.
pub fn parse_decls(text: &str) -> Result<Vec<(String, Sort)>, ProgramParseError> {
    let mut out: Vec<(String, Sort)> = Vec::new();
    let mut depth = 0usize;
    let mut parts = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                parts.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    parts.push(cur);
    for part in parts.iter().map(|s| s.trim()).filter(|s| !s.is_empty()) {
        let (name, sort) = part
            .split_once(':')
            .ok_or_else(|| ProgramParseError::Declaration(format!("{part}: expected name: Sort")))?;
        let name = name.trim();
        let mut chars = name.chars();
        let ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic())
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
            && !crate::formula::is_keyword(name);
        if !ok {
            return Err(ProgramParseError::Declaration(format!("bad name {name:?}")));
        }
        if out.iter().any(|(n, _)| n == name) {
            return Err(ProgramParseError::Declaration(format!("{name} declared twice")));
        }
        out.push((name.to_string(), parse_sort(sort)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env() -> Env {
        Env::new()
            .with_var("n", Sort::Int)
            .with_var("r", Sort::Bool)
            .with_var("f", Sort::array_of(Sort::Bool))
    }

    #[test]
    fn parses_simultaneous_assignment_with_meta() {
        let s = parse_stmt("r, n := r', n + 1", &env()).unwrap();
        let Stmt::Assign(ts, es) = s else { panic!() };
        assert_eq!(ts.len(), 2);
        assert!(es[0].has_meta());
    }

    #[test]
    fn parses_structured_statements() {
        let s = parse_stmt("if r -> skip [] ¬r -> f[n] := true fi; do n < 3 -> n := n + 1 od", &env()).unwrap();
        let Stmt::Seq(items) = s else { panic!() };
        assert!(matches!(&items[0], Stmt::If(b) if b.len() == 2));
        assert!(matches!(&items[1], Stmt::Do(..)));
    }

    #[test]
    fn rejects_sort_mismatch_and_arity() {
        assert!(matches!(parse_stmt("r := n", &env()), Err(ProgramParseError::Sort { .. })));
        assert!(matches!(parse_stmt("r, n := true", &env()), Err(ProgramParseError::Arity(2, 1))));
    }

    #[test]
    fn parses_declarations() {
        let d = parse_decls("N: Int, f: Array(Bool)").unwrap();
        assert_eq!(d[1], ("f".to_string(), Sort::array_of(Sort::Bool)));
        assert!(parse_decls("").unwrap().is_empty());
        assert!(parse_decls("x: Array(Array(Int))").is_err());
        assert!(parse_decls("if: Int").is_err());
    }
}
