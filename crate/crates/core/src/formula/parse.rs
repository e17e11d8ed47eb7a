//! LaTeX-flavoured formula input.
//!
//! Accepts both the LaTeX command spelling (`\forall`, `\wedge`, `\le`, ...)
//! and the Unicode symbols produced by the pretty-printer, so printed output
//! always reparses.

use std::collections::BTreeMap;

use super::{BinOp, Expr, QuantOp, Sort, SortError, UnOp};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum FormulaError {
    #[error("syntax error at {pos}: found {found}, expected {}", expected.join(" or "))]
    Syntax {
        pos: usize,
        found: String,
        expected: Vec<String>,
    },
    #[error("{identifier}: {source}")]
    Sort {
        identifier: String,
        #[source]
        source: SortError,
    },
    #[error("unknown identifier {name} at {pos}")]
    UnknownIdentifier { name: String, pos: usize },
}

impl FormulaError {
    pub fn syntax(pos: usize, found: impl Into<String>, expected: &[&str]) -> Self {
        FormulaError::Syntax {
            pos,
            found: found.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// Declared identifiers available to the parser.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Env {
    pub vars: BTreeMap<String, Sort>,
    /// Explicit metavariable sorts. A metavariable `x'` without an entry
    /// takes the sort of program variable `x`.
    pub metas: BTreeMap<String, Sort>,
}

impl Env {
    pub fn new() -> Self {
        Env::default()
    }

    pub fn with_var(mut self, name: &str, sort: Sort) -> Self {
        self.vars.insert(name.to_string(), sort);
        self
    }

    pub fn with_meta(mut self, name: &str, sort: Sort) -> Self {
        self.metas.insert(name.to_string(), sort);
        self
    }

    pub fn meta_sort(&self, name: &str) -> Option<Sort> {
        self.metas.get(name).or_else(|| self.vars.get(name)).cloned()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    /// `name'`
    MetaIdent(String),
    Int(i64),
    True,
    False,
    Div,
    Mod,
    Skip,
    If,
    Fi,
    Do,
    Od,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Semicolon,
    Assign,
    Arrow,
    Box,
    Plus,
    Minus,
    Star,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    Not,
    And,
    Or,
    Implies,
    Follows,
    Equiv,
    MapsTo,
    At,
    Quant(QuantOp),
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(n) => format!("identifier {n}"),
            TokenKind::MetaIdent(n) => format!("metavariable {n}'"),
            TokenKind::Int(v) => format!("number {v}"),
            TokenKind::Eof => "end of input".into(),
            other => format!("{other:?}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Character offset into the input.
    pub pos: usize,
}

/// Tokenizer shared by the formula, program and tactic-command parsers.
pub struct Lexer;

impl Lexer {
    pub fn tokenize(text: &str) -> Result<Vec<Token>, FormulaError> {
        let chars: Vec<char> = text.chars().collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let pos = i;
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            let next = chars.get(i + 1).copied();
            let single = |k: TokenKind| Some((k, 1));
            let two = |k: TokenKind| Some((k, 2));
            let simple = match (c, next) {
                (':', Some('=')) => two(TokenKind::Assign),
                ('-', Some('>')) => two(TokenKind::Arrow),
                ('[', Some(']')) => two(TokenKind::Box),
                ('<', Some('=')) => two(TokenKind::Le),
                ('>', Some('=')) => two(TokenKind::Ge),
                ('!', Some('=')) => two(TokenKind::Ne),
                ('(', _) => single(TokenKind::LParen),
                (')', _) => single(TokenKind::RParen),
                ('[', _) => single(TokenKind::LBracket),
                (']', _) => single(TokenKind::RBracket),
                ('{', _) => single(TokenKind::LBrace),
                ('}', _) => single(TokenKind::RBrace),
                (',', _) => single(TokenKind::Comma),
                (':', _) => single(TokenKind::Colon),
                (';', _) => single(TokenKind::Semicolon),
                ('+', _) => single(TokenKind::Plus),
                ('-', _) => single(TokenKind::Minus),
                ('*' | '·' | '×', _) => single(TokenKind::Star),
                ('<', _) => single(TokenKind::Lt),
                ('>', _) => single(TokenKind::Gt),
                ('=', _) => single(TokenKind::Eq),
                ('≤', _) => single(TokenKind::Le),
                ('≥', _) => single(TokenKind::Ge),
                ('≠', _) => single(TokenKind::Ne),
                ('¬', _) => single(TokenKind::Not),
                ('∧', _) => single(TokenKind::And),
                ('∨', _) => single(TokenKind::Or),
                ('⇒', _) => single(TokenKind::Implies),
                ('⇐', _) => single(TokenKind::Follows),
                ('≡', _) => single(TokenKind::Equiv),
                ('↦', _) => single(TokenKind::MapsTo),
                ('→', _) => single(TokenKind::Arrow),
                ('▯', _) => single(TokenKind::Box),
                ('@', _) => single(TokenKind::At),
                ('∀', _) => single(TokenKind::Quant(QuantOp::Forall)),
                ('∃', _) => single(TokenKind::Quant(QuantOp::Exists)),
                ('Σ', _) => single(TokenKind::Quant(QuantOp::Sum)),
                ('#', _) => single(TokenKind::Quant(QuantOp::Count)),
                ('↑', _) => single(TokenKind::Quant(QuantOp::Max)),
                ('↓', _) => single(TokenKind::Quant(QuantOp::Min)),
                _ => None,
            };
            if let Some((kind, len)) = simple {
                out.push(Token { kind, pos });
                i += len;
                continue;
            }
            if c == '\\' {
                let start = i + 1;
                let mut j = start;
                while j < chars.len() && chars[j].is_ascii_alphabetic() {
                    j += 1;
                }
                if j == start && j < chars.len() && chars[j] == '#' {
                    out.push(Token { kind: TokenKind::Quant(QuantOp::Count), pos });
                    i = j + 1;
                    continue;
                }
                let cmd: String = chars[start..j].iter().collect();
                let kind = match cmd.as_str() {
                    "forall" => TokenKind::Quant(QuantOp::Forall),
                    "exists" => TokenKind::Quant(QuantOp::Exists),
                    "sum" => TokenKind::Quant(QuantOp::Sum),
                    "count" => TokenKind::Quant(QuantOp::Count),
                    "max" => TokenKind::Quant(QuantOp::Max),
                    "min" => TokenKind::Quant(QuantOp::Min),
                    "wedge" | "land" => TokenKind::And,
                    "vee" | "lor" => TokenKind::Or,
                    "neg" | "lnot" => TokenKind::Not,
                    "Rightarrow" | "implies" => TokenKind::Implies,
                    "Leftarrow" | "impliedby" => TokenKind::Follows,
                    "equiv" => TokenKind::Equiv,
                    "le" | "leq" => TokenKind::Le,
                    "ge" | "geq" => TokenKind::Ge,
                    "ne" | "neq" => TokenKind::Ne,
                    "lt" => TokenKind::Lt,
                    "gt" => TokenKind::Gt,
                    "mapsto" => TokenKind::MapsTo,
                    "cdot" | "times" => TokenKind::Star,
                    "to" | "rightarrow" => TokenKind::Arrow,
                    "true" => TokenKind::True,
                    "false" => TokenKind::False,
                    _ => {
                        return Err(FormulaError::syntax(pos, format!("\\{cmd}"), &["LaTeX operator"]));
                    }
                };
                out.push(Token { kind, pos });
                i = j;
                continue;
            }
            if c.is_ascii_digit() {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let digits: String = chars[i..j].iter().collect();
                let v = digits
                    .parse::<i64>()
                    .map_err(|_| FormulaError::syntax(pos, digits.clone(), &["integer in range"]))?;
                out.push(Token { kind: TokenKind::Int(v), pos });
                i = j;
                continue;
            }
            if c.is_ascii_alphabetic() {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                if j < chars.len() && chars[j] == '\'' {
                    out.push(Token { kind: TokenKind::MetaIdent(word), pos });
                    i = j + 1;
                    continue;
                }
                let kind = match word.as_str() {
                    "true" => TokenKind::True,
                    "false" => TokenKind::False,
                    "div" => TokenKind::Div,
                    "mod" => TokenKind::Mod,
                    "skip" => TokenKind::Skip,
                    "if" => TokenKind::If,
                    "fi" => TokenKind::Fi,
                    "do" => TokenKind::Do,
                    "od" => TokenKind::Od,
                    _ => TokenKind::Ident(word),
                };
                out.push(Token { kind, pos });
                i = j;
                continue;
            }
            return Err(FormulaError::syntax(pos, c.to_string(), &["token"]));
        }
        out.push(Token { kind: TokenKind::Eof, pos: chars.len() });
        Ok(out)
    }
}

pub fn is_keyword(word: &str) -> bool {
    matches!(word, "true" | "false" | "div" | "mod" | "skip" | "if" | "fi" | "do" | "od")
}

/// Parse a formula over the declared environment and check its sorts.
pub fn parse_formula(text: &str, env: &Env) -> Result<Expr, FormulaError> {
    let tokens = Lexer::tokenize(text)?;
    let mut p = ExprParser::new(&tokens, env);
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

/// Recursive-descent expression parser over a token slice. Used directly by
/// the program parser.
pub struct ExprParser<'a> {
    tokens: &'a [Token],
    pos: usize,
    env: &'a Env,
    bound: Vec<String>,
}

impl<'a> ExprParser<'a> {
    pub fn new(tokens: &'a [Token], env: &'a Env) -> Self {
        ExprParser {
            tokens,
            pos: 0,
            env,
            bound: Vec::new(),
        }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos.min(self.tokens.len() - 1)].kind
    }

    pub fn peek_at(&self, offset: usize) -> &TokenKind {
        &self.tokens[(self.pos + offset).min(self.tokens.len() - 1)].kind
    }

    pub fn char_pos(&self) -> usize {
        self.tokens[self.pos.min(self.tokens.len() - 1)].pos
    }

    pub fn bump(&mut self) -> TokenKind {
        let t = self.peek().clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    pub fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == kind {
            self.bump();
            true
        } else {
            false
        }
    }

    pub fn error(&self, expected: &[&str]) -> FormulaError {
        FormulaError::syntax(self.char_pos(), self.peek().describe(), expected)
    }

    pub fn expect(&mut self, kind: TokenKind, what: &str) -> Result<(), FormulaError> {
        if self.eat(&kind) {
            Ok(())
        } else {
            Err(self.error(&[what]))
        }
    }

    pub fn expect_eof(&self) -> Result<(), FormulaError> {
        if *self.peek() == TokenKind::Eof {
            Ok(())
        } else {
            Err(self.error(&["end of input"]))
        }
    }

    pub fn expr(&mut self) -> Result<Expr, FormulaError> {
        self.equiv()
    }

    fn equiv(&mut self) -> Result<Expr, FormulaError> {
        let first = self.implies()?;
        let mut operands = vec![first];
        while self.eat(&TokenKind::Equiv) {
            operands.push(self.implies()?);
        }
        self.chain(operands.into_iter().map(|e| (BinOp::Equiv, e)).collect())
    }

    fn implies(&mut self) -> Result<Expr, FormulaError> {
        let lhs = self.or()?;
        if self.eat(&TokenKind::Implies) {
            let at = self.char_pos();
            let rhs = self.implies()?;
            return self.mk_binary(BinOp::Implies, lhs, rhs, at);
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Expr, FormulaError> {
        let mut lhs = self.and()?;
        while *self.peek() == TokenKind::Or {
            let at = self.char_pos();
            self.bump();
            let rhs = self.and()?;
            lhs = self.mk_binary(BinOp::Or, lhs, rhs, at)?;
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Expr, FormulaError> {
        let mut lhs = self.relation()?;
        while *self.peek() == TokenKind::And {
            let at = self.char_pos();
            self.bump();
            let rhs = self.relation()?;
            lhs = self.mk_binary(BinOp::And, lhs, rhs, at)?;
        }
        Ok(lhs)
    }

    fn relop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            TokenKind::Lt => BinOp::Lt,
            TokenKind::Le => BinOp::Le,
            TokenKind::Gt => BinOp::Gt,
            TokenKind::Ge => BinOp::Ge,
            TokenKind::Eq => BinOp::Eq,
            TokenKind::Ne => BinOp::Ne,
            _ => return None,
        })
    }

    fn relation(&mut self) -> Result<Expr, FormulaError> {
        let first = self.additive()?;
        let mut links = vec![(BinOp::Eq, first)];
        while let Some(op) = self.relop() {
            self.bump();
            links.push((op, self.additive()?));
        }
        self.chain(links)
    }

    /// `a op1 b op2 c` reads as `a op1 b ∧ b op2 c`. The first link's
    /// operator is ignored.
    fn chain(&mut self, links: Vec<(BinOp, Expr)>) -> Result<Expr, FormulaError> {
        let at = self.char_pos();
        let mut it = links.into_iter();
        let (_, mut prev) = it.next().expect("non-empty chain");
        let mut acc: Option<Expr> = None;
        for (op, next) in it {
            let link = self.mk_binary(op, prev, next.clone(), at)?;
            acc = Some(match acc {
                None => link,
                Some(a) => Expr::and(a, link),
            });
            prev = next;
        }
        Ok(acc.unwrap_or(prev))
    }

    fn additive(&mut self) -> Result<Expr, FormulaError> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                _ => break,
            };
            let at = self.char_pos();
            self.bump();
            let rhs = self.multiplicative()?;
            lhs = self.mk_binary(op, lhs, rhs, at)?;
        }
        Ok(lhs)
    }

    fn multiplicative(&mut self) -> Result<Expr, FormulaError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                TokenKind::Star => BinOp::Mul,
                TokenKind::Div => BinOp::Div,
                TokenKind::Mod => BinOp::Mod,
                _ => break,
            };
            let at = self.char_pos();
            self.bump();
            let rhs = self.unary()?;
            lhs = self.mk_binary(op, lhs, rhs, at)?;
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, FormulaError> {
        let at = self.char_pos();
        match self.peek() {
            TokenKind::Not => {
                self.bump();
                let a = self.unary()?;
                self.expect_sort(&a, &Sort::Bool, "¬", at)?;
                Ok(Expr::not(a))
            }
            TokenKind::Minus => {
                self.bump();
                if let TokenKind::Int(v) = *self.peek() {
                    self.bump();
                    return self.postfix(Expr::Int(-v));
                }
                let a = self.unary()?;
                self.expect_sort(&a, &Sort::Int, "unary -", at)?;
                Ok(Expr::neg(a))
            }
            _ => {
                let p = self.primary()?;
                self.postfix(p)
            }
        }
    }

    fn postfix(&mut self, mut e: Expr) -> Result<Expr, FormulaError> {
        while *self.peek() == TokenKind::LBracket {
            let at = self.char_pos();
            self.bump();
            let index = self.expr()?;
            let elem = match e.sort() {
                Sort::Array(elem) => *elem,
                other => {
                    return Err(self.sort_error("array access", SortError::new("array access", "Array", other), at));
                }
            };
            self.expect_sort(&index, &Sort::Int, "array index", at)?;
            if self.eat(&TokenKind::MapsTo) {
                let value = self.expr()?;
                self.expect_sort(&value, &elem, "array update value", at)?;
                self.expect(TokenKind::RBracket, "]")?;
                e = Expr::update(e, index, value);
            } else {
                self.expect(TokenKind::RBracket, "]")?;
                e = Expr::read(e, index);
            }
        }
        Ok(e)
    }

    fn primary(&mut self) -> Result<Expr, FormulaError> {
        let at = self.char_pos();
        match self.bump() {
            TokenKind::Int(v) => Ok(Expr::Int(v)),
            TokenKind::True => Ok(Expr::Bool(true)),
            TokenKind::False => Ok(Expr::Bool(false)),
            TokenKind::Ident(name) => {
                if self.bound.contains(&name) {
                    return Ok(Expr::Var(name, Sort::Int));
                }
                match self.env.vars.get(&name) {
                    Some(s) => Ok(Expr::Var(name, s.clone())),
                    None => Err(FormulaError::UnknownIdentifier { name, pos: at }),
                }
            }
            TokenKind::MetaIdent(name) => match self.env.meta_sort(&name) {
                Some(s) => Ok(Expr::Meta(name, s)),
                None => Err(FormulaError::UnknownIdentifier {
                    name: format!("{name}'"),
                    pos: at,
                }),
            },
            TokenKind::LParen => {
                if let TokenKind::Quant(op) = *self.peek() {
                    self.bump();
                    return self.quantified(op, at);
                }
                let e = self.expr()?;
                self.expect(TokenKind::RParen, ")")?;
                Ok(e)
            }
            _ => {
                self.pos = self.pos.saturating_sub(1);
                Err(self.error(&["expression"]))
            }
        }
    }

    fn quantified(&mut self, op: QuantOp, at: usize) -> Result<Expr, FormulaError> {
        let mut vars = Vec::new();
        loop {
            match self.bump() {
                TokenKind::Ident(n) => {
                    if vars.contains(&n) {
                        return Err(self.sort_error(
                            &n,
                            SortError::new("quantifier", "distinct bound variables", format!("{n} twice")),
                            at,
                        ));
                    }
                    vars.push(n)
                }
                _ => {
                    self.pos = self.pos.saturating_sub(1);
                    return Err(self.error(&["bound variable"]));
                }
            }
            if !self.eat(&TokenKind::Comma) {
                break;
            }
        }
        self.expect(TokenKind::Colon, ":")?;
        let mark = self.bound.len();
        self.bound.extend(vars.iter().cloned());
        let result = (|| {
            let range = self.expr()?;
            self.expect_sort(&range, &Sort::Bool, "quantifier range", at)?;
            self.expect(TokenKind::Colon, ":")?;
            let term = self.expr()?;
            self.expect_sort(&term, &op.term_sort(), "quantifier term", at)?;
            self.expect(TokenKind::RParen, ")")?;
            Ok(Expr::quant(op, vars.clone(), range, term))
        })();
        self.bound.truncate(mark);
        result
    }

    fn sort_error(&self, identifier: &str, source: SortError, _at: usize) -> FormulaError {
        FormulaError::Sort {
            identifier: identifier.to_string(),
            source,
        }
    }

    fn head_name(e: &Expr) -> String {
        match e {
            Expr::Var(n, _) => n.clone(),
            Expr::Meta(n, _) => format!("{n}'"),
            other => format!("{other}"),
        }
    }

    fn expect_sort(&self, e: &Expr, want: &Sort, ctx: &str, at: usize) -> Result<(), FormulaError> {
        let got = e.sort();
        if &got != want {
            return Err(self.sort_error(&Self::head_name(e), SortError::new(ctx, want, got), at));
        }
        Ok(())
    }

    fn mk_binary(&self, op: BinOp, a: Expr, b: Expr, at: usize) -> Result<Expr, FormulaError> {
        use BinOp::*;
        match op {
            Add | Sub | Mul | Div | Mod | Lt | Le | Gt | Ge => {
                self.expect_sort(&a, &Sort::Int, op.symbol(), at)?;
                self.expect_sort(&b, &Sort::Int, op.symbol(), at)?;
            }
            Eq | Ne => {
                let sa = a.sort();
                self.expect_sort(&b, &sa, op.symbol(), at)?;
            }
            And | Or | Implies | Equiv => {
                self.expect_sort(&a, &Sort::Bool, op.symbol(), at)?;
                self.expect_sort(&b, &Sort::Bool, op.symbol(), at)?;
            }
        }
        Ok(Expr::binary(op, a, b))
    }
}

impl From<UnOp> for &'static str {
    fn from(op: UnOp) -> Self {
        match op {
            UnOp::Not => "¬",
            UnOp::Neg => "-",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env() -> Env {
        Env::new()
            .with_var("n", Sort::Int)
            .with_var("N", Sort::Int)
            .with_var("r", Sort::Bool)
            .with_var("f", Sort::array_of(Sort::Bool))
    }

    #[test]
    fn parses_eindhoven_quantifier() {
        let e = parse_formula("(\\forall i : 0 \\le i < n : f[i])", &env()).unwrap();
        let expected = Expr::forall(
            &["i"],
            Expr::and(Expr::le(Expr::int(0), Expr::int_var("i")), Expr::lt(Expr::int_var("i"), Expr::int_var("n"))),
            Expr::read(Expr::var("f", Sort::array_of(Sort::Bool)), Expr::int_var("i")),
        );
        assert!(e.syntactic_eq(&expected), "{e:?}");
    }

    #[test]
    fn literal_true() {
        assert!(parse_formula("true", &Env::new()).unwrap().syntactic_eq(&Expr::Bool(true)));
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse_formula("r \\wedge r \\vee r \\Rightarrow r \\Rightarrow r", &env()).unwrap();
        let r = || Expr::bool_var("r");
        let expected = Expr::implies(Expr::or(Expr::and(r(), r()), r()), Expr::implies(r(), r()));
        assert!(e.syntactic_eq(&expected));
        let e = parse_formula("n - 1 - n * 2", &env()).unwrap();
        let expected = Expr::sub(
            Expr::sub(Expr::int_var("n"), Expr::int(1)),
            Expr::binary(BinOp::Mul, Expr::int_var("n"), Expr::int(2)),
        );
        assert!(e.syntactic_eq(&expected));
    }

    #[test]
    fn equivalence_chains_read_conjunctively() {
        let e = parse_formula("r ≡ r ≡ r", &env()).unwrap();
        let r = || Expr::bool_var("r");
        assert!(e.syntactic_eq(&Expr::and(Expr::equiv(r(), r()), Expr::equiv(r(), r()))));
    }

    #[test]
    fn unicode_and_latex_agree() {
        let a = parse_formula("¬r ∧ n ≠ N ⇒ f[n] ≡ r", &env()).unwrap();
        let b = parse_formula("\\neg r \\wedge n \\ne N \\Rightarrow f[n] \\equiv r", &env()).unwrap();
        assert!(a.syntactic_eq(&b));
    }

    #[test]
    fn metavariable_takes_program_sort() {
        let e = parse_formula("r' \\equiv r", &env()).unwrap();
        assert_eq!(e.meta_vars().into_iter().next(), Some(("r".to_string(), Sort::Bool)));
    }

    #[test]
    fn errors_are_classified() {
        assert!(matches!(parse_formula("x + 1", &env()), Err(FormulaError::UnknownIdentifier { .. })));
        assert!(matches!(parse_formula("n \\wedge r", &env()), Err(FormulaError::Sort { .. })));
        assert!(matches!(parse_formula("(n + ", &env()), Err(FormulaError::Syntax { .. })));
        assert!(matches!(parse_formula("n n", &env()), Err(FormulaError::Syntax { .. })));
        assert!(matches!(parse_formula("\\foo", &env()), Err(FormulaError::Syntax { .. })));
    }

    #[test]
    fn array_update_syntax() {
        let e = parse_formula("f[n ↦ true][0]", &env()).unwrap();
        assert_eq!(e.sort(), Sort::Bool);
        assert!(matches!(e, Expr::Read(..)));
    }

    #[test]
    fn negative_literals() {
        let e = parse_formula("-3 * n", &env()).unwrap();
        assert!(e.syntactic_eq(&Expr::binary(BinOp::Mul, Expr::int(-3), Expr::int_var("n"))));
        let e = parse_formula("-n", &env()).unwrap();
        assert!(e.syntactic_eq(&Expr::neg(Expr::int_var("n"))));
    }
}
