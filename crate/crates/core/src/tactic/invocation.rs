//! Tactic command text: `name{key=value, ...}`.
//!
//! A value is a bare string (a formula, identifier or path), a quoted string
//! `"..."` (with `\"` and `\\` escapes) or a list `[v, v, ...]`. Whitespace
//! around keys and values is ignored.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::TacticError;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Text(String),
    List(Vec<String>),
}

impl ParamValue {
    /// Items of a list; a bare value is a one-item list, split at top-level
    /// commas.
    pub fn items(&self) -> Vec<String> {
        match self {
            ParamValue::List(v) => v.clone(),
            ParamValue::Text(t) => split_top(t, ',').into_iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
        }
    }

    /// A list joined back with `", "`.
    pub fn joined(&self) -> String {
        match self {
            ParamValue::Text(t) => t.clone(),
            ParamValue::List(v) => v.join(", "),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TacticInvocation {
    pub name: String,
    pub params: BTreeMap<String, ParamValue>,
}

impl TacticInvocation {
    pub fn new(name: impl Into<String>) -> Self {
        TacticInvocation {
            name: name.into(),
            params: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<String>) -> Self {
        self.params.insert(key.to_string(), ParamValue::Text(value.into()));
        self
    }

    pub fn with_list(mut self, key: &str, items: &[&str]) -> Self {
        self.params
            .insert(key.to_string(), ParamValue::List(items.iter().map(|s| s.to_string()).collect()));
        self
    }

    pub fn text(&self, key: &str) -> Option<String> {
        self.params.get(key).map(ParamValue::joined)
    }

    pub fn require(&self, key: &str) -> Result<String, TacticError> {
        self.text(key).ok_or_else(|| TacticError::MissingParam(key.to_string()))
    }

    pub fn items(&self, key: &str) -> Option<Vec<String>> {
        self.params.get(key).map(ParamValue::items)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamKind {
    Formula,
    FormulaList,
    Targets,
    Declarations,
    Identifier,
    Indices,
    NodePath,
    FormulaPath,
    Label,
    Relation,
    Program,
    Bindings,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Before the specification exists.
    Empty,
    Program,
    Formula,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
    pub optional: bool,
    pub help: &'static str,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TacticSpec {
    pub name: &'static str,
    pub mode: Mode,
    pub summary: &'static str,
    pub params: Vec<ParamSpec>,
}

impl TacticSpec {
    pub fn param(&self, name: &str) -> Option<&ParamSpec> {
        self.params.iter().find(|p| p.name == name)
    }
}

fn p(name: &'static str, kind: ParamKind, help: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind,
        optional: false,
        help,
    }
}

fn opt(name: &'static str, kind: ParamKind, help: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind,
        optional: true,
        help,
    }
}

const PATH_HELP: &str = "program node, e.g. @1.0; defaults to the first UnkProg";

/// Every tactic with its parameter signature.
pub fn registry() -> Vec<TacticSpec> {
    use ParamKind::*;
    vec![
        TacticSpec {
            name: "init4",
            mode: Mode::Empty,
            summary: "Specify the program: constants, variables, precondition, postcondition",
            params: vec![
                opt("consts", Declarations, "constants, e.g. [N: Int, f: Array(Bool)]"),
                p("vars", Declarations, "program variables, e.g. [r: Bool]"),
                p("pre", Formula, "precondition"),
                p("post", Formula, "postcondition"),
            ],
        },
        TacticSpec {
            name: "replaceConstantByVariable",
            mode: Mode::Program,
            summary: "Replace a constant of the postcondition by a fresh variable with bounds",
            params: vec![
                p("const", Identifier, "constant to replace"),
                p("fresh", Identifier, "name of the new variable"),
                p("bounds", Formula, "bounds on the new variable, e.g. 0 \\le n \\le N"),
                opt("path", NodePath, PATH_HELP),
            ],
        },
        TacticSpec {
            name: "takeConjunctsAsInvariants",
            mode: Mode::Program,
            summary: "Turn an UnkProg into an initialisation and a loop whose invariants are chosen postcondition conjuncts",
            params: vec![
                p("which", Indices, "indices of the conjuncts kept as invariants, e.g. [0, 1]"),
                opt("bound", Formula, "bound function for termination"),
                opt("path", NodePath, PATH_HELP),
            ],
        },
        TacticSpec {
            name: "introAssignment",
            mode: Mode::Program,
            summary: "Replace an UnkProg by a simultaneous assignment; expressions may contain metavariables",
            params: vec![
                p("targets", Targets, "assigned variables, e.g. [r, n]"),
                p("exprs", FormulaList, "assigned expressions, e.g. [r', n+1]"),
                opt("path", NodePath, PATH_HELP),
            ],
        },
        TacticSpec {
            name: "introComposition",
            mode: Mode::Program,
            summary: "Split an UnkProg into two with an intermediate assertion",
            params: vec![
                p("mid", Formula, "intermediate assertion"),
                opt("path", NodePath, PATH_HELP),
            ],
        },
        TacticSpec {
            name: "strengthenInvariant",
            mode: Mode::Program,
            summary: "Declare a fresh variable and add an invariant for it",
            params: vec![
                p("decl", Declarations, "the new variable, e.g. s: Bool"),
                p("inv", Formula, "the new invariant"),
                opt("path", NodePath, "a loop, or the specification node; defaults to the specification or the first loop"),
            ],
        },
        TacticSpec {
            name: "guessProgram",
            mode: Mode::Program,
            summary: "Replace an UnkProg by a loop-free program, checked against its specification",
            params: vec![
                p("prog", Program, "program text, e.g. \"s := s \\wedge f[n]\""),
                opt("path", NodePath, PATH_HELP),
            ],
        },
        TacticSpec {
            name: "stepInto",
            mode: Mode::Program,
            summary: "Calculate with an open obligation containing metavariables",
            params: vec![p("label", Label, "obligation label, e.g. \"While.invariant-preservation[P0]\"")],
        },
        TacticSpec {
            name: "focus",
            mode: Mode::Formula,
            summary: "Open an inner frame on a subformula",
            params: vec![p("path", FormulaPath, "subformula, e.g. @1")],
        },
        TacticSpec {
            name: "guessFormula",
            mode: Mode::Formula,
            summary: "Propose the next formula of the calculation",
            params: vec![
                p("next", Formula, "next formula"),
                opt("rel", Relation, "≡ (default), ⇒ or ⇐"),
            ],
        },
        TacticSpec {
            name: "simplifyAuto",
            mode: Mode::Formula,
            summary: "Apply the built-in rewrite rules to a normal form",
            params: vec![],
        },
        TacticSpec {
            name: "stepOut",
            mode: Mode::Formula,
            summary: "Close the inner frame, or solve the metavariables and return to the program",
            params: vec![opt("bindings", Bindings, "explicit solutions, e.g. [r' := r \\wedge s]")],
        },
    ]
}

pub fn tactic_spec(name: &str) -> Option<TacticSpec> {
    registry().into_iter().find(|t| t.name == name)
}

/// Split at `sep` outside brackets and quotes.
pub(crate) fn split_top(text: &str, sep: char) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    let mut quoted = false;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if quoted {
            cur.push(c);
            if c == '\\' {
                if let Some(&n) = chars.peek() {
                    if n == '"' || n == '\\' {
                        cur.push(n);
                        chars.next();
                    }
                }
            } else if c == '"' {
                quoted = false;
            }
            continue;
        }
        match c {
            '"' => quoted = true,
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => depth -= 1,
            _ if c == sep && depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    out.push(cur);
    out
}

fn balanced(s: &str) -> bool {
    let mut depth = 0i32;
    for c in s.chars() {
        match c {
            '(' | '[' | '{' => depth += 1,
            ')' | ']' | '}' => {
                depth -= 1;
                if depth < 0 {
                    return false;
                }
            }
            _ => {}
        }
    }
    depth == 0
}

fn needs_quotes(s: &str) -> bool {
    s.is_empty()
        || s.trim() != s
        || s.starts_with('[')
        || s.contains([',', '"', '{', '}'])
        || !balanced(s)
}

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    let chars: Vec<char> = s.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' if matches!(chars.get(i + 1), None | Some('"') | Some('\\')) => out.push_str("\\\\"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

fn render_atom(s: &str) -> String {
    if needs_quotes(s) {
        quote(s)
    } else {
        s.to_string()
    }
}

impl fmt::Display for TacticInvocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let order: Vec<String> = match tactic_spec(&self.name) {
            Some(spec) => {
                let mut keys: Vec<String> = spec
                    .params
                    .iter()
                    .map(|p| p.name.to_string())
                    .filter(|k| self.params.contains_key(k))
                    .collect();
                keys.extend(self.params.keys().filter(|k| spec.param(k).is_none()).cloned());
                keys
            }
            None => self.params.keys().cloned().collect(),
        };
        write!(f, "{}{{", self.name)?;
        for (i, k) in order.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match &self.params[k] {
                ParamValue::Text(t) => write!(f, "{k}={}", render_atom(t))?,
                ParamValue::List(items) => {
                    let parts: Vec<String> = items.iter().map(|s| render_atom(s)).collect();
                    write!(f, "{k}=[{}]", parts.join(", "))?
                }
            }
        }
        write!(f, "}}")
    }
}

fn syntax(pos: usize, message: impl Into<String>) -> TacticError {
    TacticError::Syntax {
        pos,
        message: message.into(),
    }
}

fn unquote(s: &str, pos: usize) -> Result<String, TacticError> {
    let inner = s
        .strip_prefix('"')
        .and_then(|r| r.strip_suffix('"'))
        .ok_or_else(|| syntax(pos, "unterminated string"))?;
    let mut out = String::new();
    let mut chars = inner.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.peek() {
                Some('"') | Some('\\') => {
                    out.push(chars.next().expect("peeked"));
                    continue;
                }
                _ => {}
            }
        } else if c == '"' {
            return Err(syntax(pos, "unescaped quote inside string"));
        }
        out.push(c);
    }
    Ok(out)
}

fn parse_atom(s: &str, pos: usize) -> Result<String, TacticError> {
    let t = s.trim();
    if t.starts_with('"') {
        unquote(t, pos)
    } else {
        Ok(t.to_string())
    }
}

fn parse_value(raw: &str, pos: usize) -> Result<ParamValue, TacticError> {
    let t = raw.trim();
    if let Some(body) = t.strip_prefix('[') {
        let body = body
            .strip_suffix(']')
            .ok_or_else(|| syntax(pos, "unterminated list"))?;
        if body.trim().is_empty() {
            return Ok(ParamValue::List(Vec::new()));
        }
        return split_top(body, ',')
            .iter()
            .map(|item| parse_atom(item, pos))
            .collect::<Result<_, _>>()
            .map(ParamValue::List);
    }
    parse_atom(t, pos).map(ParamValue::Text)
}

/// Parse and validate against the registry.
pub fn parse_tactic(text: &str) -> Result<TacticInvocation, TacticError> {
    let inv = parse_tactic_unchecked(text)?;
    let spec = tactic_spec(&inv.name).ok_or_else(|| TacticError::UnknownTactic(inv.name.clone()))?;
    for k in inv.params.keys() {
        if spec.param(k).is_none() {
            return Err(TacticError::ParamValidation {
                param: k.clone(),
                reason: format!("{} takes no parameter {k}", spec.name),
            });
        }
    }
    for p in &spec.params {
        if !p.optional && !inv.params.contains_key(p.name) {
            return Err(TacticError::MissingParam(p.name.to_string()));
        }
    }
    Ok(inv)
}

/// Parse without consulting the registry.
pub fn parse_tactic_unchecked(text: &str) -> Result<TacticInvocation, TacticError> {
    let t = text.trim();
    let lead = text.len() - text.trim_start().len();
    let name_len = t
        .char_indices()
        .find(|(_, c)| !(c.is_ascii_alphanumeric() || *c == '_'))
        .map(|(i, _)| i)
        .unwrap_or(t.len());
    let name = &t[..name_len];
    if name.is_empty() || !name.starts_with(|c: char| c.is_ascii_alphabetic()) {
        return Err(syntax(lead, "expected tactic name"));
    }
    let rest = t[name_len..].trim_start();
    let open = lead + t.len() - rest.len();
    let body = rest
        .strip_prefix('{')
        .ok_or_else(|| syntax(open, "expected '{'"))?;
    let body = body
        .strip_suffix('}')
        .ok_or_else(|| syntax(lead + t.len(), "expected '}' at end"))?;
    if !balanced(body) && !body.contains('"') {
        return Err(syntax(open, "unbalanced brackets"));
    }
    let mut params = BTreeMap::new();
    let mut offset = open + 1;
    if !body.trim().is_empty() {
        for part in split_top(body, ',') {
            let pos = offset;
            offset += part.chars().count() + 1;
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| syntax(pos, format!("expected key=value in {:?}", part.trim())))?;
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(syntax(pos, format!("bad parameter name {key:?}")));
            }
            if params.insert(key.to_string(), parse_value(value, pos)?).is_some() {
                return Err(syntax(pos, format!("parameter {key} given twice")));
            }
        }
    }
    Ok(TacticInvocation {
        name: name.to_string(),
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_and_formulas() {
        let inv = parse_tactic("introAssignment{targets=[r,n], exprs=[r', n+1]}").unwrap();
        assert_eq!(inv.items("targets").unwrap(), ["r", "n"]);
        assert_eq!(inv.items("exprs").unwrap(), ["r'", "n+1"]);
        assert_eq!(parse_tactic("simplifyAuto{}").unwrap(), TacticInvocation::new("simplifyAuto"));
    }

    #[test]
    fn nested_commas_stay_in_values() {
        let inv = parse_tactic(
            "init4{consts=[N: Int, f: Array(Bool)], vars=[r: Bool], pre=0 \\le N, post=r \\equiv (\\forall i, j: 0 \\le i < j < N: f[j] \\Rightarrow f[i])}",
        )
        .unwrap();
        assert_eq!(inv.items("consts").unwrap().len(), 2);
        assert!(inv.text("post").unwrap().contains("i, j"));
    }

    #[test]
    fn quoted_values_round_trip() {
        let inv = TacticInvocation::new("guessProgram").with("prog", "r, s, n := true, true, 0");
        let text = inv.to_string();
        assert_eq!(text, "guessProgram{prog=\"r, s, n := true, true, 0\"}");
        assert_eq!(parse_tactic(&text).unwrap(), inv);
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_tactic("nope{}"), Err(TacticError::UnknownTactic(_))));
        assert!(matches!(parse_tactic("focus{}"), Err(TacticError::MissingParam(_))));
        assert!(matches!(parse_tactic("focus{path=@0"), Err(TacticError::Syntax { .. })));
        assert!(matches!(parse_tactic("focus{x=1}"), Err(TacticError::ParamValidation { .. })));
    }
}
