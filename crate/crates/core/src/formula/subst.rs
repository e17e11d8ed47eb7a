use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{Expr, Quantified, Sort, SortError};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SubstTarget {
    Var(String),
    Meta(String),
}

impl std::fmt::Display for SubstTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SubstTarget::Var(n) => write!(f, "{n}"),
            SubstTarget::Meta(n) => write!(f, "{n}'"),
        }
    }
}

/// Simultaneous substitution. Targets are pairwise distinct.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Substitution {
    bindings: Vec<(SubstTarget, Expr)>,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("substitution target {0} bound twice")]
pub struct DuplicateTarget(pub String);

impl Substitution {
    pub fn new(bindings: Vec<(SubstTarget, Expr)>) -> Result<Self, DuplicateTarget> {
        let mut seen = BTreeSet::new();
        for (t, _) in &bindings {
            if !seen.insert(t.clone()) {
                return Err(DuplicateTarget(t.to_string()));
            }
        }
        Ok(Substitution { bindings })
    }

    /// Simultaneous substitution of program variables. Panics on duplicate
    /// names; use [`Substitution::new`] for untrusted input.
    pub fn vars<S: Into<String>>(pairs: impl IntoIterator<Item = (S, Expr)>) -> Self {
        Substitution::new(
            pairs
                .into_iter()
                .map(|(n, e)| (SubstTarget::Var(n.into()), e))
                .collect(),
        )
        .expect("distinct targets")
    }

    pub fn metas<S: Into<String>>(pairs: impl IntoIterator<Item = (S, Expr)>) -> Self {
        Substitution::new(
            pairs
                .into_iter()
                .map(|(n, e)| (SubstTarget::Meta(n.into()), e))
                .collect(),
        )
        .expect("distinct targets")
    }

    pub fn bindings(&self) -> &[(SubstTarget, Expr)] {
        &self.bindings
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

/// Smallest `base{k}` (k = 0, 1, ...) not in `avoid`.
pub fn fresh_name(base: &str, avoid: &BTreeSet<String>) -> String {
    let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
    let stem = if stem.is_empty() { base } else { stem };
    (0..)
        .map(|k| format!("{stem}{k}"))
        .find(|n| !avoid.contains(n))
        .expect("infinitely many candidates")
}

/// Capture-avoiding simultaneous substitution of free occurrences.
pub fn substitute(e: &Expr, s: &Substitution) -> Result<Expr, SortError> {
    if s.is_empty() {
        return Ok(e.clone());
    }
    let active: Vec<&(SubstTarget, Expr)> = s.bindings.iter().collect();
    apply(e, &active)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InstantiationReport {
    /// Binding targets that did not occur in the expression.
    pub unused: Vec<String>,
}

/// Replace metavariables by expressions. Bindings whose metavariable does not
/// occur are ignored and listed in the report.
pub fn instantiate_metavars(
    e: &Expr,
    bindings: &Substitution,
) -> Result<(Expr, InstantiationReport), SortError> {
    let present: BTreeSet<String> = e.meta_vars().into_iter().map(|(n, _)| n).collect();
    let mut report = InstantiationReport::default();
    let mut used = Vec::new();
    for (t, r) in &bindings.bindings {
        match t {
            SubstTarget::Meta(n) if present.contains(n) => used.push((t.clone(), r.clone())),
            other => report.unused.push(other.to_string()),
        }
    }
    let sub = Substitution { bindings: used };
    Ok((substitute(e, &sub)?, report))
}

fn occurs_free(target: &SubstTarget, e: &Expr) -> bool {
    match target {
        SubstTarget::Var(n) => e.free_vars().iter().any(|(v, _)| v == n),
        SubstTarget::Meta(n) => e.meta_vars().iter().any(|(v, _)| v == n),
    }
}

fn apply(e: &Expr, active: &[&(SubstTarget, Expr)]) -> Result<Expr, SortError> {
    match e {
        Expr::Var(name, sort) | Expr::Meta(name, sort) => {
            let is_meta = matches!(e, Expr::Meta(..));
            let hit = active.iter().find(|(t, _)| match t {
                SubstTarget::Var(n) => !is_meta && n == name,
                SubstTarget::Meta(n) => is_meta && n == name,
            });
            match hit {
                Some((t, repl)) => {
                    let rs = repl.sort();
                    if &rs != sort {
                        return Err(SortError::new(format!("substitution for {t}"), sort, rs));
                    }
                    Ok(repl.clone())
                }
                None => Ok(e.clone()),
            }
        }
        Expr::Int(_) | Expr::Bool(_) => Ok(e.clone()),
        Expr::Read(a, i) => Ok(Expr::read(apply(a, active)?, apply(i, active)?)),
        Expr::Update(a, i, v) => Ok(Expr::update(
            apply(a, active)?,
            apply(i, active)?,
            apply(v, active)?,
        )),
        Expr::Unary(op, a) => Ok(Expr::Unary(*op, Box::new(apply(a, active)?))),
        Expr::Binary(op, a, b) => Ok(Expr::binary(*op, apply(a, active)?, apply(b, active)?)),
        Expr::Quant(q) => apply_quant(e, q, active),
    }
}

fn apply_quant(
    whole: &Expr,
    q: &Quantified,
    active: &[&(SubstTarget, Expr)],
) -> Result<Expr, SortError> {
    // Bindings for shadowed names, or for targets absent from the body, drop out.
    let inner: Vec<&(SubstTarget, Expr)> = active
        .iter()
        .copied()
        .filter(|(t, _)| match t {
            SubstTarget::Var(n) => !q.vars.contains(n),
            SubstTarget::Meta(_) => true,
        })
        .filter(|(t, _)| occurs_free(t, &q.range) || occurs_free(t, &q.term))
        .collect();
    if inner.is_empty() {
        return Ok(whole.clone());
    }
    let repl_free: BTreeSet<String> = inner
        .iter()
        .flat_map(|(_, r)| r.free_var_names())
        .collect();
    let mut avoid: BTreeSet<String> = q.range.all_var_names();
    avoid.extend(q.term.all_var_names());
    avoid.extend(repl_free.iter().cloned());
    avoid.extend(q.vars.iter().cloned());
    avoid.extend(inner.iter().filter_map(|(t, _)| match t {
        SubstTarget::Var(n) => Some(n.clone()),
        SubstTarget::Meta(_) => None,
    }));

    let mut vars = q.vars.clone();
    let mut range = q.range.clone();
    let mut term = q.term.clone();
    for v in vars.iter_mut() {
        if repl_free.contains(v) {
            let fresh = fresh_name(v, &avoid);
            avoid.insert(fresh.clone());
            let rename = (SubstTarget::Var(v.clone()), Expr::Var(fresh.clone(), Sort::Int));
            range = apply(&range, &[&rename])?;
            term = apply(&term, &[&rename])?;
            *v = fresh;
        }
    }
    Ok(Expr::quant(q.op, vars, apply(&range, &inner)?, apply(&term, &inner)?))
}
