//! Weakest preconditions and proof obligations.
//!
//! Obligation labels:
//!
//! | label | meaning |
//! |---|---|
//! | `Program.postcondition` | a statement establishes the outermost postcondition |
//! | `Composition.assertion[k]` | component `k` establishes the intermediate assertion after it |
//! | `If.guards-cover` | some guard holds |
//! | `While.initiation[Pk]` | the precondition implies invariant `Pk` |
//! | `While.invariant-preservation[Pk]` | the body maintains `Pk` |
//! | `While.exit` | invariant and negated guard imply the postcondition |
//! | `While.bound-positive` / `While.bound-decrease` | termination, only with a bound |
//! | `unknown[S]` | an underived fragment; never discharged |
//!
//! Statements inherit the label of the assertion they must establish, so an
//! assignment at the end of a loop body yields one
//! `While.invariant-preservation[Pk]` obligation per invariant. Labels that
//! occur more than once get a `#k` suffix in document order.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::formula::{fresh_name, substitute, BinOp, Expr, Sort, SortError, Substitution};
use crate::program::{
    branch_pre, conjunct_name, AnnotatedProgram, Construct, NodePath, Stmt, Target,
};
use crate::solver::{Goal, State};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum WpError {
    #[error("wp is not defined for {0}")]
    UnsupportedConstruct(&'static str),
    #[error(transparent)]
    Sort(#[from] SortError),
    #[error("no node at {0}")]
    InvalidPath(NodePath),
}

/// Simultaneous substitution performing `targets := exprs`. Element targets
/// become whole-array updates.
pub fn assignment_substitution(targets: &[Target], exprs: &[Expr]) -> Substitution {
    Substitution::vars(
        targets
            .iter()
            .zip(exprs)
            .map(|(t, e)| (t.name().to_string(), t.replacement(e.clone()))),
    )
}

pub fn wp(c: &Construct, r: &Expr) -> Result<Expr, WpError> {
    match c {
        Construct::Skip => Ok(r.clone()),
        Construct::Assign { targets, exprs } => Ok(substitute(r, &assignment_substitution(targets, exprs))?),
        Construct::Composition(cs) => cs.iter().rev().try_fold(r.clone(), |acc, c| wp(&c.body, &acc)),
        Construct::If(bs) => {
            let cover = Expr::disj(bs.iter().map(|(g, _)| g.clone()));
            let arms = bs
                .iter()
                .map(|(g, b)| Ok(Expr::implies(g.clone(), wp(&b.body, r)?)))
                .collect::<Result<Vec<_>, WpError>>()?;
            Ok(Expr::and(cover, Expr::conj(arms)))
        }
        Construct::While { .. } => Err(WpError::UnsupportedConstruct("While")),
        Construct::Unknown(_) => Err(WpError::UnsupportedConstruct("UnkProg")),
    }
}

pub fn wp_stmt(s: &Stmt, r: &Expr) -> Result<Expr, WpError> {
    match s {
        Stmt::Skip => Ok(r.clone()),
        Stmt::Assign(ts, es) => Ok(substitute(r, &assignment_substitution(ts, es))?),
        Stmt::Seq(items) => items.iter().rev().try_fold(r.clone(), |acc, s| wp_stmt(s, &acc)),
        Stmt::If(bs) => {
            let cover = Expr::disj(bs.iter().map(|(g, _)| g.clone()));
            let arms = bs
                .iter()
                .map(|(g, b)| Ok(Expr::implies(g.clone(), wp_stmt(b, r)?)))
                .collect::<Result<Vec<_>, WpError>>()?;
            Ok(Expr::and(cover, Expr::conj(arms)))
        }
        Stmt::Do(..) => Err(WpError::UnsupportedConstruct("While")),
    }
}

/// Annotate a loop-free statement for the specification `{pre} _ {post}`.
/// Intermediate assertions of a sequence are the weakest preconditions of
/// its tail.
pub fn annotate(s: &Stmt, pre: &Expr, post: &Expr) -> Result<AnnotatedProgram, WpError> {
    let body = match s {
        Stmt::Skip => Construct::Skip,
        Stmt::Assign(ts, es) => Construct::Assign {
            targets: ts.clone(),
            exprs: es.clone(),
        },
        Stmt::Seq(items) => {
            let mut posts = vec![post.clone(); items.len()];
            for k in (1..items.len()).rev() {
                posts[k - 1] = wp_stmt(&items[k], &posts[k])?;
            }
            let mut cs = Vec::with_capacity(items.len());
            for (k, item) in items.iter().enumerate() {
                let p = if k == 0 { pre.clone() } else { posts[k - 1].clone() };
                cs.push(annotate(item, &p, &posts[k])?);
            }
            Construct::Composition(cs)
        }
        Stmt::If(bs) => Construct::If(
            bs.iter()
                .map(|(g, b)| Ok((g.clone(), annotate(b, &branch_pre(pre, g), post)?)))
                .collect::<Result<_, WpError>>()?,
        ),
        Stmt::Do(..) => return Err(WpError::UnsupportedConstruct("While")),
    };
    Ok(AnnotatedProgram::new(pre.clone(), post.clone(), body))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Open,
    Valid,
    Invalid(State),
    Unknown(String),
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Status::Open => write!(f, "open"),
            Status::Valid => write!(f, "valid"),
            Status::Invalid(m) => write!(f, "invalid, counterexample: {}", crate::solver::show_state(m)),
            Status::Unknown(r) => write!(f, "unknown ({r})"),
        }
    }
}

/// Validity of `(∧ hypotheses) ⇒ goal`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofObligation {
    pub label: String,
    pub hypotheses: Vec<Expr>,
    pub goal: Expr,
    pub origin: NodePath,
    pub status: Status,
    /// Never sent to a prover (underived fragments, undefined wp).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub opaque: bool,
}

impl ProofObligation {
    pub fn new(label: impl Into<String>, hypotheses: Vec<Expr>, goal: Expr, origin: &NodePath) -> Self {
        ProofObligation {
            label: label.into(),
            hypotheses,
            goal,
            origin: origin.clone(),
            status: Status::Open,
            opaque: false,
        }
    }

    pub fn as_goal(&self) -> Goal {
        Goal::new(self.hypotheses.clone(), self.goal.clone())
    }

    pub fn has_meta(&self) -> bool {
        self.as_goal().has_meta()
    }

    /// Whether a prover may be asked about this obligation.
    pub fn is_checkable(&self) -> bool {
        !self.opaque && !self.has_meta()
    }

    pub fn is_valid(&self) -> bool {
        self.status == Status::Valid
    }
}

/// Flattened conjuncts, without `true`.
pub fn hypotheses_of(e: &Expr) -> Vec<Expr> {
    e.conjuncts()
        .into_iter()
        .filter(|c| **c != Expr::Bool(true))
        .cloned()
        .collect()
}

pub fn generate_obligations(p: &AnnotatedProgram) -> Vec<ProofObligation> {
    let mut out = Vec::new();
    let avoid: BTreeSet<String> = p.exprs().into_iter().flat_map(|e| e.all_var_names()).collect();
    let parts = vec![("Program.postcondition".to_string(), p.post.clone())];
    gen(p, &NodePath::root(), &parts, &avoid, &mut out);
    disambiguate(&mut out);
    out
}

/// [`generate_obligations`] with `facts` added to every hypothesis list.
/// For facts about constants, which no statement changes.
pub fn generate_obligations_with(p: &AnnotatedProgram, facts: &[Expr]) -> Vec<ProofObligation> {
    let mut out = generate_obligations(p);
    for o in &mut out {
        for f in facts {
            if !o.hypotheses.contains(f) {
                o.hypotheses.push(f.clone());
            }
        }
    }
    out
}

fn disambiguate(obls: &mut [ProofObligation]) {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for o in obls.iter() {
        *counts.entry(o.label.clone()).or_default() += 1;
    }
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for o in obls.iter_mut() {
        if counts[&o.label] > 1 {
            let k = seen.entry(o.label.clone()).or_default();
            o.label = format!("{}#{}", o.label, k);
            *k += 1;
        }
    }
}

fn gen(
    n: &AnnotatedProgram,
    path: &NodePath,
    parts: &[(String, Expr)],
    avoid: &BTreeSet<String>,
    out: &mut Vec<ProofObligation>,
) {
    let hyps = hypotheses_of(&n.pre);
    match &n.body {
        Construct::Skip | Construct::Assign { .. } => {
            for (label, part) in parts {
                match wp(&n.body, part) {
                    Ok(goal) => out.push(ProofObligation::new(label.clone(), hyps.clone(), goal, path)),
                    Err(e) => {
                        let mut o = ProofObligation::new(label.clone(), hyps.clone(), part.clone(), path);
                        o.opaque = true;
                        o.status = Status::Unknown(e.to_string());
                        out.push(o);
                    }
                }
            }
        }
        Construct::Unknown(tag) => {
            let mut o = ProofObligation::new(format!("unknown[{tag}]"), hyps, n.post.clone(), path);
            o.opaque = true;
            out.push(o);
        }
        Construct::Composition(cs) => {
            let last = cs.len().saturating_sub(1);
            for (k, c) in cs.iter().enumerate() {
                if k == last {
                    gen(c, &path.child(k), parts, avoid, out);
                } else {
                    let own = vec![(format!("Composition.assertion[{k}]"), c.post.clone())];
                    gen(c, &path.child(k), &own, avoid, out);
                }
            }
        }
        Construct::If(bs) => {
            let cover = Expr::disj(bs.iter().map(|(g, _)| g.clone()));
            out.push(ProofObligation::new("If.guards-cover", hyps, cover, path));
            for (k, (_, b)) in bs.iter().enumerate() {
                gen(b, &path.child(k), parts, avoid, out);
            }
        }
        Construct::While { invariants, bound, guard, body } => {
            for (k, inv) in invariants.iter().enumerate() {
                out.push(ProofObligation::new(
                    format!("While.initiation[{}]", conjunct_name(k)),
                    hyps.clone(),
                    inv.clone(),
                    path,
                ));
            }
            let own: Vec<(String, Expr)> = invariants
                .iter()
                .enumerate()
                .map(|(k, i)| (format!("While.invariant-preservation[{}]", conjunct_name(k)), i.clone()))
                .collect();
            gen(body, &path.child(0), &own, avoid, out);
            let inv_hyps: Vec<Expr> = invariants.iter().flat_map(hypotheses_of).collect();
            let mut exit_hyps = inv_hyps.clone();
            exit_hyps.extend(hypotheses_of(&Expr::negate(guard.clone())));
            out.push(ProofObligation::new("While.exit", exit_hyps, n.post.clone(), path));
            if let Some(t) = bound {
                let mut run_hyps = inv_hyps;
                run_hyps.extend(hypotheses_of(guard));
                out.push(ProofObligation::new(
                    "While.bound-positive",
                    run_hyps.clone(),
                    Expr::binary(BinOp::Gt, t.clone(), Expr::int(0)),
                    path,
                ));
                let t0 = Expr::var(fresh_name("T", avoid), Sort::Int);
                run_hyps.push(Expr::eq(t.clone(), t0.clone()));
                let target = Expr::lt(t.clone(), t0);
                match wp(&body.body, &target) {
                    Ok(goal) => out.push(ProofObligation::new("While.bound-decrease", run_hyps, goal, path)),
                    Err(_) => {
                        let mut o = ProofObligation::new("While.bound-decrease", run_hyps, target, path);
                        o.opaque = true;
                        out.push(o);
                    }
                }
            }
        }
    }
}

/// What is needed to derive the fragment at a path in isolation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalContext {
    pub focus_path: NodePath,
    pub pre: Expr,
    pub post: Expr,
    pub frame_vars: BTreeSet<(String, Sort)>,
    /// Invariants and guards of the enclosing loops and branches.
    pub surrounding_facts: Vec<Expr>,
}

pub fn extract_context(p: &AnnotatedProgram, path: &NodePath) -> Result<LocalContext, WpError> {
    let target = p.node(path).ok_or_else(|| WpError::InvalidPath(path.clone()))?;
    let ancestors = p.ancestors(path).ok_or_else(|| WpError::InvalidPath(path.clone()))?;
    let mut facts = Vec::new();
    for (depth, (_, a)) in ancestors.iter().enumerate() {
        let step = path.0[depth];
        match &a.body {
            Construct::While { invariants, guard, .. } => {
                facts.extend(invariants.iter().cloned());
                facts.push(guard.clone());
            }
            Construct::If(bs) => facts.push(bs[step].0.clone()),
            _ => {}
        }
    }
    Ok(LocalContext {
        focus_path: path.clone(),
        pre: target.pre.clone(),
        post: target.post.clone(),
        frame_vars: p.free_vars(),
        surrounding_facts: facts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::Target;

    fn n() -> Expr {
        Expr::int_var("n")
    }

    #[test]
    fn skip_spec_yields_one_obligation() {
        let p = AnnotatedProgram::new(Expr::Bool(true), Expr::Bool(true), Construct::Skip);
        let obls = generate_obligations(&p);
        assert_eq!(obls.len(), 1);
        assert_eq!(obls[0].goal, Expr::Bool(true));
        assert_eq!(obls[0].label, "Program.postcondition");
    }

    #[test]
    fn assignment_wp_is_simultaneous() {
        let c = Construct::Assign {
            targets: vec![Target::Var("n".into(), Sort::Int), Target::Var("m".into(), Sort::Int)],
            exprs: vec![Expr::int_var("m"), n()],
        };
        let r = Expr::lt(n(), Expr::int_var("m"));
        assert_eq!(wp(&c, &r).unwrap(), Expr::lt(Expr::int_var("m"), n()));
        assert_eq!(wp(&Construct::Skip, &r).unwrap(), r);
        assert!(wp(&Construct::Unknown("S".into()), &r).is_err());
    }

    #[test]
    fn element_assignment_becomes_update() {
        let f = Sort::array_of(Sort::Int);
        let c = Construct::Assign {
            targets: vec![Target::Elem("a".into(), f.clone(), n())],
            exprs: vec![Expr::int(1)],
        };
        let r = Expr::eq(Expr::read(Expr::var("a", f.clone()), n()), Expr::int(1));
        let expect = Expr::eq(
            Expr::read(Expr::update(Expr::var("a", f), n(), Expr::int(1)), n()),
            Expr::int(1),
        );
        assert_eq!(wp(&c, &r).unwrap(), expect);
    }

    #[test]
    fn duplicate_labels_are_numbered() {
        let a = Expr::lt(n(), Expr::int(1));
        let p = AnnotatedProgram::new(
            a.clone(),
            a.clone(),
            Construct::If(vec![
                (Expr::Bool(true), AnnotatedProgram::new(branch_pre(&a, &Expr::Bool(true)), a.clone(), Construct::Skip)),
                (Expr::Bool(false), AnnotatedProgram::new(branch_pre(&a, &Expr::Bool(false)), a.clone(), Construct::Skip)),
            ]),
        );
        let labels: Vec<String> = generate_obligations(&p).into_iter().map(|o| o.label).collect();
        assert_eq!(labels, ["If.guards-cover", "Program.postcondition#0", "Program.postcondition#1"]);
    }
}
