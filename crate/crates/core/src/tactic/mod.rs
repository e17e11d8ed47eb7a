//! Tactics: the steps of a derivation.
//!
//! A [`DerivationState`] is empty, a program with proof obligations, or a
//! calculation on one obligation (formula mode). [`TacticEngine::apply`]
//! maps a state and an invocation to the next state, or fails and leaves
//! nothing behind.

mod formula_mode;
mod invocation;
mod program_mode;
pub mod simplify;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::formula::{Env, Expr, ExprPath, Sort, SortError};
use crate::program::{render_program, Declarations, NodePath};
use crate::solver::{Goal, Prover, UnknownReason, Verdict};
use crate::wp::{ProofObligation, Status};

pub use invocation::{
    parse_tactic, parse_tactic_unchecked, registry, tactic_spec, Mode, ParamKind, ParamSpec, ParamValue,
    TacticInvocation, TacticSpec,
};
pub use simplify::{simplify, Rewrite, Simplified};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Relation {
    Equiv,
    Implies,
    Follows,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Equiv => "≡",
            Relation::Implies => "⇒",
            Relation::Follows => "⇐",
        }
    }

    pub fn parse(text: &str) -> Option<Relation> {
        match text.trim() {
            "≡" | "equiv" | "==" | "\\equiv" => Some(Relation::Equiv),
            "⇒" | "implies" | "=>" | "\\Rightarrow" => Some(Relation::Implies),
            "⇐" | "follows" | "<=" | "\\Leftarrow" => Some(Relation::Follows),
            _ => None,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Which rewrites of a frame's formula preserve the meaning of the whole.
/// In a positive position the formula may be replaced by something
/// stronger (steps `⇐`), in a negative one by something weaker (`⇒`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    Positive,
    Negative,
    Equivalence,
}

impl Polarity {
    pub fn flip(self) -> Polarity {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
            Polarity::Equivalence => Polarity::Equivalence,
        }
    }

    pub fn allows(self, r: Relation) -> bool {
        match self {
            Polarity::Positive => matches!(r, Relation::Equiv | Relation::Follows),
            Polarity::Negative => matches!(r, Relation::Equiv | Relation::Implies),
            Polarity::Equivalence => r == Relation::Equiv,
        }
    }

    /// The non-trivial relation allowed in this position.
    pub fn direction(self) -> Relation {
        match self {
            Polarity::Positive => Relation::Follows,
            Polarity::Negative => Relation::Implies,
            Polarity::Equivalence => Relation::Equiv,
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Polarity::Positive => "positive",
            Polarity::Negative => "negative",
            Polarity::Equivalence => "equivalence",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub relation: Relation,
    pub formula: Expr,
    /// Rendered invocation that produced the step.
    pub tactic: String,
    /// The relation check and any side conditions, with verdicts.
    pub checks: Vec<ProofObligation>,
}

/// One calculation: `start R1 f1 R2 f2 ...` under `assumptions`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Frame {
    pub assumptions: Vec<Expr>,
    pub start: Expr,
    pub steps: Vec<Step>,
    /// Position of `start` in the enclosing frame's current formula.
    pub focus: Option<ExprPath>,
    pub polarity: Polarity,
}

impl Frame {
    pub fn current(&self) -> &Expr {
        self.steps.last().map(|s| &s.formula).unwrap_or(&self.start)
    }

    /// Relation between `start` and `current`.
    pub fn composed(&self) -> Relation {
        if self.steps.iter().all(|s| s.relation == Relation::Equiv) {
            Relation::Equiv
        } else {
            self.polarity.direction()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProgramState {
    pub decls: Declarations,
    pub program: crate::program::AnnotatedProgram,
    pub obligations: Vec<ProofObligation>,
    /// Obligations introduced by the tactics themselves, e.g. that a
    /// replaced postcondition implies the original.
    pub side_conditions: Vec<ProofObligation>,
}

impl ProgramState {
    pub fn obligation(&self, label: &str) -> Option<&ProofObligation> {
        self.obligations.iter().find(|o| o.label == label)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaState {
    pub base: ProgramState,
    /// Label of the obligation being calculated with.
    pub obligation: String,
    pub origin: NodePath,
    /// Outermost frame first.
    pub frames: Vec<Frame>,
}

impl FormulaState {
    pub fn frame(&self) -> &Frame {
        self.frames.last().expect("formula state without frames")
    }

    /// Names and metavariables usable in new formulas.
    pub fn env(&self) -> Env {
        let mut env = self.base.decls.env();
        for fr in &self.frames {
            for e in fr.assumptions.iter().chain(std::iter::once(fr.current())) {
                for (n, s) in e.free_vars() {
                    env = env.with_var(&n, s);
                }
            }
        }
        for (n, s) in self.pending_metas() {
            env = env.with_meta(&n, s);
        }
        env
    }

    pub fn pending_metas(&self) -> BTreeSet<(String, Sort)> {
        self.base.program.meta_vars()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum DerivationState {
    Empty,
    Program(ProgramState),
    Formula(FormulaState),
}

impl DerivationState {
    pub fn mode(&self) -> Mode {
        match self {
            DerivationState::Empty => Mode::Empty,
            DerivationState::Program(_) => Mode::Program,
            DerivationState::Formula(_) => Mode::Formula,
        }
    }

    /// The program, also while calculating.
    pub fn program_state(&self) -> Option<&ProgramState> {
        match self {
            DerivationState::Empty => None,
            DerivationState::Program(p) => Some(p),
            DerivationState::Formula(f) => Some(&f.base),
        }
    }

    /// A program without `UnkProg` and metavariables whose obligations are
    /// all valid.
    pub fn is_complete(&self) -> bool {
        match self {
            DerivationState::Program(p) => {
                p.program.unknown_tags().is_empty()
                    && !p.program.has_meta()
                    && p.obligations.iter().chain(&p.side_conditions).all(ProofObligation::is_valid)
            }
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TacticError {
    #[error("unknown tactic {0}")]
    UnknownTactic(String),
    #[error("parameter {param}: {reason}")]
    ParamValidation { param: String, reason: String },
    #[error("missing parameter {0}")]
    MissingParam(String),
    #[error("syntax error at {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error("{tactic} is not available in {mode:?} mode")]
    WrongMode { tactic: String, mode: Mode },
    #[error("not applicable: {0}")]
    Inapplicable(String),
    #[error("{label} is not valid ({status}): {obligation}")]
    SideConditionFailed {
        label: String,
        status: Status,
        obligation: String,
    },
    #[error("name {0} is already declared")]
    NameClash(String),
    #[error("constant {0} does not occur in the postcondition")]
    ConstNotPresent(String),
    #[error("postcondition has fewer than two conjuncts")]
    NotAConjunction,
    #[error("no obligation labelled {0}")]
    NoSuchObligation(String),
    #[error("no node at {0}")]
    InvalidPath(String),
    #[error("metavariable {0}' has no solution")]
    UnboundMetaVar(String),
    #[error("calculation step {0} does not hold")]
    ChainBroken(usize),
    #[error("metavariables are not allowed here")]
    MetaVarNotAllowed,
    #[error(transparent)]
    Sort(#[from] SortError),
}

/// A successful application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Applied {
    pub state: DerivationState,
    /// Obligations of the new state that the old one did not have.
    pub new_obligations: Vec<ProofObligation>,
    pub notes: Vec<String>,
}

#[derive(Clone)]
pub struct TacticEngine {
    prover: Arc<dyn Prover>,
}

impl fmt::Debug for TacticEngine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TacticEngine").finish_non_exhaustive()
    }
}

pub(crate) fn status_of(v: Verdict) -> Status {
    match v {
        Verdict::Valid => Status::Valid,
        Verdict::Invalid(m) => Status::Invalid(m),
        Verdict::Unknown(UnknownReason::Timeout) => Status::Unknown("timeout".into()),
        Verdict::Unknown(UnknownReason::Incomplete(r)) | Verdict::Unknown(UnknownReason::SolverError(r)) => {
            Status::Unknown(r)
        }
    }
}

impl TacticEngine {
    pub fn new(prover: Arc<dyn Prover>) -> Self {
        TacticEngine { prover }
    }

    pub fn prover(&self) -> &Arc<dyn Prover> {
        &self.prover
    }

    pub fn check_goal(&self, goal: &Goal) -> Status {
        status_of(self.prover.check(goal).verdict)
    }

    /// Decide every checkable open obligation, concurrently.
    pub fn check_all(&self, obligations: Vec<ProofObligation>) -> Vec<ProofObligation> {
        std::thread::scope(|s| {
            let handles: Vec<_> = obligations
                .into_iter()
                .map(|mut o| {
                    s.spawn(move || {
                        if o.status == Status::Open && o.is_checkable() {
                            o.status = self.check_goal(&o.as_goal());
                        }
                        o
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("checker thread panicked")).collect()
        })
    }

    pub fn apply_text(&self, state: &DerivationState, text: &str) -> Result<Applied, TacticError> {
        self.apply(state, &parse_tactic(text)?)
    }

    pub fn apply(&self, state: &DerivationState, inv: &TacticInvocation) -> Result<Applied, TacticError> {
        let spec = tactic_spec(&inv.name).ok_or_else(|| TacticError::UnknownTactic(inv.name.clone()))?;
        for p in &spec.params {
            if !p.optional && !inv.params.contains_key(p.name) {
                return Err(TacticError::MissingParam(p.name.to_string()));
            }
        }
        if let Some(k) = inv.params.keys().find(|k| spec.param(k).is_none()) {
            return Err(TacticError::ParamValidation {
                param: k.clone(),
                reason: format!("{} has no such parameter", spec.name),
            });
        }
        if spec.mode != state.mode() {
            return Err(TacticError::WrongMode {
                tactic: inv.name.clone(),
                mode: state.mode(),
            });
        }
        let (next, notes) = match state {
            DerivationState::Empty => program_mode::init(self, inv)?,
            DerivationState::Program(p) => program_mode::apply(self, p, inv)?,
            DerivationState::Formula(f) => formula_mode::apply(self, f, inv)?,
        };
        let old: BTreeSet<(String, String)> = state
            .program_state()
            .map(|p| p.obligations.iter().map(|o| (o.label.clone(), o.as_goal().key())).collect())
            .unwrap_or_default();
        let new_obligations = next
            .program_state()
            .map(|p| {
                p.obligations
                    .iter()
                    .filter(|o| !old.contains(&(o.label.clone(), o.as_goal().key())))
                    .cloned()
                    .collect()
            })
            .unwrap_or_default();
        Ok(Applied {
            state: next,
            new_obligations,
            notes,
        })
    }
}

fn status_tag(s: &Status) -> &'static str {
    match s {
        Status::Open => "open",
        Status::Valid => "valid",
        Status::Invalid(_) => "invalid",
        Status::Unknown(_) => "unknown",
    }
}

pub fn render_obligation(o: &ProofObligation) -> String {
    let hyps: Vec<String> = o.hypotheses.iter().map(|h| h.to_string()).collect();
    format!(
        "[{}] {} {}: {} ⊢ {}",
        status_tag(&o.status),
        o.label,
        o.origin,
        hyps.join(", "),
        o.goal
    )
}

fn render_decls(d: &[(String, Sort)]) -> String {
    d.iter().map(|(n, s)| format!("{n}: {s}")).collect::<Vec<_>>().join(", ")
}

fn render_program_state(p: &ProgramState, out: &mut Vec<String>) {
    out.push(format!("consts: {}", render_decls(&p.decls.consts)));
    out.push(format!("vars: {}", render_decls(&p.decls.vars)));
    out.push("program:".into());
    out.extend(render_program(&p.program, None).lines().map(|l| format!("  {l}")));
    out.push("obligations:".into());
    out.extend(p.obligations.iter().map(|o| format!("  {}", render_obligation(o))));
    if !p.side_conditions.is_empty() {
        out.push("side conditions:".into());
        out.extend(p.side_conditions.iter().map(|o| format!("  {}", render_obligation(o))));
    }
}

/// Deterministic text of a state; derivation documents store it per node
/// and compare it on replay. Counterexamples are left out since they depend
/// on the solver.
pub fn render_state(s: &DerivationState) -> Vec<String> {
    let mut out = Vec::new();
    match s {
        DerivationState::Empty => out.push("mode: empty".into()),
        DerivationState::Program(p) => {
            out.push("mode: program".into());
            render_program_state(p, &mut out);
        }
        DerivationState::Formula(f) => {
            out.push("mode: formula".into());
            out.push(format!("obligation: {} {}", f.obligation, f.origin));
            for (k, fr) in f.frames.iter().enumerate() {
                let focus = fr.focus.as_ref().map(|p| format!(" focus {p}")).unwrap_or_default();
                out.push(format!("frame {k} ({}){focus}:", fr.polarity));
                for a in &fr.assumptions {
                    out.push(format!("  assume {a}"));
                }
                out.push(format!("    {}", fr.start));
                for st in &fr.steps {
                    out.push(format!("  {}   {{ {} }}", st.relation, st.tactic));
                    out.push(format!("    {}", st.formula));
                }
            }
            render_program_state(&f.base, &mut out);
        }
    }
    out
}

pub(crate) fn bad_param(param: &str, reason: impl fmt::Display) -> TacticError {
    TacticError::ParamValidation {
        param: param.to_string(),
        reason: reason.to_string(),
    }
}

pub(crate) fn parse_param(inv: &TacticInvocation, key: &str, env: &Env) -> Result<Expr, TacticError> {
    let text = inv.require(key)?;
    crate::formula::parse_formula(&text, env).map_err(|e| bad_param(key, e))
}

pub(crate) fn parse_bool_param(inv: &TacticInvocation, key: &str, env: &Env) -> Result<Expr, TacticError> {
    let e = parse_param(inv, key, env)?;
    if e.sort() != Sort::Bool {
        return Err(bad_param(key, format!("expected a Bool formula, found {}", e.sort())));
    }
    Ok(e)
}

/// Fails unless every checkable obligation is valid.
pub(crate) fn require_valid<'a>(obls: impl IntoIterator<Item = &'a ProofObligation>) -> Result<(), TacticError> {
    for o in obls {
        if o.is_checkable() && !o.is_valid() {
            return Err(TacticError::SideConditionFailed {
                label: o.label.clone(),
                status: o.status.clone(),
                obligation: render_obligation(o),
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polarity_rules() {
        assert!(Polarity::Positive.allows(Relation::Follows));
        assert!(!Polarity::Positive.allows(Relation::Implies));
        assert!(Polarity::Negative.allows(Relation::Implies));
        assert!(!Polarity::Equivalence.allows(Relation::Follows));
        assert_eq!(Polarity::Positive.flip(), Polarity::Negative);
        assert_eq!(Relation::parse("=>"), Some(Relation::Implies));
        assert_eq!(Relation::parse("⇐"), Some(Relation::Follows));
        assert_eq!(Relation::parse("~"), None);
    }
}
