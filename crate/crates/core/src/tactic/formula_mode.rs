use std::collections::{BTreeMap, BTreeSet};

use super::{
    bad_param, program_mode, render_obligation, simplify, DerivationState, FormulaState, Frame, Polarity,
    ProgramState, Relation, Step, TacticEngine, TacticError, TacticInvocation,
};
use crate::formula::{instantiate_metavars, parse_formula, BinOp, Expr, ExprPath, QuantOp, Sort, Substitution, UnOp};
use crate::solver::Goal;
use crate::wp::{ProofObligation, Status};

type Outcome = Result<(DerivationState, Vec<String>), TacticError>;

pub(super) fn step_into(p: &ProgramState, inv: &TacticInvocation) -> Outcome {
    let label = inv.require("label")?.trim().to_string();
    let o = p.obligation(&label).ok_or_else(|| TacticError::NoSuchObligation(label.clone()))?;
    if !o.has_meta() {
        return Err(TacticError::Inapplicable(format!(
            "{label} has no metavariables; the prover decides it"
        )));
    }
    if o.status != Status::Open {
        return Err(TacticError::Inapplicable(format!("{label} is already {}", o.status)));
    }
    let frame = Frame {
        assumptions: o.hypotheses.clone(),
        start: o.goal.clone(),
        steps: vec![],
        focus: None,
        polarity: Polarity::Positive,
    };
    let f = FormulaState {
        base: p.clone(),
        obligation: label,
        origin: o.origin.clone(),
        frames: vec![frame],
    };
    Ok((DerivationState::Formula(f), vec![]))
}

pub(super) fn apply(engine: &TacticEngine, f: &FormulaState, inv: &TacticInvocation) -> Outcome {
    match inv.name.as_str() {
        "focus" => focus(f, inv),
        "guessFormula" => guess(engine, f, inv),
        "simplifyAuto" => simplify_auto(engine, f, inv),
        "stepOut" => step_out(engine, f, inv),
        other => Err(TacticError::UnknownTactic(other.to_string())),
    }
}

/// `cur R next` as a formula.
fn relation_goal(cur: &Expr, next: &Expr, rel: Relation) -> Expr {
    if cur.sort() != Sort::Bool {
        return Expr::eq(cur.clone(), next.clone());
    }
    match rel {
        Relation::Equiv => Expr::equiv(cur.clone(), next.clone()),
        Relation::Implies => Expr::implies(cur.clone(), next.clone()),
        Relation::Follows => Expr::implies(next.clone(), cur.clone()),
    }
}

/// Metavariables are read as unknown but fixed values.
fn check(engine: &TacticEngine, label: &str, f: &FormulaState, assumptions: &[Expr], goal: Expr) -> ProofObligation {
    let mut o = ProofObligation::new(label, assumptions.to_vec(), goal, &f.origin);
    o.status = engine.check_goal(&o.as_goal().generalize_metas());
    o
}

fn failed(o: &ProofObligation) -> TacticError {
    TacticError::SideConditionFailed {
        label: o.label.clone(),
        status: o.status.clone(),
        obligation: render_obligation(o),
    }
}

fn push_step(f: &FormulaState, step: Step) -> DerivationState {
    let mut next = f.clone();
    next.frames.last_mut().expect("frame").steps.push(step);
    DerivationState::Formula(next)
}

/// Subterm at `path` with its polarity and the facts that hold there.
fn descend(e: &Expr, path: &ExprPath, start: Polarity) -> Option<(Expr, Polarity, Vec<Expr>)> {
    let mut cur = e;
    let mut pol = start;
    let mut facts = Vec::new();
    for &i in &path.0 {
        let children = cur.children();
        let next = *children.get(i)?;
        let sibling = children.get(1 - i.min(1)).filter(|_| children.len() == 2).map(|s| (*s).clone());
        match cur {
            Expr::Unary(UnOp::Not, _) => pol = pol.flip(),
            Expr::Binary(BinOp::And, ..) => facts.extend(sibling),
            Expr::Binary(BinOp::Or, ..) => facts.extend(sibling.map(Expr::negate)),
            Expr::Binary(BinOp::Implies, a, _) => {
                if i == 0 {
                    pol = pol.flip();
                } else {
                    facts.push((**a).clone());
                }
            }
            Expr::Quant(q) if i == 1 => {
                facts.push(q.range.clone());
                if !matches!(q.op, QuantOp::Forall | QuantOp::Exists) {
                    pol = Polarity::Equivalence;
                }
            }
            _ => pol = Polarity::Equivalence,
        }
        cur = next;
    }
    Some((cur.clone(), pol, facts))
}

fn focus(f: &FormulaState, inv: &TacticInvocation) -> Outcome {
    let text = inv.require("path")?;
    let path: ExprPath = text.trim().parse().map_err(|e: String| bad_param("path", e))?;
    let frame = f.frame();
    let cur = frame.current();
    let (sub, polarity, released) =
        descend(cur, &path, frame.polarity).ok_or_else(|| TacticError::InvalidPath(path.to_string()))?;
    let binders = cur.binders_along(&path).unwrap_or_default();
    let mut taken: BTreeSet<String> = f.base.decls.names();
    for a in &frame.assumptions {
        taken.extend(a.free_var_names());
    }
    taken.extend(cur.free_var_names());
    if let Some(b) = binders.iter().find(|b| taken.contains(*b)) {
        return Err(TacticError::Inapplicable(format!(
            "bound variable {b} clashes with a free name; rename it first"
        )));
    }
    let mut assumptions = frame.assumptions.clone();
    assumptions.extend(released);
    let mut next = f.clone();
    next.frames.push(Frame {
        assumptions,
        start: sub,
        steps: vec![],
        focus: Some(path),
        polarity,
    });
    Ok((DerivationState::Formula(next), vec![]))
}

fn guess(engine: &TacticEngine, f: &FormulaState, inv: &TacticInvocation) -> Outcome {
    let frame = f.frame();
    let cur = frame.current();
    let next = parse_formula(&inv.require("next")?, &f.env()).map_err(|e| bad_param("next", e))?;
    if next.sort() != cur.sort() {
        return Err(bad_param("next", format!("expected {}, found {}", cur.sort(), next.sort())));
    }
    let pending = f.pending_metas();
    if let Some((m, _)) = next.meta_vars().into_iter().find(|m| !pending.contains(m)) {
        return Err(bad_param("next", format!("{m}' is not a metavariable of this derivation")));
    }
    let rel = match inv.text("rel") {
        None => Relation::Equiv,
        Some(t) => Relation::parse(&t).ok_or_else(|| bad_param("rel", format!("unknown relation {t:?}")))?,
    };
    if !frame.polarity.allows(rel) {
        return Err(TacticError::Inapplicable(format!(
            "{rel} steps are not allowed in a {} position",
            frame.polarity
        )));
    }
    let o = check(engine, "Step.relation", f, &frame.assumptions, relation_goal(cur, &next, rel));
    if !o.is_valid() {
        return Err(failed(&o));
    }
    Ok((
        push_step(
            f,
            Step {
                relation: rel,
                formula: next,
                tactic: inv.to_string(),
                checks: vec![o],
            },
        ),
        vec![],
    ))
}

fn simplify_auto(engine: &TacticEngine, f: &FormulaState, inv: &TacticInvocation) -> Outcome {
    let frame = f.frame();
    let cur = frame.current();
    let s = simplify(cur, &mut |c| {
        engine.check_goal(&Goal::new(frame.assumptions.clone(), c.clone()).generalize_metas())
    });
    if s.result == *cur {
        return Err(TacticError::Inapplicable("no rewrite rule applies".into()));
    }
    let mut checks: Vec<ProofObligation> = s
        .side_conditions
        .iter()
        .map(|(c, status)| {
            let mut o = ProofObligation::new("Simplify.side-condition", frame.assumptions.clone(), c.clone(), &f.origin);
            o.status = status.clone();
            o
        })
        .collect();
    let o = check(engine, "Step.relation", f, &frame.assumptions, relation_goal(cur, &s.result, Relation::Equiv));
    if !o.is_valid() {
        return Err(failed(&o));
    }
    checks.push(o);
    let mut rules: Vec<&str> = s.rewrites.iter().map(|r| r.rule).collect();
    rules.dedup();
    let note = format!("rules: {}", rules.join(", "));
    Ok((
        push_step(
            f,
            Step {
                relation: Relation::Equiv,
                formula: s.result,
                tactic: inv.to_string(),
                checks,
            },
        ),
        vec![note],
    ))
}

fn step_out(engine: &TacticEngine, f: &FormulaState, inv: &TacticInvocation) -> Outcome {
    if f.frames.len() > 1 {
        if inv.params.contains_key("bindings") {
            return Err(bad_param("bindings", "only allowed when leaving the outermost frame"));
        }
        let mut next = f.clone();
        let inner = next.frames.pop().expect("inner frame");
        if inner.steps.is_empty() {
            return Ok((DerivationState::Formula(next), vec![]));
        }
        let outer = next.frames.last().expect("outer frame");
        let rel = match inner.composed() {
            Relation::Equiv => Relation::Equiv,
            _ => outer.polarity.direction(),
        };
        let path = inner.focus.clone().expect("inner frames have a focus");
        let cur = outer.current().clone();
        let formula = cur
            .replace_at(&path, inner.current().clone())
            .ok_or_else(|| TacticError::InvalidPath(path.to_string()))?;
        let o = check(engine, "Step.relation", f, &outer.assumptions, relation_goal(&cur, &formula, rel));
        if !o.is_valid() {
            return Err(TacticError::ChainBroken(outer.steps.len()));
        }
        let step = Step {
            relation: rel,
            formula,
            tactic: inv.to_string(),
            checks: vec![o],
        };
        next.frames.last_mut().expect("outer frame").steps.push(step);
        return Ok((DerivationState::Formula(next), vec![]));
    }

    let frame = f.frame();
    for (k, st) in frame.steps.iter().enumerate() {
        if !st.checks.last().is_some_and(ProofObligation::is_valid) {
            return Err(TacticError::ChainBroken(k));
        }
    }
    let pending = f.pending_metas();
    let sorts: BTreeMap<String, Sort> = pending.iter().cloned().collect();
    let names = f.base.decls.names();
    let mut bindings: BTreeMap<String, Expr> = BTreeMap::new();
    let explicit = inv.params.contains_key("bindings");
    if explicit {
        for item in inv.items("bindings").unwrap_or_default() {
            let (lhs, rhs) = item
                .split_once(":=")
                .ok_or_else(|| bad_param("bindings", format!("expected m' := E, found {item:?}")))?;
            let m = lhs.trim().strip_suffix('\'').unwrap_or(lhs.trim()).to_string();
            if !sorts.contains_key(&m) {
                return Err(bad_param("bindings", format!("{m}' is not a metavariable of this derivation")));
            }
            let e = parse_formula(rhs, &f.base.decls.env()).map_err(|e| bad_param("bindings", e))?;
            if e.has_meta() {
                return Err(TacticError::MetaVarNotAllowed);
            }
            if bindings.insert(m.clone(), e).is_some() {
                return Err(bad_param("bindings", format!("{m}' bound twice")));
            }
        }
    } else {
        for c in frame.current().top_conjuncts() {
            if let Expr::Binary(BinOp::Equiv | BinOp::Eq, a, b) = c {
                let hit = match (&**a, &**b) {
                    (Expr::Meta(m, _), e) | (e, Expr::Meta(m, _)) if !e.has_meta() => Some((m.clone(), e.clone())),
                    _ => None,
                };
                if let Some((m, e)) = hit {
                    bindings.entry(m).or_insert(e);
                }
            }
        }
    }
    for (m, sort) in &pending {
        let e = bindings.get(m).ok_or_else(|| TacticError::UnboundMetaVar(m.clone()))?;
        if e.sort() != *sort {
            return Err(bad_param("bindings", format!("{m}' has sort {sort}, {e} has sort {}", e.sort())));
        }
        if e.has_quantifier() || !e.free_var_names().is_subset(&names) {
            return Err(TacticError::Inapplicable(format!(
                "{m}' := {e} is not a program expression; calculate further"
            )));
        }
    }
    let subst = Substitution::metas(bindings.iter().map(|(m, e)| (m.clone(), e.clone())));
    let inst = |e: &Expr| instantiate_metavars(e, &subst).map(|(r, _)| r);
    if explicit {
        let assumptions = frame.assumptions.iter().map(inst).collect::<Result<Vec<_>, _>>()?;
        let mut o = ProofObligation::new("StepOut.solution", assumptions, inst(frame.current())?, &f.origin);
        o.status = engine.check_goal(&o.as_goal());
        if !o.is_valid() {
            return Err(failed(&o));
        }
    }
    let mut err = None;
    let program = f.base.program.map_exprs(&mut |e| match inst(e) {
        Ok(r) => r,
        Err(x) => {
            err.get_or_insert(x);
            e.clone()
        }
    });
    if let Some(x) = err {
        return Err(x.into());
    }
    let notes = bindings.iter().map(|(m, e)| format!("{m}' := {e}")).collect();
    let state = program_mode::finish(engine, f.base.decls.clone(), program, f.base.side_conditions.clone())?;
    Ok((DerivationState::Program(state), notes))
}
