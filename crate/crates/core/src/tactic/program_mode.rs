use std::collections::BTreeSet;

use super::{
    bad_param, formula_mode, parse_bool_param, parse_param, require_valid, DerivationState, ProgramState, TacticEngine,
    TacticError, TacticInvocation,
};
use crate::formula::{is_keyword, parse_formula, substitute, Expr, Sort, Substitution};
use crate::program::{
    check_wellformed, collect_unknowns, fresh_tag, loop_body_pre, parse_decls, parse_stmt, parse_targets,
    AnnotatedProgram, Construct, Declarations, NodePath, Stmt,
};
use crate::wp::{annotate, generate_obligations_with, hypotheses_of, ProofObligation};

type Outcome = Result<(DerivationState, Vec<String>), TacticError>;

/// Conjuncts of the precondition that only mention constants; they hold
/// everywhere in the program.
fn constant_facts(decls: &Declarations, p: &AnnotatedProgram) -> Vec<Expr> {
    let consts: BTreeSet<String> = decls.consts.iter().map(|(n, _)| n.clone()).collect();
    hypotheses_of(&p.pre)
        .into_iter()
        .filter(|h| h.free_var_names().is_subset(&consts))
        .collect()
}

/// Checks a candidate program and builds the state. Every checkable
/// obligation must be valid.
pub(super) fn finish(
    engine: &TacticEngine,
    decls: Declarations,
    program: AnnotatedProgram,
    side_conditions: Vec<ProofObligation>,
) -> Result<ProgramState, TacticError> {
    if let Some(v) = check_wellformed(&program).into_iter().next() {
        return Err(TacticError::Inapplicable(format!(
            "ill-formed program at {}: {:?} ({})",
            v.path, v.rule, v.detail
        )));
    }
    let facts = constant_facts(&decls, &program);
    let side_conditions = engine.check_all(side_conditions);
    require_valid(&side_conditions)?;
    let obligations = engine.check_all(generate_obligations_with(&program, &facts));
    require_valid(&obligations)?;
    Ok(ProgramState {
        decls,
        program,
        obligations,
        side_conditions,
    })
}

fn identifier(inv: &TacticInvocation, key: &str) -> Result<String, TacticError> {
    let name = inv.require(key)?.trim().to_string();
    let mut chars = name.chars();
    let ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !is_keyword(&name);
    if !ok {
        return Err(bad_param(key, format!("{name:?} is not an identifier")));
    }
    Ok(name)
}

fn decls_param(inv: &TacticInvocation, key: &str) -> Result<Vec<(String, Sort)>, TacticError> {
    match inv.text(key) {
        None => Ok(vec![]),
        Some(t) if t.trim().is_empty() => Ok(vec![]),
        Some(t) => parse_decls(&t).map_err(|e| bad_param(key, e)),
    }
}

fn node_path(inv: &TacticInvocation) -> Result<Option<NodePath>, TacticError> {
    inv.text("path")
        .map(|t| t.trim().parse::<NodePath>().map_err(|e| bad_param("path", e)))
        .transpose()
}

/// The `UnkProg` a tactic works on: `path`, or the first in pre-order.
fn target_unknown(p: &AnnotatedProgram, inv: &TacticInvocation) -> Result<(NodePath, AnnotatedProgram), TacticError> {
    match node_path(inv)? {
        Some(path) => {
            let n = p.node(&path).ok_or_else(|| TacticError::InvalidPath(path.to_string()))?;
            if !matches!(n.body, Construct::Unknown(_)) {
                return Err(TacticError::Inapplicable(format!("node {path} is a {}, not an UnkProg", n.body.kind())));
            }
            Ok((path, n.clone()))
        }
        None => collect_unknowns(p)
            .into_iter()
            .next()
            .map(|u| (u.path.clone(), p.node(&u.path).cloned().expect("listed node")))
            .ok_or_else(|| TacticError::Inapplicable("no UnkProg left".into())),
    }
}

fn replace(p: &AnnotatedProgram, path: &NodePath, n: AnnotatedProgram) -> Result<AnnotatedProgram, TacticError> {
    p.replace_node(path, n).ok_or_else(|| TacticError::InvalidPath(path.to_string()))
}

fn no_metas(e: &Expr) -> Result<(), TacticError> {
    if e.has_meta() {
        Err(TacticError::MetaVarNotAllowed)
    } else {
        Ok(())
    }
}

pub(super) fn init(engine: &TacticEngine, inv: &TacticInvocation) -> Outcome {
    let consts = decls_param(inv, "consts")?;
    let vars = decls_param(inv, "vars")?;
    let mut seen = BTreeSet::new();
    for (n, _) in consts.iter().chain(&vars) {
        if !seen.insert(n.clone()) {
            return Err(TacticError::NameClash(n.clone()));
        }
    }
    let decls = Declarations { consts, vars };
    let env = decls.env();
    let pre = parse_bool_param(inv, "pre", &env)?;
    let post = parse_bool_param(inv, "post", &env)?;
    no_metas(&pre)?;
    no_metas(&post)?;
    let program = AnnotatedProgram::unknown(pre, post, "S");
    Ok((DerivationState::Program(finish(engine, decls, program, vec![])?), vec![]))
}

pub(super) fn apply(engine: &TacticEngine, p: &ProgramState, inv: &TacticInvocation) -> Outcome {
    match inv.name.as_str() {
        "replaceConstantByVariable" => replace_constant(engine, p, inv),
        "takeConjunctsAsInvariants" => take_conjuncts(engine, p, inv),
        "introAssignment" => intro_assignment(engine, p, inv),
        "introComposition" => intro_composition(engine, p, inv),
        "strengthenInvariant" => strengthen(engine, p, inv),
        "guessProgram" => guess_program(engine, p, inv),
        "stepInto" => formula_mode::step_into(p, inv),
        other => Err(TacticError::UnknownTactic(other.to_string())),
    }
}

fn program_state(engine: &TacticEngine, decls: Declarations, program: AnnotatedProgram, side: Vec<ProofObligation>) -> Outcome {
    Ok((DerivationState::Program(finish(engine, decls, program, side)?), vec![]))
}

fn replace_constant(engine: &TacticEngine, p: &ProgramState, inv: &TacticInvocation) -> Outcome {
    if let Some(path) = node_path(inv)? {
        if path != NodePath::root() {
            return Err(TacticError::Inapplicable("only the specification node can be generalised".into()));
        }
    }
    let root = &p.program;
    let Construct::Unknown(tag) = &root.body else {
        return Err(TacticError::Inapplicable("the specification has already been refined".into()));
    };
    let c = identifier(inv, "const")?;
    let sort = match p.decls.consts.iter().find(|(n, _)| *n == c) {
        Some((_, s)) => s.clone(),
        None => return Err(bad_param("const", format!("{c} is not a declared constant"))),
    };
    if !root.post.free_var_names().contains(&c) {
        return Err(TacticError::ConstNotPresent(c));
    }
    let fresh = identifier(inv, "fresh")?;
    if p.decls.contains(&fresh) {
        return Err(TacticError::NameClash(fresh));
    }
    let env = p.decls.env().with_var(&fresh, sort.clone());
    let bounds = parse_bool_param(inv, "bounds", &env)?;
    no_metas(&bounds)?;
    let v = Expr::var(&fresh, sort.clone());
    let generalised = substitute(&root.post, &Substitution::vars([(c.clone(), v.clone())]))?;
    let post = Expr::conj([generalised, bounds, Expr::eq(v, Expr::var(&c, sort.clone()))]);
    let side = ProofObligation::new(
        "ReplaceConstant.refinement",
        hypotheses_of(&post),
        root.post.clone(),
        &NodePath::root(),
    );
    let mut decls = p.decls.clone();
    decls.vars.push((fresh, sort));
    let program = AnnotatedProgram::unknown(root.pre.clone(), post, tag.clone());
    program_state(engine, decls, program, vec![side])
}

fn take_conjuncts(engine: &TacticEngine, p: &ProgramState, inv: &TacticInvocation) -> Outcome {
    let (path, node) = target_unknown(&p.program, inv)?;
    let conjuncts: Vec<Expr> = node.post.top_conjuncts().into_iter().cloned().collect();
    if conjuncts.len() < 2 {
        return Err(TacticError::NotAConjunction);
    }
    let mut which = Vec::new();
    for item in inv.items("which").unwrap_or_default() {
        let k: usize = item.parse().map_err(|_| bad_param("which", format!("{item:?} is not an index")))?;
        if k >= conjuncts.len() {
            return Err(bad_param("which", format!("index {k} out of range; the postcondition has {} conjuncts", conjuncts.len())));
        }
        if which.contains(&k) {
            return Err(bad_param("which", format!("index {k} repeated")));
        }
        which.push(k);
    }
    if which.is_empty() || which.len() == conjuncts.len() {
        return Err(bad_param("which", "choose at least one conjunct and leave at least one for the guard"));
    }
    let invariants: Vec<Expr> = which.iter().map(|k| conjuncts[*k].clone()).collect();
    let rest: Vec<Expr> = (0..conjuncts.len()).filter(|k| !which.contains(k)).map(|k| conjuncts[k].clone()).collect();
    let guard = Expr::negate(Expr::conj(rest));
    let bound = match inv.text("bound") {
        None => None,
        Some(_) => {
            let t = parse_param(inv, "bound", &p.decls.env())?;
            if t.sort() != Sort::Int {
                return Err(bad_param("bound", format!("expected an Int expression, found {}", t.sort())));
            }
            no_metas(&t)?;
            Some(t)
        }
    };
    let body_tag = fresh_tag(&p.program, &[]);
    let init_tag = fresh_tag(&p.program, &[body_tag.clone()]);
    let i = Expr::conj(invariants.iter().cloned());
    let body = AnnotatedProgram::unknown(loop_body_pre(&invariants, &guard), i.clone(), body_tag);
    let lp = AnnotatedProgram::new(
        i.clone(),
        node.post.clone(),
        Construct::While {
            invariants,
            bound,
            guard,
            body: Box::new(body),
        },
    );
    let init = AnnotatedProgram::unknown(node.pre.clone(), i, init_tag);
    let new = AnnotatedProgram::new(node.pre.clone(), node.post.clone(), Construct::Composition(vec![init, lp]));
    let program = replace(&p.program, &path, new)?;
    program_state(engine, p.decls.clone(), program, p.side_conditions.clone())
}

fn intro_assignment(engine: &TacticEngine, p: &ProgramState, inv: &TacticInvocation) -> Outcome {
    let (path, node) = target_unknown(&p.program, inv)?;
    let env = p.decls.env();
    let targets = parse_targets(&inv.require("targets")?, &env).map_err(|e| bad_param("targets", e))?;
    if let Some(t) = targets.iter().find(|t| !p.decls.is_var(t.name())) {
        return Err(bad_param("targets", format!("{} is a constant", t.name())));
    }
    let mut exprs = Vec::new();
    for item in inv.items("exprs").unwrap_or_default() {
        exprs.push(parse_formula(&item, &env).map_err(|e| bad_param("exprs", e))?);
    }
    crate::program::check_assignment(&targets, &exprs).map_err(|e| bad_param("exprs", e))?;
    let new = AnnotatedProgram::new(node.pre, node.post, Construct::Assign { targets, exprs });
    let program = replace(&p.program, &path, new)?;
    program_state(engine, p.decls.clone(), program, p.side_conditions.clone())
}

fn intro_composition(engine: &TacticEngine, p: &ProgramState, inv: &TacticInvocation) -> Outcome {
    let (path, node) = target_unknown(&p.program, inv)?;
    let mid = parse_bool_param(inv, "mid", &p.decls.env())?;
    no_metas(&mid)?;
    let t1 = fresh_tag(&p.program, &[]);
    let t2 = fresh_tag(&p.program, &[t1.clone()]);
    let new = AnnotatedProgram::new(
        node.pre.clone(),
        node.post.clone(),
        Construct::Composition(vec![
            AnnotatedProgram::unknown(node.pre, mid.clone(), t1),
            AnnotatedProgram::unknown(mid, node.post, t2),
        ]),
    );
    let program = replace(&p.program, &path, new)?;
    program_state(engine, p.decls.clone(), program, p.side_conditions.clone())
}

fn strengthen(engine: &TacticEngine, p: &ProgramState, inv: &TacticInvocation) -> Outcome {
    let decl = decls_param(inv, "decl")?;
    let [(name, sort)] = decl.as_slice() else {
        return Err(bad_param("decl", "declare exactly one variable"));
    };
    if p.decls.contains(name) {
        return Err(TacticError::NameClash(name.clone()));
    }
    let mut decls = p.decls.clone();
    decls.vars.push((name.clone(), sort.clone()));
    let new_inv = parse_bool_param(inv, "inv", &decls.env())?;
    no_metas(&new_inv)?;

    let path = match node_path(inv)? {
        Some(path) => path,
        None if matches!(p.program.body, Construct::Unknown(_)) => NodePath::root(),
        None => p
            .program
            .nodes()
            .into_iter()
            .find(|(_, n)| matches!(n.body, Construct::While { .. }))
            .map(|(path, _)| path)
            .ok_or_else(|| TacticError::Inapplicable("no loop to strengthen".into()))?,
    };
    let node = p.program.node(&path).ok_or_else(|| TacticError::InvalidPath(path.to_string()))?.clone();
    let program = match &node.body {
        Construct::Unknown(tag) if path == NodePath::root() => {
            AnnotatedProgram::unknown(node.pre.clone(), Expr::and(node.post.clone(), new_inv), tag.clone())
        }
        Construct::While { invariants, bound, guard, body } => {
            let old_i = Expr::conj(invariants.iter().cloned());
            let mut invs = invariants.clone();
            invs.push(new_inv);
            let i = Expr::conj(invs.iter().cloned());
            let body_tag = match &body.body {
                Construct::Unknown(t) => t.clone(),
                _ => fresh_tag(&p.program, &[]),
            };
            let new_body = AnnotatedProgram::unknown(loop_body_pre(&invs, guard), i.clone(), body_tag.clone());
            // The preceding initialisation must now establish the new invariant too.
            let init = path.parent().and_then(|parent| {
                let k = *path.0.last()?;
                let par = p.program.node(&parent)?;
                match &par.body {
                    Construct::Composition(cs) if k > 0 && cs[k - 1].post == old_i => Some((parent.child(k - 1), cs[k - 1].clone())),
                    _ => None,
                }
            });
            let lp_pre = if init.is_some() { i.clone() } else { node.pre.clone() };
            let lp = AnnotatedProgram::new(
                lp_pre,
                node.post.clone(),
                Construct::While {
                    invariants: invs,
                    bound: bound.clone(),
                    guard: guard.clone(),
                    body: Box::new(new_body),
                },
            );
            let mut program = replace(&p.program, &path, lp)?;
            if let Some((ipath, old)) = init {
                let tag = match &old.body {
                    Construct::Unknown(t) => t.clone(),
                    _ => fresh_tag(&program, &[body_tag]),
                };
                program = replace(&program, &ipath, AnnotatedProgram::unknown(old.pre, i, tag))?;
            }
            program
        }
        other => {
            return Err(TacticError::Inapplicable(format!(
                "node {path} is a {}; expected a loop or the specification",
                other.kind()
            )))
        }
    };
    program_state(engine, decls, program, p.side_conditions.clone())
}

fn stmt_targets(s: &Stmt, out: &mut Vec<String>) {
    match s {
        Stmt::Skip => {}
        Stmt::Assign(ts, _) => out.extend(ts.iter().map(|t| t.name().to_string())),
        Stmt::Seq(items) => items.iter().for_each(|i| stmt_targets(i, out)),
        Stmt::If(bs) => bs.iter().for_each(|(_, b)| stmt_targets(b, out)),
        Stmt::Do(_, b) => stmt_targets(b, out),
    }
}

fn has_loop(s: &Stmt) -> bool {
    match s {
        Stmt::Do(..) => true,
        Stmt::Seq(items) => items.iter().any(has_loop),
        Stmt::If(bs) => bs.iter().any(|(_, b)| has_loop(b)),
        _ => false,
    }
}

fn guess_program(engine: &TacticEngine, p: &ProgramState, inv: &TacticInvocation) -> Outcome {
    let (path, node) = target_unknown(&p.program, inv)?;
    let stmt = parse_stmt(&inv.require("prog")?, &p.decls.env()).map_err(|e| bad_param("prog", e))?;
    if has_loop(&stmt) {
        return Err(TacticError::Inapplicable("guessProgram accepts loop-free programs only".into()));
    }
    let mut targets = Vec::new();
    stmt_targets(&stmt, &mut targets);
    if let Some(t) = targets.iter().find(|t| !p.decls.is_var(t)) {
        return Err(bad_param("prog", format!("{t} is a constant")));
    }
    let new = annotate(&stmt, &node.pre, &node.post).map_err(|e| TacticError::Inapplicable(e.to_string()))?;
    let program = replace(&p.program, &path, new)?;
    program_state(engine, p.decls.clone(), program, p.side_conditions.clone())
}
