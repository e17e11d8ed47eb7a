//! Annotated guarded-command programs.
//!
//! Every node carries its own precondition and postcondition. Nodes are
//! addressed by [`NodePath`]: composition components and if-branches by
//! index, a loop body by `0`.

mod parse;
mod render;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::formula::{Env, Expr, Sort};
pub(crate) use parse::check_assignment;
pub use parse::{parse_decls, parse_sort, parse_stmt, parse_targets, ProgramParseError, Stmt};
pub use render::{render_program, render_stmt};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodePath(pub Vec<usize>);

impl NodePath {
    pub fn root() -> Self {
        NodePath(Vec::new())
    }

    pub fn child(&self, i: usize) -> Self {
        let mut v = self.0.clone();
        v.push(i);
        NodePath(v)
    }

    pub fn parent(&self) -> Option<NodePath> {
        let mut v = self.0.clone();
        v.pop().map(|_| NodePath(v))
    }

    pub fn is_prefix_of(&self, other: &NodePath) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl fmt::Display for NodePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ".")?;
            }
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for NodePath {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        crate::formula::parse_path_digits(s).map(NodePath)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Target {
    Var(String, Sort),
    /// `a[index]`; the sort is the array's.
    Elem(String, Sort, Expr),
}

impl Target {
    pub fn name(&self) -> &str {
        match self {
            Target::Var(n, _) | Target::Elem(n, _, _) => n,
        }
    }

    /// Sort of the value assigned.
    pub fn value_sort(&self) -> Sort {
        match self {
            Target::Var(_, s) => s.clone(),
            Target::Elem(_, s, _) => s.element().cloned().unwrap_or(Sort::Int),
        }
    }

    pub fn variable(&self) -> Expr {
        match self {
            Target::Var(n, s) | Target::Elem(n, s, _) => Expr::var(n.clone(), s.clone()),
        }
    }

    /// Whole-variable replacement for `self := value`.
    pub fn replacement(&self, value: Expr) -> Expr {
        match self {
            Target::Var(..) => value,
            Target::Elem(n, s, i) => Expr::update(Expr::var(n.clone(), s.clone()), i.clone(), value),
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Var(n, _) => write!(f, "{n}"),
            Target::Elem(n, _, i) => write!(f, "{n}[{i}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Construct {
    Skip,
    /// Simultaneous assignment.
    Assign { targets: Vec<Target>, exprs: Vec<Expr> },
    Composition(Vec<AnnotatedProgram>),
    If(Vec<(Expr, AnnotatedProgram)>),
    While {
        invariants: Vec<Expr>,
        bound: Option<Expr>,
        guard: Expr,
        body: Box<AnnotatedProgram>,
    },
    /// Placeholder for a fragment not derived yet; specified by the
    /// enclosing pre/post only.
    Unknown(String),
}

impl Construct {
    pub fn kind(&self) -> &'static str {
        match self {
            Construct::Skip => "Skip",
            Construct::Assign { .. } => "Assignment",
            Construct::Composition(_) => "Composition",
            Construct::If(_) => "If",
            Construct::While { .. } => "While",
            Construct::Unknown(_) => "UnkProg",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedProgram {
    pub pre: Expr,
    pub post: Expr,
    pub body: Construct,
}

/// Precondition of a loop body.
pub fn loop_body_pre(invariants: &[Expr], guard: &Expr) -> Expr {
    Expr::and(Expr::conj(invariants.iter().cloned()), guard.clone())
}

/// Precondition of an if-branch.
pub fn branch_pre(pre: &Expr, guard: &Expr) -> Expr {
    Expr::and(pre.clone(), guard.clone())
}

/// Names `P0, P1, ...` used for invariants and postcondition conjuncts.
pub fn conjunct_name(k: usize) -> String {
    format!("P{k}")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnknownSpec {
    pub path: NodePath,
    pub tag: String,
    pub pre: Expr,
    pub post: Expr,
}

impl AnnotatedProgram {
    pub fn new(pre: Expr, post: Expr, body: Construct) -> Self {
        AnnotatedProgram { pre, post, body }
    }

    pub fn unknown(pre: Expr, post: Expr, tag: impl Into<String>) -> Self {
        AnnotatedProgram::new(pre, post, Construct::Unknown(tag.into()))
    }

    /// Direct children with their path components.
    pub fn children(&self) -> Vec<&AnnotatedProgram> {
        match &self.body {
            Construct::Composition(cs) => cs.iter().collect(),
            Construct::If(bs) => bs.iter().map(|(_, b)| b).collect(),
            Construct::While { body, .. } => vec![&**body],
            _ => Vec::new(),
        }
    }

    fn children_mut(&mut self) -> Vec<&mut AnnotatedProgram> {
        match &mut self.body {
            Construct::Composition(cs) => cs.iter_mut().collect(),
            Construct::If(bs) => bs.iter_mut().map(|(_, b)| b).collect(),
            Construct::While { body, .. } => vec![&mut **body],
            _ => Vec::new(),
        }
    }

    pub fn node(&self, path: &NodePath) -> Option<&AnnotatedProgram> {
        let mut cur = self;
        for &i in &path.0 {
            cur = cur.children().into_iter().nth(i)?;
        }
        Some(cur)
    }

    /// Copy with the node at `path` replaced.
    pub fn replace_node(&self, path: &NodePath, new: AnnotatedProgram) -> Option<AnnotatedProgram> {
        let mut out = self.clone();
        let mut cur = &mut out;
        for &i in &path.0 {
            cur = cur.children_mut().into_iter().nth(i)?;
        }
        *cur = new;
        Some(out)
    }

    /// Nodes in document (pre-)order.
    pub fn nodes(&self) -> Vec<(NodePath, &AnnotatedProgram)> {
        fn go<'a>(p: &'a AnnotatedProgram, path: NodePath, out: &mut Vec<(NodePath, &'a AnnotatedProgram)>) {
            out.push((path.clone(), p));
            for (i, c) in p.children().into_iter().enumerate() {
                go(c, path.child(i), out);
            }
        }
        let mut out = Vec::new();
        go(self, NodePath::root(), &mut out);
        out
    }

    /// Nodes on the way from the root to `path`, excluding the target.
    pub fn ancestors(&self, path: &NodePath) -> Option<Vec<(NodePath, &AnnotatedProgram)>> {
        let mut out = Vec::new();
        let mut cur = self;
        let mut here = NodePath::root();
        for &i in &path.0 {
            out.push((here.clone(), cur));
            cur = cur.children().into_iter().nth(i)?;
            here = here.child(i);
        }
        Some(out)
    }

    /// Every expression, annotations included, in document order.
    pub fn exprs(&self) -> Vec<&Expr> {
        let mut out = Vec::new();
        for (_, n) in self.nodes() {
            out.push(&n.pre);
            out.push(&n.post);
            match &n.body {
                Construct::Assign { targets, exprs } => {
                    for t in targets {
                        if let Target::Elem(_, _, i) = t {
                            out.push(i);
                        }
                    }
                    out.extend(exprs.iter());
                }
                Construct::If(bs) => out.extend(bs.iter().map(|(g, _)| g)),
                Construct::While { invariants, bound, guard, .. } => {
                    out.extend(invariants.iter());
                    out.extend(bound.iter());
                    out.push(guard);
                }
                _ => {}
            }
        }
        out
    }

    /// Apply `f` to every expression.
    pub fn map_exprs(&self, f: &mut impl FnMut(&Expr) -> Expr) -> AnnotatedProgram {
        let body = match &self.body {
            Construct::Assign { targets, exprs } => Construct::Assign {
                targets: targets
                    .iter()
                    .map(|t| match t {
                        Target::Elem(n, s, i) => Target::Elem(n.clone(), s.clone(), f(i)),
                        other => other.clone(),
                    })
                    .collect(),
                exprs: exprs.iter().map(&mut *f).collect(),
            },
            Construct::Composition(cs) => Construct::Composition(cs.iter().map(|c| c.map_exprs(f)).collect()),
            Construct::If(bs) => Construct::If(bs.iter().map(|(g, b)| (f(g), b.map_exprs(f))).collect()),
            Construct::While { invariants, bound, guard, body } => Construct::While {
                invariants: invariants.iter().map(&mut *f).collect(),
                bound: bound.as_ref().map(&mut *f),
                guard: f(guard),
                body: Box::new(body.map_exprs(f)),
            },
            other => other.clone(),
        };
        AnnotatedProgram {
            pre: f(&self.pre),
            post: f(&self.post),
            body,
        }
    }

    pub fn has_meta(&self) -> bool {
        self.exprs().into_iter().any(Expr::has_meta)
    }

    pub fn meta_vars(&self) -> BTreeSet<(String, Sort)> {
        self.exprs().into_iter().flat_map(|e| e.meta_vars()).collect()
    }

    pub fn free_vars(&self) -> BTreeSet<(String, Sort)> {
        let mut out: BTreeSet<(String, Sort)> = self.exprs().into_iter().flat_map(|e| e.free_vars()).collect();
        for (_, n) in self.nodes() {
            if let Construct::Assign { targets, .. } = &n.body {
                for t in targets {
                    if let Expr::Var(name, s) = t.variable() {
                        out.insert((name, s));
                    }
                }
            }
        }
        out
    }

    pub fn unknown_tags(&self) -> BTreeSet<String> {
        self.nodes()
            .into_iter()
            .filter_map(|(_, n)| match &n.body {
                Construct::Unknown(t) => Some(t.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn is_loop_free(&self) -> bool {
        self.nodes()
            .iter()
            .all(|(_, n)| !matches!(n.body, Construct::While { .. } | Construct::Unknown(_)))
    }
}

/// All unknown fragments in document order with their local specifications.
pub fn collect_unknowns(p: &AnnotatedProgram) -> Vec<UnknownSpec> {
    p.nodes()
        .into_iter()
        .filter_map(|(path, n)| match &n.body {
            Construct::Unknown(tag) => Some(UnknownSpec {
                path,
                tag: tag.clone(),
                pre: n.pre.clone(),
                post: n.post.clone(),
            }),
            _ => None,
        })
        .collect()
}

/// Smallest `S{k}` tag not used in `p`.
pub fn fresh_tag(p: &AnnotatedProgram, also: &[String]) -> String {
    let used = p.unknown_tags();
    (0..)
        .map(|k| format!("S{k}"))
        .find(|t| !used.contains(t) && !also.contains(t))
        .expect("unbounded")
}

/// Constants and variables of a derivation.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Declarations {
    pub consts: Vec<(String, Sort)>,
    pub vars: Vec<(String, Sort)>,
}

impl Declarations {
    pub fn all(&self) -> impl Iterator<Item = &(String, Sort)> {
        self.consts.iter().chain(self.vars.iter())
    }

    pub fn sort_of(&self, name: &str) -> Option<&Sort> {
        self.all().find(|(n, _)| n == name).map(|(_, s)| s)
    }

    pub fn is_var(&self, name: &str) -> bool {
        self.vars.iter().any(|(n, _)| n == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.sort_of(name).is_some()
    }

    pub fn env(&self) -> Env {
        self.all()
            .fold(Env::new(), |env, (n, s)| env.with_var(n, s.clone()))
    }

    pub fn names(&self) -> BTreeSet<String> {
        self.all().map(|(n, _)| n.clone()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rule {
    AnnotationSort,
    CompositionEmpty,
    CompositionPre,
    CompositionPost,
    AdjacencyMismatch,
    IfEmpty,
    GuardSort,
    BranchPre,
    BranchPost,
    LoopBodyPre,
    LoopBodyPost,
    InvariantSort,
    BoundSort,
    AssignArity,
    DuplicateTarget,
    AssignSort,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Node at which the rule failed.
    pub path: NodePath,
    /// The other node involved, when the rule relates two nodes.
    pub related: Option<NodePath>,
    pub rule: Rule,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:?}: {}", self.path, self.rule, self.detail)
    }
}

/// Structural invariants of annotated programs. Empty iff well-formed.
///
/// A loop's own postcondition is not required to be `invariants ∧ ¬guard`;
/// the exit obligation relates the two instead.
pub fn check_wellformed(p: &AnnotatedProgram) -> Vec<Violation> {
    let mut out = Vec::new();
    for (path, n) in p.nodes() {
        check_node(&path, n, &mut out);
    }
    out
}

fn is_bool(e: &Expr) -> bool {
    matches!(e.check_sort(), Ok(Sort::Bool))
}

fn check_node(path: &NodePath, n: &AnnotatedProgram, out: &mut Vec<Violation>) {
    let mut v = |path: NodePath, related: Option<NodePath>, rule: Rule, detail: String| {
        out.push(Violation {
            path,
            related,
            rule,
            detail,
        })
    };
    for (what, e) in [("precondition", &n.pre), ("postcondition", &n.post)] {
        if !is_bool(e) {
            v(path.clone(), None, Rule::AnnotationSort, format!("{what} is not a well-sorted Bool"));
        }
    }
    match &n.body {
        Construct::Skip | Construct::Unknown(_) => {}
        Construct::Assign { targets, exprs } => {
            if targets.len() != exprs.len() || targets.is_empty() {
                v(
                    path.clone(),
                    None,
                    Rule::AssignArity,
                    format!("{} targets, {} expressions", targets.len(), exprs.len()),
                );
            }
            let mut seen = BTreeSet::new();
            for t in targets {
                if !seen.insert(t.name().to_string()) {
                    v(path.clone(), None, Rule::DuplicateTarget, format!("{} assigned twice", t.name()));
                }
            }
            for (t, e) in targets.iter().zip(exprs) {
                let ok = match (t, e.check_sort()) {
                    (Target::Elem(_, s, i), Ok(es)) => {
                        s.element() == Some(&es) && matches!(i.check_sort(), Ok(Sort::Int))
                    }
                    (Target::Var(_, s), Ok(es)) => *s == es,
                    (_, Err(_)) => false,
                };
                if !ok {
                    v(path.clone(), None, Rule::AssignSort, format!("{t} := {e}"));
                }
            }
        }
        Construct::Composition(cs) => {
            if cs.is_empty() {
                v(path.clone(), None, Rule::CompositionEmpty, "no components".into());
                return;
            }
            if cs[0].pre != n.pre {
                v(path.child(0), Some(path.clone()), Rule::CompositionPre, "first component's precondition differs".into());
            }
            let last = cs.len() - 1;
            if cs[last].post != n.post {
                v(path.child(last), Some(path.clone()), Rule::CompositionPost, "last component's postcondition differs".into());
            }
            for k in 0..last {
                if cs[k].post != cs[k + 1].pre {
                    v(
                        path.child(k + 1),
                        Some(path.child(k)),
                        Rule::AdjacencyMismatch,
                        format!("post of component {k} differs from pre of component {}", k + 1),
                    );
                }
            }
        }
        Construct::If(bs) => {
            if bs.is_empty() {
                v(path.clone(), None, Rule::IfEmpty, "no branches".into());
            }
            for (k, (g, b)) in bs.iter().enumerate() {
                if !is_bool(g) {
                    v(path.clone(), None, Rule::GuardSort, format!("guard {k} is not Bool"));
                }
                if b.pre != branch_pre(&n.pre, g) {
                    v(path.child(k), Some(path.clone()), Rule::BranchPre, "branch precondition is not pre ∧ guard".into());
                }
                if b.post != n.post {
                    v(path.child(k), Some(path.clone()), Rule::BranchPost, "branch postcondition differs".into());
                }
            }
        }
        Construct::While { invariants, bound, guard, body } => {
            if !is_bool(guard) {
                v(path.clone(), None, Rule::GuardSort, "loop guard is not Bool".into());
            }
            for (k, i) in invariants.iter().enumerate() {
                if !is_bool(i) {
                    v(path.clone(), None, Rule::InvariantSort, format!("invariant P{k} is not Bool"));
                }
            }
            if let Some(t) = bound {
                if !matches!(t.check_sort(), Ok(Sort::Int)) {
                    v(path.clone(), None, Rule::BoundSort, "bound is not Int".into());
                }
            }
            if body.pre != loop_body_pre(invariants, guard) {
                v(path.child(0), Some(path.clone()), Rule::LoopBodyPre, "body precondition is not invariant ∧ guard".into());
            }
            if body.post != Expr::conj(invariants.iter().cloned()) {
                v(path.child(0), Some(path.clone()), Rule::LoopBodyPost, "body postcondition is not the invariant".into());
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SlotKind {
    Pre,
    Post,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Slot {
    pub path: NodePath,
    pub kind: SlotKind,
}

impl Slot {
    pub fn pre(path: NodePath) -> Self {
        Slot { path, kind: SlotKind::Pre }
    }

    pub fn post(path: NodePath) -> Self {
        Slot { path, kind: SlotKind::Post }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ViewMode {
    Full,
    Minimal,
}

/// Which annotations are displayed. The program shape is kept with every
/// annotation erased; only the visible ones are stored separately.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationView {
    pub mode: ViewMode,
    pub visible: BTreeSet<Slot>,
    pub annotations: BTreeMap<Slot, Expr>,
    pub shape: AnnotatedProgram,
}

impl AnnotationView {
    pub fn is_visible(&self, path: &NodePath, kind: SlotKind) -> bool {
        self.visible.contains(&Slot { path: path.clone(), kind })
    }
}

fn erase(p: &AnnotatedProgram) -> AnnotatedProgram {
    let mut shape = p.clone();
    let paths: Vec<NodePath> = p.nodes().into_iter().map(|(path, _)| path).collect();
    for path in paths {
        let n = shape.node(&path).expect("path from nodes()").clone();
        shape = shape
            .replace_node(
                &path,
                AnnotatedProgram {
                    pre: Expr::Bool(true),
                    post: Expr::Bool(true),
                    body: n.body,
                },
            )
            .expect("path from nodes()");
    }
    shape
}

fn view_with(p: &AnnotatedProgram, mode: ViewMode, visible: BTreeSet<Slot>) -> AnnotationView {
    let annotations = visible
        .iter()
        .map(|s| {
            let n = p.node(&s.path).expect("visible slot addresses a node");
            let e = match s.kind {
                SlotKind::Pre => n.pre.clone(),
                SlotKind::Post => n.post.clone(),
            };
            (s.clone(), e)
        })
        .collect();
    AnnotationView {
        mode,
        visible,
        annotations,
        shape: erase(p),
    }
}

pub fn full_annotations(p: &AnnotatedProgram) -> AnnotationView {
    let visible = p
        .nodes()
        .into_iter()
        .flat_map(|(path, _)| [Slot::pre(path.clone()), Slot::post(path)])
        .collect();
    view_with(p, ViewMode::Full, visible)
}

/// Outermost pre/post, loop invariants (part of the loop itself) and
/// composition intermediate assertions. An intermediate assertion directly
/// before a loop is hidden when it is exactly the loop's invariant.
pub fn minimal_annotations(p: &AnnotatedProgram) -> AnnotationView {
    let mut visible = BTreeSet::new();
    visible.insert(Slot::pre(NodePath::root()));
    visible.insert(Slot::post(NodePath::root()));
    for (path, n) in p.nodes() {
        if let Construct::Composition(cs) = &n.body {
            for k in 0..cs.len().saturating_sub(1) {
                let implied = match &cs[k + 1].body {
                    Construct::While { invariants, .. } => cs[k].post == Expr::conj(invariants.iter().cloned()),
                    _ => false,
                };
                if !implied {
                    visible.insert(Slot::post(path.child(k)));
                }
            }
        }
    }
    view_with(p, ViewMode::Minimal, visible)
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("annotation {kind:?} at {path} cannot be inferred")]
pub struct ReconstructError {
    pub path: NodePath,
    pub kind: SlotKind,
}

/// Recompute every annotation of the view's shape from the visible ones,
/// propagating structurally from the root.
pub fn reconstruct_annotations(view: &AnnotationView) -> Result<AnnotatedProgram, ReconstructError> {
    fill(&view.shape, &NodePath::root(), None, None, &view.annotations)
}

fn fill(
    shape: &AnnotatedProgram,
    path: &NodePath,
    pre: Option<Expr>,
    post: Option<Expr>,
    ann: &BTreeMap<Slot, Expr>,
) -> Result<AnnotatedProgram, ReconstructError> {
    let pick = |kind: SlotKind, inherited: Option<Expr>| {
        ann.get(&Slot { path: path.clone(), kind })
            .cloned()
            .or(inherited)
            .ok_or(ReconstructError { path: path.clone(), kind })
    };
    let pre = pick(SlotKind::Pre, pre)?;
    let post = pick(SlotKind::Post, post)?;
    let body = match &shape.body {
        Construct::Composition(cs) => {
            let mut out = Vec::with_capacity(cs.len());
            let mut prev = pre.clone();
            for (k, c) in cs.iter().enumerate() {
                let child_post = if k + 1 == cs.len() {
                    Some(post.clone())
                } else {
                    match &cs[k + 1].body {
                        Construct::While { invariants, .. } => Some(Expr::conj(invariants.iter().cloned())),
                        _ => None,
                    }
                };
                let filled = fill(c, &path.child(k), Some(prev), child_post, ann)?;
                prev = filled.post.clone();
                out.push(filled);
            }
            Construct::Composition(out)
        }
        Construct::If(bs) => Construct::If(
            bs.iter()
                .enumerate()
                .map(|(k, (g, b))| {
                    fill(b, &path.child(k), Some(branch_pre(&pre, g)), Some(post.clone()), ann).map(|b| (g.clone(), b))
                })
                .collect::<Result<_, _>>()?,
        ),
        Construct::While { invariants, bound, guard, body } => Construct::While {
            invariants: invariants.clone(),
            bound: bound.clone(),
            guard: guard.clone(),
            body: Box::new(fill(
                body,
                &path.child(0),
                Some(loop_body_pre(invariants, guard)),
                Some(Expr::conj(invariants.iter().cloned())),
                ann,
            )?),
        },
        other => other.clone(),
    };
    Ok(AnnotatedProgram { pre, post, body })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> Expr {
        Expr::int_var("x")
    }

    fn assign(pre: Expr, post: Expr, e: Expr) -> AnnotatedProgram {
        AnnotatedProgram::new(
            pre,
            post,
            Construct::Assign {
                targets: vec![Target::Var("x".into(), Sort::Int)],
                exprs: vec![e],
            },
        )
    }

    #[test]
    fn paths_display_and_parse() {
        let p = NodePath(vec![1, 0]);
        assert_eq!(p.to_string(), "@1.0");
        assert_eq!("@1.0".parse::<NodePath>().unwrap(), p);
        assert_eq!("@".parse::<NodePath>().unwrap(), NodePath::root());
    }

    #[test]
    fn adjacency_mismatch_is_flagged() {
        let a = Expr::lt(x(), Expr::int(1));
        let b = Expr::lt(x(), Expr::int(2));
        let c = Expr::lt(x(), Expr::int(3));
        let p = AnnotatedProgram::new(
            a.clone(),
            c.clone(),
            Construct::Composition(vec![
                assign(a.clone(), b.clone(), x()),
                assign(c.clone(), c.clone(), x()),
            ]),
        );
        let v = check_wellformed(&p);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, Rule::AdjacencyMismatch);
        assert_eq!(v[0].path, NodePath(vec![1]));
    }

    #[test]
    fn skip_program_shows_outer_spec_only() {
        let p = AnnotatedProgram::new(Expr::Bool(true), Expr::Bool(true), Construct::Skip);
        let view = minimal_annotations(&p);
        assert_eq!(view.visible.len(), 2);
        assert_eq!(reconstruct_annotations(&view).unwrap(), p);
    }

    #[test]
    fn replace_node_keeps_rest() {
        let a = Expr::lt(x(), Expr::int(1));
        let p = AnnotatedProgram::new(
            a.clone(),
            a.clone(),
            Construct::Composition(vec![AnnotatedProgram::unknown(a.clone(), a.clone(), "S0")]),
        );
        let q = p.replace_node(&NodePath(vec![0]), assign(a.clone(), a.clone(), x())).unwrap();
        assert!(collect_unknowns(&q).is_empty());
        assert_eq!(collect_unknowns(&p).len(), 1);
        assert!(p.replace_node(&NodePath(vec![3]), p.clone()).is_none());
    }
}
