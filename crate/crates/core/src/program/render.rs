use super::{conjunct_name, AnnotatedProgram, AnnotationView, Construct, NodePath, SlotKind, Stmt, Target};
use crate::formula::Expr;

fn assignment(targets: &[Target], exprs: &[Expr]) -> String {
    let ts: Vec<String> = targets.iter().map(|t| t.to_string()).collect();
    let es: Vec<String> = exprs.iter().map(|e| e.to_string()).collect();
    format!("{} := {}", ts.join(", "), es.join(", "))
}

/// Annotated program text, one item per line. With a view, only its
/// visible annotations are printed.
pub fn render_program(p: &AnnotatedProgram, view: Option<&AnnotationView>) -> String {
    let mut out = Vec::new();
    node(p, &NodePath::root(), 0, view, &mut out);
    out.join("\n")
}

fn node(p: &AnnotatedProgram, path: &NodePath, depth: usize, view: Option<&AnnotationView>, out: &mut Vec<String>) {
    let pad = "  ".repeat(depth);
    let show = |kind| view.is_none_or(|v| v.is_visible(path, kind));
    if show(SlotKind::Pre) {
        out.push(format!("{pad}{{ {} }}", p.pre));
    }
    match &p.body {
        Construct::Skip => out.push(format!("{pad}skip")),
        Construct::Unknown(tag) => out.push(format!("{pad}UnkProg {tag}")),
        Construct::Assign { targets, exprs } => out.push(format!("{pad}{}", assignment(targets, exprs))),
        Construct::Composition(cs) => {
            for (k, c) in cs.iter().enumerate() {
                if k > 0 {
                    out.push(format!("{pad};"));
                }
                node(c, &path.child(k), depth, view, out);
            }
        }
        Construct::If(bs) => {
            for (k, (g, b)) in bs.iter().enumerate() {
                let kw = if k == 0 { "if" } else { "[]" };
                out.push(format!("{pad}{kw} {g} →"));
                node(b, &path.child(k), depth + 1, view, out);
            }
            out.push(format!("{pad}fi"));
        }
        Construct::While { invariants, bound, guard, body } => {
            for (k, inv) in invariants.iter().enumerate() {
                out.push(format!("{pad}{{ invariant {}: {} }}", conjunct_name(k), inv));
            }
            if let Some(t) = bound {
                out.push(format!("{pad}{{ bound: {t} }}"));
            }
            out.push(format!("{pad}do {guard} →"));
            node(body, &path.child(0), depth + 1, view, out);
            out.push(format!("{pad}od"));
        }
    }
    if show(SlotKind::Post) {
        out.push(format!("{pad}{{ {} }}", p.post));
    }
}

/// Single-line program text accepted by the program parser.
pub fn render_stmt(s: &Stmt) -> String {
    match s {
        Stmt::Skip => "skip".into(),
        Stmt::Assign(ts, es) => assignment(ts, es),
        Stmt::Seq(items) => items.iter().map(render_stmt).collect::<Vec<_>>().join("; "),
        Stmt::If(bs) => {
            let parts: Vec<String> = bs.iter().map(|(g, b)| format!("{g} → {}", render_stmt(b))).collect();
            format!("if {} fi", parts.join(" [] "))
        }
        Stmt::Do(g, b) => format!("do {g} → {} od", render_stmt(b)),
    }
}
