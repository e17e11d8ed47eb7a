//! JSON over HTTP, transport-free: [`Api::handle`] takes a method, a
//! request target and a body and returns a status and a JSON value. The
//! server binary forwards requests here.
//!
//! | method | path | body |
//! |---|---|---|
//! | POST | `/sessions` | |
//! | GET | `/sessions` | |
//! | GET | `/sessions/{id}/tree` | |
//! | GET | `/sessions/{id}/node/{n}?view=full\|minimal` | |
//! | POST | `/sessions/{id}/tactic` | `{"tactic": "...", "node": n?}` |
//! | POST | `/sessions/{id}/navigate` | `{"node": n}` |
//! | GET | `/sessions/{id}/tactics` | |
//! | GET | `/sessions/{id}/obligations/{label}?node=n` | |
//! | GET | `/sessions/{id}/document` | |
//! | POST | `/sessions/{id}/save` | `{"path": "..."}` |
//! | POST | `/sessions/{id}/load` | `{"path": "..."}` or `{"document": {...}}`, `"trust": bool?` |
//!
//! Errors are `{"error": {"kind": ..., "message": ...}}` with 400 for
//! malformed requests and tactic text that does not parse or validate, 404
//! for unknown sessions, nodes and routes, 409 when the session is busy and
//! 422 when a well-formed tactic does not apply.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use percent_encoding::percent_decode_str;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::formula::{pretty_print, Expr, PrintMode};
use crate::program::{
    conjunct_name, full_annotations, minimal_annotations, AnnotatedProgram, AnnotationView, Construct, NodePath,
    SlotKind,
};
use crate::session::{Session, SessionError};
use crate::solver::Prover;
use crate::tactic::{registry, DerivationState, Frame, TacticError};
use crate::tree::{Document, NodeId, TreeError};
use crate::wp::{ProofObligation, Status};

#[derive(Clone, Debug, PartialEq)]
pub struct Response {
    pub status: u16,
    pub body: Value,
}

impl Response {
    fn ok(body: Value) -> Self {
        Response { status: 200, body }
    }

    fn error(status: u16, kind: &str, message: impl std::fmt::Display) -> Self {
        Response {
            status,
            body: json!({"error": {"kind": kind, "message": message.to_string()}}),
        }
    }
}

pub struct Api {
    sessions: Mutex<BTreeMap<String, Arc<RwLock<Session>>>>,
    backend: Arc<dyn Prover>,
    next: AtomicU64,
}

#[derive(Deserialize)]
struct TacticRequest {
    tactic: String,
    node: Option<NodeId>,
}

#[derive(Deserialize)]
struct NavigateRequest {
    node: NodeId,
}

#[derive(Deserialize)]
struct SaveRequest {
    path: String,
}

#[derive(Deserialize)]
struct LoadRequest {
    path: Option<String>,
    document: Option<Document>,
    #[serde(default)]
    trust: bool,
}

pub fn tactic_error_kind(e: &TacticError) -> &'static str {
    match e {
        TacticError::UnknownTactic(_) => "unknown-tactic",
        TacticError::ParamValidation { .. } => "param-validation",
        TacticError::MissingParam(_) => "missing-param",
        TacticError::Syntax { .. } => "syntax",
        TacticError::WrongMode { .. } => "wrong-mode",
        TacticError::Inapplicable(_) => "inapplicable",
        TacticError::SideConditionFailed { .. } => "side-condition-failed",
        TacticError::NameClash(_) => "name-clash",
        TacticError::ConstNotPresent(_) => "const-not-present",
        TacticError::NotAConjunction => "not-a-conjunction",
        TacticError::NoSuchObligation(_) => "no-such-obligation",
        TacticError::InvalidPath(_) => "invalid-path",
        TacticError::UnboundMetaVar(_) => "unbound-metavariable",
        TacticError::ChainBroken(_) => "chain-broken",
        TacticError::MetaVarNotAllowed => "metavariable-not-allowed",
        TacticError::Sort(_) => "sort",
    }
}

fn session_error(e: SessionError) -> Response {
    match &e {
        SessionError::Tree(TreeError::UnknownNode(_)) => Response::error(404, "unknown-node", e),
        SessionError::Tree(TreeError::Format(_)) => Response::error(400, "format", e),
        SessionError::Tree(TreeError::ReplayMismatch { .. }) => Response::error(422, "replay-mismatch", e),
        SessionError::Io { .. } => Response::error(400, "io", e),
        SessionError::Command(_) => Response::error(400, "command", e),
        _ => {
            let t = e.tactic_error().expect("remaining variants carry a tactic error");
            let status = match t {
                TacticError::Syntax { .. }
                | TacticError::UnknownTactic(_)
                | TacticError::MissingParam(_)
                | TacticError::ParamValidation { .. } => 400,
                _ => 422,
            };
            let mut r = Response::error(status, tactic_error_kind(t), t);
            if let TacticError::ParamValidation { param, .. } = t {
                r.body["error"]["param"] = json!(param);
            }
            if let TacticError::SideConditionFailed { status: Status::Invalid(m), .. } = t {
                r.body["error"]["counterexample"] = counterexample(m);
            }
            r
        }
    }
}

fn counterexample(m: &crate::solver::State) -> Value {
    Value::Object(m.iter().map(|(k, v)| (k.clone(), json!(v.to_string()))).collect())
}

fn formula(e: &Expr) -> Value {
    let r = pretty_print(e, PrintMode::Selection);
    json!({
        "text": r.text,
        "anchors": r.anchors.iter().map(|a| json!({"path": a.path.to_string(), "start": a.start, "end": a.end})).collect::<Vec<_>>(),
    })
}

pub fn obligation_json(o: &ProofObligation) -> Value {
    let mut v = json!({
        "label": o.label,
        "origin": o.origin.to_string(),
        "hypotheses": o.hypotheses.iter().map(|h| h.to_string()).collect::<Vec<_>>(),
        "goal": o.goal.to_string(),
        "status": match &o.status {
            Status::Open => "open",
            Status::Valid => "valid",
            Status::Invalid(_) => "invalid",
            Status::Unknown(_) => "unknown",
        },
        "checkable": o.is_checkable(),
    });
    match &o.status {
        Status::Invalid(m) => v["counterexample"] = counterexample(m),
        Status::Unknown(r) => v["reason"] = json!(r),
        _ => {}
    }
    v
}

/// Nested layout of a program for display. Annotations not visible in
/// `view` are omitted.
pub fn program_layout(p: &AnnotatedProgram, view: &AnnotationView) -> Value {
    block(p, &NodePath::root(), view)
}

fn block(p: &AnnotatedProgram, path: &NodePath, view: &AnnotationView) -> Value {
    let mut b = json!({"path": path.to_string(), "kind": p.body.kind()});
    if view.is_visible(path, SlotKind::Pre) {
        b["pre"] = json!(p.pre.to_string());
    }
    if view.is_visible(path, SlotKind::Post) {
        b["post"] = json!(p.post.to_string());
    }
    let children: Vec<Value> = match &p.body {
        Construct::Skip => {
            b["text"] = json!("skip");
            vec![]
        }
        Construct::Unknown(tag) => {
            b["text"] = json!(format!("UnkProg {tag}"));
            b["tag"] = json!(tag);
            vec![]
        }
        Construct::Assign { targets, exprs } => {
            let ts: Vec<String> = targets.iter().map(|t| t.to_string()).collect();
            let es: Vec<String> = exprs.iter().map(|e| e.to_string()).collect();
            b["text"] = json!(format!("{} := {}", ts.join(", "), es.join(", ")));
            vec![]
        }
        Construct::Composition(cs) => cs.iter().enumerate().map(|(k, c)| block(c, &path.child(k), view)).collect(),
        Construct::If(bs) => bs
            .iter()
            .enumerate()
            .map(|(k, (g, c))| {
                let mut cb = block(c, &path.child(k), view);
                cb["guard"] = json!(g.to_string());
                cb
            })
            .collect(),
        Construct::While { invariants, bound, guard, body } => {
            b["guard"] = json!(guard.to_string());
            b["invariants"] = json!(invariants
                .iter()
                .enumerate()
                .map(|(k, i)| json!({"name": conjunct_name(k), "formula": i.to_string()}))
                .collect::<Vec<_>>());
            if let Some(t) = bound {
                b["bound"] = json!(t.to_string());
            }
            vec![block(body, &path.child(0), view)]
        }
    };
    b["children"] = json!(children);
    b
}

fn frame_json(k: usize, f: &Frame) -> Value {
    json!({
        "index": k,
        "polarity": f.polarity,
        "focus": f.focus.as_ref().map(|p| p.to_string()),
        "assumptions": f.assumptions.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
        "start": formula(&f.start),
        "current": formula(f.current()),
        "steps": f.steps.iter().map(|s| json!({
            "relation": s.relation.symbol(),
            "formula": formula(&s.formula),
            "tactic": s.tactic,
            "checks": s.checks.iter().map(obligation_json).collect::<Vec<_>>(),
        })).collect::<Vec<_>>(),
    })
}

pub fn node_view(s: &Session, id: NodeId, minimal: bool) -> Result<Value, TreeError> {
    let tree = s.tree();
    let node = tree.node(id)?;
    let state = &node.state;
    let mut v = json!({
        "id": id,
        "active": tree.active() == id,
        "mode": state.mode(),
        "tactic": tree.tactic_text(id),
        "complete": state.is_complete(),
    });
    if let Some(p) = state.program_state() {
        let view = if minimal {
            minimal_annotations(&p.program)
        } else {
            full_annotations(&p.program)
        };
        v["view"] = json!(view.mode);
        v["declarations"] = json!({
            "consts": p.decls.consts.iter().map(|(n, s)| json!({"name": n, "sort": s.to_string()})).collect::<Vec<_>>(),
            "vars": p.decls.vars.iter().map(|(n, s)| json!({"name": n, "sort": s.to_string()})).collect::<Vec<_>>(),
        });
        v["program"] = program_layout(&p.program, &view);
        v["obligations"] = json!(p.obligations.iter().map(obligation_json).collect::<Vec<_>>());
        v["side_conditions"] = json!(p.side_conditions.iter().map(obligation_json).collect::<Vec<_>>());
    }
    if let DerivationState::Formula(f) = &**state {
        v["calculation"] = json!({
            "obligation": f.obligation,
            "origin": f.origin.to_string(),
            "frames": f.frames.iter().enumerate().map(|(k, fr)| frame_json(k, fr)).collect::<Vec<_>>(),
        });
    }
    Ok(v)
}

pub fn tree_json(s: &Session) -> Value {
    let tree = s.tree();
    json!({
        "active": tree.active(),
        "active_path": tree.active_path_view(),
        "nodes": tree.nodes().iter().map(|n| json!({
            "id": n.id,
            "parent": n.parent,
            "children": n.children,
            "tactic": tree.tactic_text(n.id),
            "tick": n.tick,
            "mode": n.state.mode(),
        })).collect::<Vec<_>>(),
    })
}

/// Tree plus the rendering of the active node, returned by mutations.
fn tree_with_view(s: &Session) -> Value {
    let mut v = tree_json(s);
    v["view"] = node_view(s, s.tree().active(), false).expect("active node exists");
    v
}

fn parse_body<'a, T: Deserialize<'a>>(body: &'a str) -> Result<T, Response> {
    serde_json::from_str(body).map_err(|e| Response::error(400, "bad-request", e))
}

fn query_map(q: &str) -> BTreeMap<String, String> {
    q.split('&')
        .filter(|kv| !kv.is_empty())
        .map(|kv| {
            let (k, v) = kv.split_once('=').unwrap_or((kv, ""));
            let dec = |s: &str| percent_decode_str(&s.replace('+', " ")).decode_utf8_lossy().into_owned();
            (dec(k), dec(v))
        })
        .collect()
}

impl Api {
    pub fn new(backend: Arc<dyn Prover>) -> Self {
        Api {
            sessions: Mutex::new(BTreeMap::new()),
            backend,
            next: AtomicU64::new(1),
        }
    }

    pub fn create_session(&self) -> String {
        let id = format!("s{}", self.next.fetch_add(1, Ordering::SeqCst));
        let s = Session::new(id.clone(), self.backend.clone());
        self.sessions.lock().expect("session table").insert(id.clone(), Arc::new(RwLock::new(s)));
        id
    }

    pub fn session(&self, id: &str) -> Option<Arc<RwLock<Session>>> {
        self.sessions.lock().expect("session table").get(id).cloned()
    }

    /// `target` is the request path with an optional `?query`.
    pub fn handle(&self, method: &str, target: &str, body: &str) -> Response {
        let (path, query) = target.split_once('?').unwrap_or((target, ""));
        let query = query_map(query);
        let segs: Vec<String> = path
            .split('/')
            .filter(|s| !s.is_empty())
            .map(|s| percent_decode_str(s).decode_utf8_lossy().into_owned())
            .collect();
        let segs: Vec<&str> = segs.iter().map(String::as_str).collect();
        match (method, segs.as_slice()) {
            ("POST", ["sessions"]) => {
                let id = self.create_session();
                Response {
                    status: 201,
                    body: json!({"id": id, "active": 0}),
                }
            }
            ("GET", ["sessions"]) => {
                let ids: Vec<String> = self.sessions.lock().expect("session table").keys().cloned().collect();
                Response::ok(json!({"sessions": ids}))
            }
            (_, ["sessions", id, rest @ ..]) => {
                let Some(s) = self.session(id) else {
                    return Response::error(404, "unknown-session", format!("no session {id}"));
                };
                self.session_route(&s, method, rest, &query, body)
            }
            _ => Response::error(404, "unknown-route", format!("{method} {path}")),
        }
    }

    fn session_route(
        &self,
        s: &RwLock<Session>,
        method: &str,
        rest: &[&str],
        query: &BTreeMap<String, String>,
        body: &str,
    ) -> Response {
        let busy = || Response::error(409, "busy", "the session is processing another request");
        let read = || s.try_read().map_err(|_| busy());
        let write = || s.try_write().map_err(|_| busy());
        let run = || -> Result<Response, Response> {
            match (method, rest) {
                ("GET", ["tree"]) => Ok(Response::ok(tree_json(&*read()?))),
                ("GET", ["node", n]) => {
                    let id: NodeId = n.parse().map_err(|_| Response::error(400, "bad-request", "node id must be a number"))?;
                    let minimal = match query.get("view").map(String::as_str) {
                        None | Some("full") => false,
                        Some("minimal") => true,
                        Some(o) => return Err(Response::error(400, "bad-request", format!("unknown view {o:?}"))),
                    };
                    let g = read()?;
                    node_view(&g, id, minimal)
                        .map(Response::ok)
                        .map_err(|e| Response::error(404, "unknown-node", e))
                }
                ("POST", ["tactic"]) => {
                    let req: TacticRequest = parse_body(body)?;
                    let mut g = write()?;
                    let r = match req.node {
                        Some(n) => g.apply_at(n, &req.tactic),
                        None => g.apply_text(&req.tactic),
                    };
                    let (id, applied) = r.map_err(session_error)?;
                    Ok(Response::ok(json!({
                            "node": id,
                            "active_path": g.tree().active_path_view(),
                            "notes": applied.notes,
                            "new_obligations": applied.new_obligations.iter().map(obligation_json).collect::<Vec<_>>(),
                            "view": node_view(&g, id, false).expect("new node"),
                    })))
                }
                ("POST", ["navigate"]) => {
                    let req: NavigateRequest = parse_body(body)?;
                    let mut g = write()?;
                    g.navigate(req.node).map_err(session_error)?;
                    Ok(Response::ok(tree_with_view(&g)))
                }
                ("GET", ["tactics"]) => {
                    let g = read()?;
                    let mode = g.tree().active_state().mode();
                    let tactics: Vec<Value> = registry()
                        .into_iter()
                        .map(|t| {
                            let applicable = t.mode == mode;
                            let mut v = serde_json::to_value(&t).expect("spec serialises");
                            v["applicable"] = json!(applicable);
                            v
                        })
                        .collect();
                    Ok(Response::ok(json!({"mode": mode, "tactics": tactics})))
                }
                ("GET", ["obligations", label]) => {
                    let g = read()?;
                    let id = match query.get("node") {
                        Some(n) => n.parse().map_err(|_| Response::error(400, "bad-request", "node id must be a number"))?,
                        None => g.tree().active(),
                    };
                    let state = g.tree().state(id).map_err(|e| Response::error(404, "unknown-node", e))?;
                    let o = state
                        .program_state()
                        .and_then(|p| p.obligations.iter().chain(&p.side_conditions).find(|o| o.label == *label))
                        .ok_or_else(|| Response::error(404, "no-such-obligation", format!("no obligation {label} at node {id}")))?;
                    Ok(Response::ok(obligation_json(o)))
                }
                ("GET", ["document"]) => {
                    let g = read()?;
                    Ok(Response::ok(serde_json::to_value(g.document()).expect("document serialises")))
                }
                ("POST", ["save"]) => {
                    let req: SaveRequest = parse_body(body)?;
                    let mut g = write()?;
                    g.save(Path::new(&req.path)).map_err(session_error)?;
                    Ok(Response::ok(json!({"saved": req.path})))
                }
                ("POST", ["load"]) => {
                    let req: LoadRequest = parse_body(body)?;
                    let mut g = write()?;
                    match (req.document, req.path) {
                        (Some(doc), _) => g.load_document(&doc, req.trust),
                        (None, Some(p)) => g.load(Path::new(&p), req.trust),
                        (None, None) => return Err(Response::error(400, "bad-request", "give a path or a document")),
                    }
                    .map_err(session_error)?;
                    Ok(Response::ok(tree_with_view(&g)))
                }
                _ => Err(Response::error(404, "unknown-route", format!("{method} /{}", rest.join("/")))),
            }
        };
        run().unwrap_or_else(|e| e)
    }
}
