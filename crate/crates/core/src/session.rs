//! A derivation session: a tree, a prover that records every verdict, and
//! the line-oriented command language used by the REPL and script files.
//!
//! Commands:
//!
//! ```text
//! <tactic>                 apply at the active node, e.g. simplifyAuto{}
//! :expect-fail <tactic>    the tactic must fail; nothing changes
//! :nav <id>                make node <id> active
//! :tree                    outline of the tree
//! :show [full|minimal]     program of the active node
//! :state                   full text of the active state
//! :obligations             obligations of the active node
//! :save <file> / :load <file>
//! :quit
//! # comment
//! ```

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use crate::program::{full_annotations, minimal_annotations, render_program};
use crate::solver::{CheckRecord, Prover, RecordedProver, RecordingProver};
use crate::tactic::{parse_tactic, render_obligation, render_state, Applied, TacticEngine, TacticError};
use crate::tree::{DerivationTree, Document, NodeId, TreeError};

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error(transparent)]
    Tactic(#[from] TacticError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("{0}")]
    Command(String),
    #[error("{path}: {error}")]
    Io { path: String, error: std::io::Error },
}

impl SessionError {
    /// The tactic failure behind this error, if any.
    pub fn tactic_error(&self) -> Option<&TacticError> {
        match self {
            SessionError::Tactic(e) | SessionError::Tree(TreeError::Tactic { error: e, .. }) => Some(e),
            _ => None,
        }
    }
}

pub struct Session {
    pub id: String,
    tree: DerivationTree,
    recorder: Arc<RecordingProver>,
    engine: TacticEngine,
    backend: Arc<dyn Prover>,
    dirty: bool,
}

/// Result of one command.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Reply {
    pub text: String,
    pub quit: bool,
}

impl Reply {
    fn text(text: impl Into<String>) -> Self {
        Reply {
            text: text.into(),
            quit: false,
        }
    }
}

impl Session {
    pub fn new(id: impl Into<String>, backend: Arc<dyn Prover>) -> Self {
        let recorder = Arc::new(RecordingProver::new(backend.clone()));
        Session {
            id: id.into(),
            tree: DerivationTree::new(),
            engine: TacticEngine::new(recorder.clone()),
            recorder,
            backend,
            dirty: false,
        }
    }

    pub fn tree(&self) -> &DerivationTree {
        &self.tree
    }

    pub fn engine(&self) -> &TacticEngine {
        &self.engine
    }

    pub fn is_dirty(&self) -> bool {
        self.dirty
    }

    pub fn check_records(&self) -> BTreeMap<String, CheckRecord> {
        self.recorder.records()
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(NodeId, Applied), SessionError> {
        let inv = parse_tactic(text)?;
        let out = self.tree.extend(&self.engine, &inv)?;
        self.dirty = true;
        Ok(out)
    }

    pub fn apply_at(&mut self, at: NodeId, text: &str) -> Result<(NodeId, Applied), SessionError> {
        let inv = parse_tactic(text)?;
        let out = self.tree.extend_at(&self.engine, at, &inv)?;
        self.dirty = true;
        Ok(out)
    }

    pub fn navigate(&mut self, id: NodeId) -> Result<NodeId, SessionError> {
        Ok(self.tree.navigate(id)?)
    }

    pub fn document(&self) -> Document {
        self.tree.to_document(self.recorder.records())
    }

    pub fn save(&mut self, path: &Path) -> Result<(), SessionError> {
        std::fs::write(path, self.document().to_json()).map_err(|error| SessionError::Io {
            path: path.display().to_string(),
            error,
        })?;
        self.dirty = false;
        Ok(())
    }

    /// Replace the tree by a replayed document. With `trust`, verdicts come
    /// from the document only; otherwise every goal is checked again.
    pub fn load_document(&mut self, doc: &Document, trust: bool) -> Result<(), SessionError> {
        let records = doc.check_records();
        let replay: Arc<dyn Prover> = if trust {
            Arc::new(RecordedProver::new(records.clone(), None))
        } else {
            self.backend.clone()
        };
        let recorder = Arc::new(RecordingProver::new(replay));
        let engine = TacticEngine::new(recorder.clone());
        let tree = DerivationTree::from_document(doc, &engine)?;
        let live = Arc::new(RecordingProver::new(self.backend.clone()));
        live.absorb(recorder.records());
        if trust {
            live.absorb(records);
        }
        self.engine = TacticEngine::new(live.clone());
        self.recorder = live;
        self.tree = tree;
        self.dirty = false;
        Ok(())
    }

    pub fn load(&mut self, path: &Path, trust: bool) -> Result<(), SessionError> {
        let text = std::fs::read_to_string(path).map_err(|error| SessionError::Io {
            path: path.display().to_string(),
            error,
        })?;
        self.load_document(&Document::from_json(&text)?, trust)
    }

    fn show(&self, arg: &str) -> Result<String, SessionError> {
        let state = self.tree.active_state();
        let p = state
            .program_state()
            .ok_or_else(|| SessionError::Command("no program yet".into()))?;
        let view = match arg {
            "" | "full" => full_annotations(&p.program),
            "minimal" => minimal_annotations(&p.program),
            other => return Err(SessionError::Command(format!("unknown view {other:?}"))),
        };
        Ok(render_program(&p.program, Some(&view)))
    }

    /// Run one command line.
    pub fn execute(&mut self, line: &str) -> Result<Reply, SessionError> {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            return Ok(Reply::text(""));
        }
        let (cmd, arg) = match line.strip_prefix(':') {
            Some(rest) => {
                let (c, a) = rest.split_once(char::is_whitespace).unwrap_or((rest, ""));
                (c, a.trim())
            }
            None => {
                let (id, applied) = self.apply_text(line)?;
                let mut text = format!("node {id}");
                for n in &applied.notes {
                    text.push_str(&format!("\n  {n}"));
                }
                for o in &applied.new_obligations {
                    text.push_str(&format!("\n  {}", render_obligation(o)));
                }
                return Ok(Reply::text(text));
            }
        };
        match cmd {
            "quit" | "q" => Ok(Reply {
                text: String::new(),
                quit: true,
            }),
            "tree" => Ok(Reply::text(self.tree.outline())),
            "nav" => {
                let id: NodeId = arg
                    .parse()
                    .map_err(|_| SessionError::Command(format!("expected a node id, found {arg:?}")))?;
                let at = self.navigate(id)?;
                Ok(Reply::text(format!("node {at}")))
            }
            "show" => Ok(Reply::text(self.show(arg)?)),
            "state" => Ok(Reply::text(render_state(self.tree.active_state()).join("\n"))),
            "obligations" => {
                let p = self.tree.active_state().program_state().cloned();
                let lines: Vec<String> = p
                    .map(|p| p.obligations.iter().chain(&p.side_conditions).map(render_obligation).collect())
                    .unwrap_or_default();
                Ok(Reply::text(lines.join("\n")))
            }
            "expect-fail" => match self.apply_text(arg) {
                Ok((id, _)) => Err(SessionError::Command(format!("expected a failure, but node {id} was created"))),
                Err(e) => Ok(Reply::text(format!("failed as expected: {e}"))),
            },
            "save" => {
                self.save(Path::new(arg))?;
                Ok(Reply::text(format!("saved {arg}")))
            }
            "load" => {
                self.load(Path::new(arg), false)?;
                Ok(Reply::text(format!("loaded {arg}")))
            }
            other => Err(SessionError::Command(format!("unknown command :{other}"))),
        }
    }

    /// Run a script; stops at the first failing line.
    pub fn run_script(&mut self, text: &str) -> Result<Vec<Reply>, (usize, SessionError)> {
        let mut out = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let r = self.execute(line).map_err(|e| (k + 1, e))?;
            let quit = r.quit;
            out.push(r);
            if quit {
                break;
            }
        }
        Ok(out)
    }
}
