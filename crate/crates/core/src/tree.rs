//! Append-only derivation tree and its JSON document form.
//!
//! Node ids are indices in creation order. Applying a tactic at a node adds
//! a child; nothing is ever removed, so abandoned attempts stay available
//! as siblings.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::solver::CheckRecord;
use crate::tactic::{parse_tactic, render_state, Applied, DerivationState, TacticEngine, TacticError, TacticInvocation};

pub type NodeId = usize;

pub const DOCUMENT_FORMAT: &str = "calcdev-derivation";
pub const DOCUMENT_VERSION: u32 = 1;

#[derive(Clone, Debug)]
pub struct TreeNode {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub state: Arc<DerivationState>,
    pub produced_by: Option<TacticInvocation>,
    /// Logical creation time: the number of nodes created before.
    pub tick: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error("no node {0}")]
    UnknownNode(NodeId),
    #[error("node {node}: {error}")]
    Tactic { node: NodeId, error: TacticError },
    #[error("malformed document: {0}")]
    Format(String),
    #[error("replay of node {node} produced a different state at line {line}: expected {expected:?}, got {actual:?}")]
    ReplayMismatch {
        node: NodeId,
        line: usize,
        expected: String,
        actual: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathEntry {
    pub id: NodeId,
    /// Rendered tactic, `Root` for the root.
    pub tactic: String,
    /// Other children of the parent.
    pub siblings: Vec<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocNode {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tactic: Option<String>,
    pub tick: u64,
    pub snapshot: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocCheck {
    pub key: String,
    #[serde(flatten)]
    pub record: CheckRecord,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub format: String,
    pub version: u32,
    pub active: NodeId,
    pub nodes: Vec<DocNode>,
    pub checks: Vec<DocCheck>,
}

impl Document {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("document serialises");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Document, TreeError> {
        let doc: Document = serde_json::from_str(text).map_err(|e| TreeError::Format(e.to_string()))?;
        doc.validate()?;
        Ok(doc)
    }

    /// Format tag and version.
    pub fn validate(&self) -> Result<(), TreeError> {
        if self.format != DOCUMENT_FORMAT {
            return Err(TreeError::Format(format!("unknown format {:?}", self.format)));
        }
        if self.version != DOCUMENT_VERSION {
            return Err(TreeError::Format(format!("unsupported version {}", self.version)));
        }
        Ok(())
    }

    pub fn check_records(&self) -> BTreeMap<String, CheckRecord> {
        self.checks.iter().map(|c| (c.key.clone(), c.record.clone())).collect()
    }
}

#[derive(Clone, Debug)]
pub struct DerivationTree {
    nodes: Vec<TreeNode>,
    active: NodeId,
}

impl Default for DerivationTree {
    fn default() -> Self {
        Self::new()
    }
}

impl DerivationTree {
    pub fn new() -> Self {
        DerivationTree {
            nodes: vec![TreeNode {
                id: 0,
                parent: None,
                children: vec![],
                state: Arc::new(DerivationState::Empty),
                produced_by: None,
                tick: 0,
            }],
            active: 0,
        }
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn active(&self) -> NodeId {
        self.active
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Result<&TreeNode, TreeError> {
        self.nodes.get(id).ok_or(TreeError::UnknownNode(id))
    }

    pub fn state(&self, id: NodeId) -> Result<&Arc<DerivationState>, TreeError> {
        Ok(&self.node(id)?.state)
    }

    pub fn active_state(&self) -> &Arc<DerivationState> {
        &self.nodes[self.active].state
    }

    /// Apply `inv` at the active node; the new child becomes active.
    pub fn extend(&mut self, engine: &TacticEngine, inv: &TacticInvocation) -> Result<(NodeId, Applied), TreeError> {
        self.extend_at(engine, self.active, inv)
    }

    /// Apply `inv` at node `at`; the new child becomes active. On failure
    /// the tree is unchanged.
    pub fn extend_at(
        &mut self,
        engine: &TacticEngine,
        at: NodeId,
        inv: &TacticInvocation,
    ) -> Result<(NodeId, Applied), TreeError> {
        let state = self.state(at)?.clone();
        let applied = engine
            .apply(&state, inv)
            .map_err(|error| TreeError::Tactic { node: at, error })?;
        let id = self.push(at, inv.clone(), applied.state.clone());
        Ok((id, applied))
    }

    fn push(&mut self, parent: NodeId, inv: TacticInvocation, state: DerivationState) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(TreeNode {
            id,
            parent: Some(parent),
            children: vec![],
            state: Arc::new(state),
            produced_by: Some(inv),
            tick: id as u64,
        });
        self.nodes[parent].children.push(id);
        self.active = id;
        id
    }

    /// Make `id` the active node.
    /// Moves the active node. A node on the active path becomes the active
    /// node itself (backtracking); any other node selects its subtree, and
    /// the newest branch is followed down to a leaf.
    pub fn navigate(&mut self, id: NodeId) -> Result<NodeId, TreeError> {
        self.node(id)?;
        self.active = if self.active_path().contains(&id) { id } else { self.rightmost_leaf(id)? };
        Ok(self.active)
    }

    /// Follows the latest child from `id` until a leaf.
    pub fn rightmost_leaf(&self, id: NodeId) -> Result<NodeId, TreeError> {
        let mut cur = self.node(id)?;
        while let Some(&c) = cur.children.last() {
            cur = &self.nodes[c];
        }
        Ok(cur.id)
    }

    /// Ids from the root to `id`.
    pub fn path_to(&self, id: NodeId) -> Result<Vec<NodeId>, TreeError> {
        let mut out = vec![id];
        let mut cur = self.node(id)?;
        while let Some(p) = cur.parent {
            out.push(p);
            cur = &self.nodes[p];
        }
        out.reverse();
        Ok(out)
    }

    pub fn active_path(&self) -> Vec<NodeId> {
        self.path_to(self.active).expect("active node exists")
    }

    pub fn tactic_text(&self, id: NodeId) -> String {
        self.nodes
            .get(id)
            .and_then(|n| n.produced_by.as_ref())
            .map(|t| t.to_string())
            .unwrap_or_else(|| "Root".into())
    }

    pub fn active_path_view(&self) -> Vec<PathEntry> {
        self.active_path()
            .into_iter()
            .map(|id| {
                let siblings = match self.nodes[id].parent {
                    Some(p) => self.nodes[p].children.iter().copied().filter(|c| *c != id).collect(),
                    None => vec![],
                };
                PathEntry {
                    id,
                    tactic: self.tactic_text(id),
                    siblings,
                }
            })
            .collect()
    }

    /// Indented outline of the whole tree; `*` marks the active node.
    pub fn outline(&self) -> String {
        let mut out = Vec::new();
        self.outline_at(0, 0, &mut out);
        out.join("\n")
    }

    fn outline_at(&self, id: NodeId, depth: usize, out: &mut Vec<String>) {
        let mark = if id == self.active { "*" } else { " " };
        out.push(format!("{mark}{}{id}: {}", "  ".repeat(depth), self.tactic_text(id)));
        for c in &self.nodes[id].children {
            self.outline_at(*c, depth + 1, out);
        }
    }

    pub fn to_document(&self, checks: BTreeMap<String, CheckRecord>) -> Document {
        Document {
            format: DOCUMENT_FORMAT.into(),
            version: DOCUMENT_VERSION,
            active: self.active,
            nodes: self
                .nodes
                .iter()
                .map(|n| DocNode {
                    id: n.id,
                    parent: n.parent,
                    tactic: n.produced_by.as_ref().map(|t| t.to_string()),
                    tick: n.tick,
                    snapshot: render_state(&n.state),
                })
                .collect(),
            checks: checks.into_iter().map(|(key, record)| DocCheck { key, record }).collect(),
        }
    }

    /// Rebuild a tree by replaying every tactic, comparing each state with
    /// the stored snapshot.
    pub fn from_document(doc: &Document, engine: &TacticEngine) -> Result<DerivationTree, TreeError> {
        doc.validate()?;
        if doc.nodes.is_empty() {
            return Err(TreeError::Format("no root node".into()));
        }
        let mut tree = DerivationTree::new();
        for (k, n) in doc.nodes.iter().enumerate() {
            if n.id != k {
                return Err(TreeError::Format(format!("node {} listed at position {k}", n.id)));
            }
            if k == 0 {
                if n.parent.is_some() || n.tactic.is_some() {
                    return Err(TreeError::Format("node 0 must be the root".into()));
                }
            } else {
                let parent = n.parent.filter(|p| *p < k).ok_or_else(|| {
                    TreeError::Format(format!("node {k} must have an earlier parent"))
                })?;
                let text = n.tactic.as_deref().ok_or_else(|| TreeError::Format(format!("node {k} has no tactic")))?;
                let inv = parse_tactic(text).map_err(|error| TreeError::Tactic { node: parent, error })?;
                tree.extend_at(engine, parent, &inv)?;
            }
            tree.nodes[k].tick = n.tick;
            let actual = render_state(&tree.nodes[k].state);
            if actual != n.snapshot {
                let line = actual.iter().zip(&n.snapshot).take_while(|(a, b)| a == b).count();
                return Err(TreeError::ReplayMismatch {
                    node: k,
                    line,
                    expected: n.snapshot.get(line).cloned().unwrap_or_default(),
                    actual: actual.get(line).cloned().unwrap_or_default(),
                });
            }
        }
        tree.node(doc.active)
            .map_err(|_| TreeError::Format(format!("active node {} does not exist", doc.active)))?;
        tree.active = doc.active;
        Ok(tree)
    }
}
