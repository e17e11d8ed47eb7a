//! Calculational derivation of guarded-command programs.
//!
//! Formulas ([`formula`]), annotated programs ([`program`]), weakest
//! preconditions and proof obligations ([`wp`]), validity checking
//! ([`solver`]), tactics ([`tactic`]), the derivation tree ([`tree`]),
//! sessions ([`session`]) and the JSON API used by the web front end
//! ([`api`]).

pub mod api;
pub mod formula;
pub mod program;
pub mod session;
pub mod solver;
pub mod tactic;
pub mod tree;
pub mod wp;

pub use formula::{parse_formula, Env, Expr, ExprPath, Sort};
pub use program::{AnnotatedProgram, Construct, Declarations, NodePath};
pub use session::{Reply, Session, SessionError};
pub use solver::{FiniteDomain, Goal, Prover, SolverBridge, SolverSettings, Verdict};
pub use tactic::{parse_tactic, DerivationState, TacticEngine, TacticError, TacticInvocation};
pub use tree::{DerivationTree, Document, NodeId};
pub use wp::{generate_obligations, ProofObligation, Status};
