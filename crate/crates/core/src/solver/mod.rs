//! Discharging validity goals: external SMT-LIB solvers, an exhaustive
//! finite-domain oracle, and the GCL interpreter used to test the wp engine.

pub mod brute;
pub mod config;
pub mod eval;
pub mod interp;
pub mod process;
pub mod smtlib;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{mpsc, Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::formula::{alpha_key, Expr, Sort};
pub use brute::{brute_force, BruteForceError, BruteForceOutcome, FiniteDomain};
pub use config::{ConfigError, SolverConfig, SolverSettings, SOLVER_DIR_ENV};
pub use eval::{evaluate, show_state, ArrayValue, EvalError, QuantBox, State, Value};
pub use interp::{interpret, outcomes, ExecError};
pub use process::Answer;
pub use smtlib::{to_smtlib, SmtError};

/// Validity of `(∧ hypotheses) ⇒ goal` over all states.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Goal {
    pub hypotheses: Vec<Expr>,
    pub goal: Expr,
}

impl Goal {
    pub fn new(hypotheses: Vec<Expr>, goal: Expr) -> Self {
        Goal { hypotheses, goal }
    }

    pub fn free_vars(&self) -> BTreeSet<(String, Sort)> {
        let mut out = self.goal.free_vars();
        for h in &self.hypotheses {
            out.extend(h.free_vars());
        }
        out
    }

    pub fn has_meta(&self) -> bool {
        self.goal.has_meta() || self.hypotheses.iter().any(Expr::has_meta)
    }

    /// Treat metavariables as ordinary universally quantified variables
    /// (named `m'`), as needed when checking a formula-mode step.
    pub fn generalize_metas(&self) -> Goal {
        fn go(e: &Expr) -> Expr {
            match e {
                Expr::Meta(n, s) => Expr::Var(format!("{n}'"), s.clone()),
                Expr::Int(_) | Expr::Bool(_) | Expr::Var(..) => e.clone(),
                Expr::Read(a, i) => Expr::read(go(a), go(i)),
                Expr::Update(a, i, v) => Expr::update(go(a), go(i), go(v)),
                Expr::Unary(op, a) => Expr::Unary(*op, Box::new(go(a))),
                Expr::Binary(op, a, b) => Expr::binary(*op, go(a), go(b)),
                Expr::Quant(q) => Expr::quant(q.op, q.vars.clone(), go(&q.range), go(&q.term)),
            }
        }
        Goal {
            hypotheses: self.hypotheses.iter().map(go).collect(),
            goal: go(&self.goal),
        }
    }

    /// Cache key; equal for alpha-equivalent goals.
    pub fn key(&self) -> String {
        let mut k = String::new();
        for h in &self.hypotheses {
            k.push_str(&alpha_key(h));
            k.push_str(" ; ");
        }
        k.push_str("⊢ ");
        k.push_str(&alpha_key(&self.goal));
        k
    }

    /// Whether `state` satisfies every hypothesis and falsifies the goal.
    pub fn falsified_by(&self, state: &State) -> bool {
        let holds = |e: &Expr| matches!(evaluate(e, state), Ok(Value::Bool(true)));
        let fails = matches!(evaluate(&self.goal, state), Ok(Value::Bool(false)));
        fails && self.hypotheses.iter().all(holds)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnknownReason {
    Timeout,
    Incomplete(String),
    SolverError(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Valid,
    /// Counterexample state.
    Invalid(State),
    Unknown(UnknownReason),
}

impl Verdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, Verdict::Valid)
    }

    pub fn is_definitive(&self) -> bool {
        !matches!(self, Verdict::Unknown(_))
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Valid => write!(f, "valid"),
            Verdict::Invalid(m) => write!(f, "invalid, counterexample: {}", show_state(m)),
            Verdict::Unknown(UnknownReason::Timeout) => write!(f, "unknown (timeout)"),
            Verdict::Unknown(UnknownReason::Incomplete(r)) => write!(f, "unknown ({r})"),
            Verdict::Unknown(UnknownReason::SolverError(r)) => write!(f, "unknown (solver error: {r})"),
        }
    }
}

/// A verdict with the backend that produced it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub verdict: Verdict,
    pub solver: String,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub domain_limited: bool,
}

pub const BRUTE_FORCE: &str = "brute-force";

pub trait Prover: Send + Sync {
    fn check(&self, goal: &Goal) -> CheckRecord;
}

/// Configured solvers in order, falling back to the finite-domain oracle.
pub struct SolverBridge {
    settings: SolverSettings,
    domain: FiniteDomain,
    cache: Mutex<HashMap<String, CheckRecord>>,
    spawned: AtomicUsize,
    dumped: AtomicUsize,
}

impl SolverBridge {
    pub fn new(settings: SolverSettings, domain: FiniteDomain) -> Self {
        SolverBridge {
            settings,
            domain,
            cache: Mutex::new(HashMap::new()),
            spawned: AtomicUsize::new(0),
            dumped: AtomicUsize::new(0),
        }
    }

    /// Oracle only, over the default domain.
    pub fn oracle() -> Self {
        SolverBridge::new(SolverSettings::default(), FiniteDomain::default())
    }

    pub fn settings(&self) -> &SolverSettings {
        &self.settings
    }

    pub fn domain(&self) -> &FiniteDomain {
        &self.domain
    }

    /// Number of solver subprocesses started so far.
    pub fn subprocess_count(&self) -> usize {
        self.spawned.load(Ordering::SeqCst)
    }

    fn dump(&self, solver: &str, script: &str) {
        if let Some(dir) = &self.settings.dump_dir {
            let n = self.dumped.fetch_add(1, Ordering::SeqCst);
            let _ = fs::create_dir_all(dir);
            let _ = fs::write(dir.join(format!("{n:05}-{solver}.smt2")), script);
        }
    }

    fn interpret_answer(&self, goal: &Goal, answer: Answer) -> Verdict {
        match answer {
            Answer::Unsat => Verdict::Valid,
            Answer::Sat(model) => match smtlib::read_model(&model, goal) {
                Some(state) if goal.falsified_by(&state) => Verdict::Invalid(state),
                _ => Verdict::Unknown(UnknownReason::Incomplete("model not confirmed by the evaluator".into())),
            },
            Answer::Unknown(r) => Verdict::Unknown(UnknownReason::Incomplete(r)),
            Answer::Timeout => Verdict::Unknown(UnknownReason::Timeout),
            Answer::Error(e) => Verdict::Unknown(UnknownReason::SolverError(e)),
        }
    }

    /// Run the external solvers only, without cache or fallback.
    pub fn check_external(&self, goal: &Goal) -> Vec<(String, Verdict)> {
        let script = match to_smtlib(goal) {
            Ok(s) => s,
            Err(e) => return vec![("smtlib".into(), Verdict::Unknown(UnknownReason::Incomplete(e.to_string())))],
        };
        let solvers: Vec<SolverConfig> = self.settings.enabled().cloned().collect();
        if self.settings.portfolio && solvers.len() > 1 {
            return self.portfolio(goal, &script, solvers);
        }
        let mut out = Vec::new();
        for cfg in solvers {
            self.dump(&cfg.name, &script);
            self.spawned.fetch_add(1, Ordering::SeqCst);
            let v = self.interpret_answer(goal, process::run_solver(&cfg, &script, None));
            let done = v.is_definitive();
            out.push((cfg.name.clone(), v));
            if done {
                break;
            }
        }
        out
    }

    fn portfolio(&self, goal: &Goal, script: &str, solvers: Vec<SolverConfig>) -> Vec<(String, Verdict)> {
        let cancel = Arc::new(AtomicBool::new(false));
        let (tx, rx) = mpsc::channel();
        let mut handles = Vec::new();
        for cfg in solvers.iter().cloned() {
            self.dump(&cfg.name, script);
            self.spawned.fetch_add(1, Ordering::SeqCst);
            let (tx, script, cancel) = (tx.clone(), script.to_string(), cancel.clone());
            handles.push(std::thread::spawn(move || {
                let a = process::run_solver(&cfg, &script, Some(cancel));
                let _ = tx.send((cfg.name.clone(), a));
            }));
        }
        drop(tx);
        let mut out = Vec::new();
        for (name, answer) in rx {
            let v = self.interpret_answer(goal, answer);
            let done = v.is_definitive();
            out.push((name, v));
            if done {
                cancel.store(true, Ordering::SeqCst);
                break;
            }
        }
        for h in handles {
            let _ = h.join();
        }
        out
    }
}

impl Prover for SolverBridge {
    fn check(&self, goal: &Goal) -> CheckRecord {
        if goal.has_meta() {
            return CheckRecord {
                verdict: Verdict::Unknown(UnknownReason::Incomplete("contains metavariables".into())),
                solver: "none".into(),
                domain_limited: false,
            };
        }
        let key = goal.key();
        if let Some(r) = self.cache.lock().expect("cache lock").get(&key) {
            return r.clone();
        }
        let mut record = None;
        let mut last_unknown = None;
        for (name, v) in self.check_external(goal) {
            if v.is_definitive() {
                record = Some(CheckRecord {
                    verdict: v,
                    solver: name,
                    domain_limited: false,
                });
                break;
            }
            last_unknown = Some(CheckRecord {
                verdict: v,
                solver: name,
                domain_limited: false,
            });
        }
        let record = record.unwrap_or_else(|| match brute_force(goal, &self.domain) {
            Ok(out) => CheckRecord {
                verdict: out.verdict,
                solver: BRUTE_FORCE.into(),
                domain_limited: out.domain_limited,
            },
            Err(e) => last_unknown.unwrap_or(CheckRecord {
                verdict: Verdict::Unknown(UnknownReason::Incomplete(e.to_string())),
                solver: BRUTE_FORCE.into(),
                domain_limited: false,
            }),
        });
        self.cache.lock().expect("cache lock").insert(key, record.clone());
        record
    }
}

/// Replays verdicts recorded in a derivation document. Goals that were not
/// recorded go to the fallback prover, if any.
pub struct RecordedProver {
    records: HashMap<String, CheckRecord>,
    fallback: Option<Arc<dyn Prover>>,
    misses: AtomicUsize,
}

impl RecordedProver {
    pub fn new(records: impl IntoIterator<Item = (String, CheckRecord)>, fallback: Option<Arc<dyn Prover>>) -> Self {
        RecordedProver {
            records: records.into_iter().collect(),
            fallback,
            misses: AtomicUsize::new(0),
        }
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::SeqCst)
    }
}

impl Prover for RecordedProver {
    fn check(&self, goal: &Goal) -> CheckRecord {
        if let Some(r) = self.records.get(&goal.key()) {
            return r.clone();
        }
        self.misses.fetch_add(1, Ordering::SeqCst);
        match &self.fallback {
            Some(p) => p.check(goal),
            None => CheckRecord {
                verdict: Verdict::Unknown(UnknownReason::Incomplete("no recorded verdict".into())),
                solver: "recorded".into(),
                domain_limited: false,
            },
        }
    }
}

/// Logs every check passing through it, keyed by goal.
pub struct RecordingProver {
    inner: Arc<dyn Prover>,
    log: Mutex<BTreeMap<String, CheckRecord>>,
}

impl RecordingProver {
    pub fn new(inner: Arc<dyn Prover>) -> Self {
        RecordingProver {
            inner,
            log: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn records(&self) -> BTreeMap<String, CheckRecord> {
        self.log.lock().expect("log lock").clone()
    }

    pub fn absorb(&self, records: impl IntoIterator<Item = (String, CheckRecord)>) {
        self.log.lock().expect("log lock").extend(records);
    }
}

impl Prover for RecordingProver {
    fn check(&self, goal: &Goal) -> CheckRecord {
        let r = self.inner.check(goal);
        self.log.lock().expect("log lock").insert(goal.key(), r.clone());
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metavariable_goals_are_not_checked() {
        let g = Goal::new(vec![], Expr::meta("r", Sort::Bool));
        let r = SolverBridge::oracle().check(&g);
        assert!(matches!(r.verdict, Verdict::Unknown(_)));
        let r = SolverBridge::oracle().check(&g.generalize_metas());
        assert!(matches!(r.verdict, Verdict::Invalid(_)));
    }

    #[test]
    fn cache_is_keyed_up_to_alpha() {
        let b = SolverBridge::oracle();
        let mk = |v: &str| {
            Goal::new(
                vec![],
                Expr::forall(&[v], Expr::lt(Expr::int_var(v), Expr::int(0)), Expr::lt(Expr::int_var(v), Expr::int(1))),
            )
        };
        assert_eq!(mk("i").key(), mk("k").key());
        assert!(b.check(&mk("i")).verdict.is_valid());
        assert_eq!(b.cache.lock().unwrap().len(), 1);
        b.check(&mk("k"));
        assert_eq!(b.cache.lock().unwrap().len(), 1);
    }

    #[test]
    fn recorded_prover_replays_without_fallback() {
        let g = Goal::new(vec![], Expr::Bool(true));
        let rec = RecordingProver::new(Arc::new(SolverBridge::oracle()));
        rec.check(&g);
        let replay = RecordedProver::new(rec.records(), None);
        assert!(replay.check(&g).verdict.is_valid());
        assert_eq!(replay.misses(), 0);
        assert!(!replay.check(&Goal::new(vec![], Expr::Bool(false))).verdict.is_definitive());
    }
}
