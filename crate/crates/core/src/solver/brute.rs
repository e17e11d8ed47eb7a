//! Exhaustive checking over a small finite domain.

use serde::{Deserialize, Serialize};

use super::eval::{ArrayValue, Compiled, EvalError, QuantBox, State, Value};
use super::{Goal, UnknownReason, Verdict};
use crate::formula::Sort;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteDomain {
    pub int_lo: i64,
    pub int_hi: i64,
    /// Every array has exactly this many cells, indexed from 0.
    pub array_len: usize,
    /// Maximum number of states to enumerate.
    pub budget: u64,
}

impl Default for FiniteDomain {
    fn default() -> Self {
        FiniteDomain {
            int_lo: -1,
            int_hi: 5,
            array_len: 5,
            budget: 2_000_000,
        }
    }
}

impl FiniteDomain {
    pub fn ints(lo: i64, hi: i64) -> Self {
        FiniteDomain {
            int_lo: lo,
            int_hi: hi,
            ..FiniteDomain::default()
        }
    }

    fn quant_box(&self) -> QuantBox {
        QuantBox {
            lo: self.int_lo.min(0),
            hi: self.int_hi.max(self.array_len as i64),
        }
    }

    /// All values of `sort` in enumeration order.
    pub fn values(&self, sort: &Sort) -> Option<Vec<Value>> {
        match sort {
            Sort::Bool => Some(vec![Value::Bool(false), Value::Bool(true)]),
            Sort::Int => Some((self.int_lo..=self.int_hi).map(Value::Int).collect()),
            Sort::Array(elem) => {
                let cells = self.values(elem)?;
                let total = (cells.len() as u64).checked_pow(self.array_len as u32)?;
                if total > self.budget {
                    return None;
                }
                let mut out = Vec::with_capacity(total as usize);
                let mut idx = vec![0usize; self.array_len];
                loop {
                    out.push(Value::array(idx.iter().map(|&i| cells[i].clone()).collect()));
                    let mut k = self.array_len;
                    loop {
                        if k == 0 {
                            return Some(out);
                        }
                        k -= 1;
                        idx[k] += 1;
                        if idx[k] < cells.len() {
                            break;
                        }
                        idx[k] = 0;
                    }
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum BruteForceError {
    #[error("state space of {states} exceeds budget {budget}")]
    BudgetExceeded { states: u128, budget: u64 },
    #[error("obligation is not finitizable: {0}")]
    NotFinitizable(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct BruteForceOutcome {
    pub verdict: Verdict,
    /// Set when a quantifier had to be searched inside the fallback box or
    /// integer variables were restricted to the domain, so `Valid` only holds
    /// within the domain.
    pub domain_limited: bool,
    pub states: u64,
}

/// Exhaustive check. States are enumerated lexicographically by variable name,
/// then by value (`false < true`, integers ascending, arrays by cells), and
/// the first falsifying state is reported.
pub fn brute_force(goal: &Goal, dom: &FiniteDomain) -> Result<BruteForceOutcome, BruteForceError> {
    if goal.has_meta() {
        return Err(BruteForceError::NotFinitizable("contains metavariables".into()));
    }
    let vars: Vec<(String, Sort)> = goal.free_vars().into_iter().collect();
    let names: Vec<String> = vars.iter().map(|(n, _)| n.clone()).collect();
    let mut domains = Vec::new();
    let mut total: u128 = 1;
    for (n, s) in &vars {
        let vals = dom
            .values(s)
            .ok_or_else(|| BruteForceError::NotFinitizable(format!("{n}: {s} too large")))?;
        total = total.saturating_mul(vals.len() as u128);
        domains.push(vals);
    }
    if total > dom.budget as u128 {
        return Err(BruteForceError::BudgetExceeded {
            states: total,
            budget: dom.budget,
        });
    }
    let compile = |e| {
        Compiled::new(e, &names)
            .map(|mut c| {
                c.quant_box = dom.quant_box();
                c
            })
            .map_err(|e: EvalError| BruteForceError::NotFinitizable(e.to_string()))
    };
    let hyps: Vec<Compiled> = goal.hypotheses.iter().map(compile).collect::<Result<_, _>>()?;
    let concl = compile(&goal.goal)?;
    let mut frame = concl.frame();
    for h in &hyps {
        if h.frame().len() > frame.len() {
            frame = h.frame();
        }
    }

    let mut limited = vars.iter().any(|(_, s)| *s == Sort::Int || matches!(s, Sort::Array(_)));
    let mut errors = 0u64;
    let mut states = 0u64;
    let mut idx = vec![0usize; vars.len()];
    if domains.iter().any(|d| d.is_empty()) {
        return Ok(BruteForceOutcome {
            verdict: Verdict::Valid,
            domain_limited: true,
            states: 0,
        });
    }
    'outer: loop {
        states += 1;
        for (i, d) in domains.iter().enumerate() {
            frame[i] = d[idx[i]].clone();
        }
        let mut skip = false;
        for h in &hyps {
            match h.eval_frame(&mut frame, &mut limited) {
                Ok(Value::Bool(true)) => {}
                _ => {
                    skip = true;
                    break;
                }
            }
        }
        if !skip {
            match concl.eval_frame(&mut frame, &mut limited) {
                Ok(Value::Bool(true)) => {}
                Ok(_) => {
                    let state: State = names
                        .iter()
                        .cloned()
                        .zip(frame.iter().cloned())
                        .collect();
                    return Ok(BruteForceOutcome {
                        verdict: Verdict::Invalid(state),
                        domain_limited: limited,
                        states,
                    });
                }
                Err(_) => errors += 1,
            }
        }
        let mut k = vars.len();
        loop {
            if k == 0 {
                break 'outer;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < domains[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
    let verdict = if errors > 0 {
        Verdict::Unknown(UnknownReason::Incomplete(format!(
            "goal undefined in {errors} states within the domain"
        )))
    } else {
        Verdict::Valid
    };
    Ok(BruteForceOutcome {
        verdict,
        domain_limited: limited,
        states,
    })
}

/// Total arrays for variables a solver model leaves unconstrained.
pub(crate) fn default_value(sort: &Sort) -> Value {
    match sort {
        Sort::Bool => Value::Bool(false),
        Sort::Int => Value::Int(0),
        Sort::Array(e) => Value::Array(std::sync::Arc::new(ArrayValue::constant(default_value(e)))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, Env, Expr};

    fn env() -> Env {
        Env::new()
            .with_var("n", Sort::Int)
            .with_var("x", Sort::Int)
            .with_var("r", Sort::Bool)
            .with_var("f", Sort::array_of(Sort::Bool))
    }

    fn goal(hyps: &[&str], g: &str) -> Goal {
        Goal::new(
            hyps.iter().map(|h| parse_formula(h, &env()).unwrap()).collect(),
            parse_formula(g, &env()).unwrap(),
        )
    }

    #[test]
    fn empty_range_is_valid() {
        let out = brute_force(&goal(&["n = 0"], "(\\forall i: 0 \\le i < n: f[i])"), &FiniteDomain::default()).unwrap();
        assert_eq!(out.verdict, Verdict::Valid);
    }

    #[test]
    fn domain_limited_validity() {
        let out = brute_force(&goal(&[], "x < x + 1"), &FiniteDomain::ints(0, 3)).unwrap();
        assert_eq!(out.verdict, Verdict::Valid);
        assert!(out.domain_limited);
    }

    #[test]
    fn first_counterexample_in_order() {
        let out = brute_force(&goal(&[], "x < 2 \\vee r"), &FiniteDomain::ints(0, 3)).unwrap();
        let Verdict::Invalid(m) = out.verdict else { panic!() };
        assert_eq!(m.get("x"), Some(&Value::Int(2)));
        assert_eq!(m.get("r"), Some(&Value::Bool(false)));
    }

    #[test]
    fn budget_is_enforced() {
        let dom = FiniteDomain {
            budget: 10,
            ..FiniteDomain::default()
        };
        assert!(matches!(
            brute_force(&goal(&[], "x = n"), &dom),
            Err(BruteForceError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn metavariables_are_rejected() {
        let g = Goal::new(vec![], Expr::meta("r", Sort::Bool));
        assert!(brute_force(&g, &FiniteDomain::default()).is_err());
    }

    #[test]
    fn sortedness_formalization_matches_split_point() {
        // r ≡ all true values precede all false values, against an explicit
        // search for a split point k.
        let env = Env::new().with_var("N", Sort::Int).with_var("f", Sort::array_of(Sort::Bool));
        let spec = parse_formula("(\\forall i, j: 0 \\le i < j < N: f[j] \\Rightarrow f[i])", &env).unwrap();
        for len in 0..=8usize {
            for bits in 0u32..(1 << len) {
                let cells: Vec<bool> = (0..len).map(|i| bits >> i & 1 == 1).collect();
                let split = (0..=len).any(|k| cells[..k].iter().all(|c| *c) && cells[k..].iter().all(|c| !*c));
                let state: State = [
                    ("N".to_string(), Value::Int(len as i64)),
                    ("f".to_string(), Value::array(cells.iter().map(|&b| Value::Bool(b)).collect())),
                ]
                .into_iter()
                .collect();
                assert_eq!(super::super::eval::evaluate(&spec, &state), Ok(Value::Bool(split)), "{cells:?}");
            }
        }
    }
}
