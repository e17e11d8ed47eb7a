//! Reference interpreter for guarded commands.

use std::sync::Arc;

use super::eval::{evaluate, EvalError, State, Value};
use crate::formula::Expr;
use crate::program::{Construct, Target};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ExecError {
    #[error("abort: no guard of the if holds")]
    Abort,
    #[error("fuel exhausted")]
    FuelExhausted,
    #[error("cannot execute UnkProg {0}")]
    Unknown(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Run `c` from `state`. Every executed statement and loop iteration costs
/// one unit of fuel.
pub fn interpret(c: &Construct, state: &State, fuel: u64) -> Result<State, ExecError> {
    let mut fuel = fuel;
    let mut s = state.clone();
    exec(c, &mut s, &mut fuel)?;
    Ok(s)
}

fn tick(fuel: &mut u64) -> Result<(), ExecError> {
    if *fuel == 0 {
        return Err(ExecError::FuelExhausted);
    }
    *fuel -= 1;
    Ok(())
}

fn truth(e: &Expr, s: &State) -> Result<bool, ExecError> {
    match evaluate(e, s)? {
        Value::Bool(b) => Ok(b),
        _ => Err(EvalError::Sort("guard").into()),
    }
}

fn exec(c: &Construct, s: &mut State, fuel: &mut u64) -> Result<(), ExecError> {
    tick(fuel)?;
    match c {
        Construct::Skip => Ok(()),
        Construct::Unknown(tag) => Err(ExecError::Unknown(tag.clone())),
        Construct::Assign { targets, exprs } => {
            // Right-hand sides and indices are evaluated in the old state.
            let mut writes = Vec::with_capacity(targets.len());
            for (t, e) in targets.iter().zip(exprs) {
                let v = evaluate(e, s)?;
                let idx = match t {
                    Target::Elem(_, _, i) => Some(evaluate(i, s)?.as_int().ok_or_else(|| EvalError::Sort("index"))?),
                    Target::Var(..) => None,
                };
                writes.push((t.name().to_string(), idx, v));
            }
            for (name, idx, v) in writes {
                match idx {
                    None => {
                        s.insert(name, v);
                    }
                    Some(i) => {
                        let arr = match s.get(&name) {
                            Some(Value::Array(a)) => a.clone(),
                            Some(_) => return Err(EvalError::Sort("array assignment").into()),
                            None => return Err(EvalError::Unbound(name).into()),
                        };
                        s.insert(name, Value::Array(Arc::new(arr.set(i, v)?)));
                    }
                }
            }
            Ok(())
        }
        Construct::Composition(cs) => {
            for c in cs {
                exec(&c.body, s, fuel)?;
            }
            Ok(())
        }
        Construct::If(bs) => {
            for (g, b) in bs {
                if truth(g, s)? {
                    return exec(&b.body, s, fuel);
                }
            }
            Err(ExecError::Abort)
        }
        Construct::While { guard, body, .. } => {
            while truth(guard, s)? {
                exec(&body.body, s, fuel)?;
                tick(fuel)?;
            }
            Ok(())
        }
    }
}

/// Every final state of `c` from `state`, exploring each true guard of an
/// if. Fails with [`ExecError::Abort`] if any execution aborts.
pub fn outcomes(c: &Construct, state: &State, fuel: u64) -> Result<Vec<State>, ExecError> {
    let mut fuel = fuel;
    let mut out = Vec::new();
    exec_all(c, state.clone(), &mut fuel, &mut out)?;
    let mut unique: Vec<State> = Vec::new();
    for s in out {
        if !unique.contains(&s) {
            unique.push(s);
        }
    }
    Ok(unique)
}

fn exec_all(c: &Construct, s: State, fuel: &mut u64, out: &mut Vec<State>) -> Result<(), ExecError> {
    match c {
        Construct::Composition(cs) => {
            let mut current = vec![s];
            for c in cs {
                let mut next = Vec::new();
                for st in current {
                    exec_all(&c.body, st, fuel, &mut next)?;
                }
                current = next;
            }
            out.extend(current);
            Ok(())
        }
        Construct::If(bs) => {
            tick(fuel)?;
            let mut any = false;
            for (g, b) in bs {
                if truth(g, &s)? {
                    any = true;
                    exec_all(&b.body, s.clone(), fuel, out)?;
                }
            }
            if any {
                Ok(())
            } else {
                Err(ExecError::Abort)
            }
        }
        Construct::While { guard, body, .. } => {
            tick(fuel)?;
            if !truth(guard, &s)? {
                out.push(s);
                return Ok(());
            }
            let mut after = Vec::new();
            exec_all(&body.body, s, fuel, &mut after)?;
            for st in after {
                exec_all(c, st, fuel, out)?;
            }
            Ok(())
        }
        other => {
            let mut s = s;
            exec(other, &mut s, fuel)?;
            out.push(s);
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Sort;
    use crate::program::AnnotatedProgram;

    fn st(pairs: &[(&str, Value)]) -> State {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn overlapping_guards_give_every_outcome() {
        let t = Expr::Bool(true);
        let set = |v| {
            AnnotatedProgram::new(
                t.clone(),
                t.clone(),
                Construct::Assign {
                    targets: vec![Target::Var("x".into(), Sort::Int)],
                    exprs: vec![Expr::int(v)],
                },
            )
        };
        let c = Construct::If(vec![(t.clone(), set(1)), (t.clone(), set(2))]);
        let outs = outcomes(&c, &st(&[("x", Value::Int(0))]), 10).unwrap();
        assert_eq!(outs.len(), 2);
    }

    #[test]
    fn skip_is_identity() {
        let s = st(&[("x", Value::Int(3))]);
        assert_eq!(interpret(&Construct::Skip, &s, 10).unwrap(), s);
    }

    #[test]
    fn swap_is_simultaneous() {
        let c = Construct::Assign {
            targets: vec![Target::Var("x".into(), Sort::Int), Target::Var("y".into(), Sort::Int)],
            exprs: vec![Expr::int_var("y"), Expr::int_var("x")],
        };
        let out = interpret(&c, &st(&[("x", Value::Int(1)), ("y", Value::Int(2))]), 10).unwrap();
        assert_eq!(out["x"], Value::Int(2));
        assert_eq!(out["y"], Value::Int(1));
    }

    #[test]
    fn if_without_true_guard_aborts_and_loops_run_out_of_fuel() {
        let t = Expr::Bool(true);
        let skip = AnnotatedProgram::new(t.clone(), t.clone(), Construct::Skip);
        let c = Construct::If(vec![(Expr::Bool(false), skip.clone())]);
        assert_eq!(interpret(&c, &State::new(), 10), Err(ExecError::Abort));
        let w = Construct::While {
            invariants: vec![],
            bound: None,
            guard: t,
            body: Box::new(skip),
        };
        assert_eq!(interpret(&w, &State::new(), 50), Err(ExecError::FuelExhausted));
    }
}
