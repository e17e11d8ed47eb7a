use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Duration;

use wait_timeout::ChildExt;

use super::config::SolverConfig;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Answer {
    Unsat,
    /// Output following the `sat` line, normally the model.
    Sat(String),
    Unknown(String),
    Timeout,
    Error(String),
}

/// Run one solver on `script`. `cancel` lets a portfolio stop the process
/// early; it is polled while waiting.
pub fn run_solver(cfg: &SolverConfig, script: &str, cancel: Option<Arc<AtomicBool>>) -> Answer {
    let mut child = match Command::new(cfg.resolved_executable())
        .args(cfg.expanded_args())
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
    {
        Ok(c) => c,
        Err(e) => return Answer::Error(format!("cannot start {}: {e}", cfg.executable)),
    };
    let mut stdin = child.stdin.take().expect("piped stdin");
    let script = script.to_string();
    let writer = std::thread::spawn(move || {
        let _ = stdin.write_all(script.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let reader = std::thread::spawn(move || {
        let mut s = String::new();
        let _ = stdout.read_to_string(&mut s);
        s
    });

    let deadline = Duration::from_secs_f64(cfg.timeout);
    let slice = Duration::from_millis(20).min(deadline);
    let mut waited = Duration::ZERO;
    let status = loop {
        match child.wait_timeout(slice) {
            Ok(Some(status)) => break Some(status),
            Ok(None) => {
                waited += slice;
                let cancelled = cancel.as_ref().is_some_and(|c| c.load(Ordering::SeqCst));
                if waited >= deadline || cancelled {
                    let _ = child.kill();
                    let _ = child.wait();
                    break None;
                }
            }
            Err(e) => return Answer::Error(e.to_string()),
        }
    };
    let _ = writer.join();
    let out = reader.join().unwrap_or_default();
    if status.is_none() {
        return Answer::Timeout;
    }
    classify(&out)
}

pub fn classify(out: &str) -> Answer {
    let mut lines = out.lines().map(str::trim).filter(|l| !l.is_empty());
    match lines.next() {
        Some("unsat") => Answer::Unsat,
        Some("sat") => Answer::Sat(lines.collect::<Vec<_>>().join("\n")),
        Some("unknown") => Answer::Unknown("solver returned unknown".into()),
        Some("timeout") => Answer::Timeout,
        Some(other) => Answer::Error(other.to_string()),
        None => Answer::Error("no output".into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classifies_first_line() {
        assert_eq!(classify("unsat\n(error \"no model\")\n"), Answer::Unsat);
        assert_eq!(classify("sat\n(model)\n"), Answer::Sat("(model)".into()));
        assert!(matches!(classify(""), Answer::Error(_)));
    }

    #[test]
    fn missing_executable_is_an_error() {
        let cfg = SolverConfig {
            name: "none".into(),
            executable: "/nonexistent/solver-binary".into(),
            args: vec![],
            timeout: 1.0,
            enabled: true,
        };
        assert!(matches!(run_solver(&cfg, "(check-sat)", None), Answer::Error(_)));
    }
}
