use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_calcdev"));
    c.env_remove("CALCDEV_SOLVER_CONFIG");
    c
}

fn script(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scripts").join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn worked_derivation_script_succeeds() {
    let o = bin().arg("--script").arg(script("sorted-descending.calx")).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert!(out.contains("s := s ∧ f[n]"), "{out}");
    assert!(out.trim_end().ends_with("derivation complete"));
}

#[test]
fn failing_script_reports_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.calx");
    std::fs::write(&f, "init4{vars=[x: Int], pre=true, post=x = 3}\n# comment\nguessProgram{prog=\"x := 4\"}\n").unwrap();
    let o = bin().arg("run").arg(&f).output().unwrap();
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.calx:3"), "{err}");
}

#[test]
fn saved_document_replays() {
    let dir = tempfile::tempdir().unwrap();
    let doc = dir.path().join("division.json");
    let o = bin()
        .arg("run")
        .arg(script("integer-division.calx"))
        .arg("--save")
        .arg(&doc)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for flags in [&[][..], &["--trust-replay"][..]] {
        let o = bin().arg("replay").arg(&doc).args(flags).output().unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("replayed 5 nodes"), "{}", stdout(&o));
    }
}

#[test]
fn repl_reads_commands_until_quit() {
    let mut child = bin().stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn().unwrap();
    let text = std::fs::read_to_string(script("integer-division.calx")).unwrap();
    let mut stdin = child.stdin.take().unwrap();
    write!(stdin, "{text}\n:show minimal\n:nav 1\n:tree\n:quit\n:tree\n").unwrap();
    drop(stdin);
    let o = child.wait_with_output().unwrap();
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("do r ≥ y →"), "{out}");
    // Only the outermost pre/post and the invariants are shown.
    assert_eq!(out.matches("{ invariant").count(), 2, "{out}");
    let marked: Vec<&str> = out.lines().filter(|l| l.starts_with('*')).collect();
    assert_eq!(marked.len(), 1, "{out}");
    assert!(marked[0].trim_start_matches(['*', ' ']).starts_with("1: init4"), "{out}");
    assert_eq!(out.matches("0: Root").count(), 1, "commands after :quit ran");
    assert!(String::from_utf8_lossy(&o.stderr).contains("unsaved"));
}

#[test]
fn server_answers_http_requests() {
    let mut child = bin()
        .args(["serve", "--port", "0"])
        .stderr(Stdio::piped())
        .stdout(Stdio::null())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stderr.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on http://").expect("listening line").to_string();
    let request = |method: &str, path: &str, body: &str| {
        let mut s = TcpStream::connect(&addr).unwrap();
        write!(
            s,
            "{method} {path} HTTP/1.1\r\nHost: x\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        )
        .unwrap();
        let mut out = String::new();
        s.read_to_string(&mut out).unwrap();
        out
    };
    let created = request("POST", "/sessions", "");
    assert!(created.starts_with("HTTP/1.1 201"), "{created}");
    assert!(created.contains("\"id\":\"s1\""), "{created}");
    let applied = request("POST", "/sessions/s1/tactic", r#"{"tactic": "init4{vars=[x: Int], pre=true, post=x = 3}"}"#);
    assert!(applied.starts_with("HTTP/1.1 200"), "{applied}");
    let missing = request("GET", "/sessions/s9/tree", "");
    assert!(missing.starts_with("HTTP/1.1 404"), "{missing}");
    child.kill().unwrap();
    child.wait().unwrap();
}

#[test]
fn example_solver_config_drives_a_run() {
    let config = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../solvers.example.toml");
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("--solver-config")
        .arg(&config)
        .arg("--dump-smt")
        .arg(dir.path())
        .arg("run")
        .arg(script("integer-division.calx"))
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("derivation complete"));
    // z3 missing from PATH only means nothing was dumped by a run that used it.
    let dumped = std::fs::read_dir(dir.path()).unwrap().count();
    if which_z3() {
        assert!(dumped > 0);
    }
}

fn which_z3() -> bool {
    std::env::var_os("PATH").is_some_and(|p| std::env::split_paths(&p).any(|d| d.join("z3").is_file()))
}
