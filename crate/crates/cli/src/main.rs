use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use axum::body::Bytes;
use axum::http::{Method, StatusCode, Uri};
use axum::response::IntoResponse;
use axum::Router;
use calcdev::api::Api;
use calcdev::solver::{SolverConfig, SolverSettings};
use calcdev::{FiniteDomain, Prover, Session, SolverBridge};
use clap::{Parser, Subcommand};

const CONFIG_ENV: &str = "CALCDEV_SOLVER_CONFIG";

#[derive(Parser)]
#[command(name = "calcdev", version, about = "Derive guarded-command programs by calculation")]
struct Cli {
    /// Solver configuration (TOML). Defaults to $CALCDEV_SOLVER_CONFIG.
    #[arg(long, global = true)]
    solver_config: Option<PathBuf>,
    /// Use z3 from PATH instead of a configuration file.
    #[arg(long, global = true)]
    z3: bool,
    /// Write every SMT-LIB script sent to a solver into this directory.
    #[arg(long, global = true)]
    dump_smt: Option<PathBuf>,
    /// Run this script in batch mode; same as `run <script>`.
    #[arg(long)]
    script: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand)]
enum Command {
    /// Interactive session (the default).
    Repl,
    /// Run a script of tactics and commands; fails at the first error.
    Run {
        script: PathBuf,
        /// Save the resulting derivation document.
        #[arg(long)]
        save: Option<PathBuf>,
        /// Print the program of the final node.
        #[arg(long)]
        show: bool,
    },
    /// Replay a saved derivation document.
    Replay {
        document: PathBuf,
        /// Reuse the recorded verdicts instead of checking again.
        #[arg(long)]
        trust_replay: bool,
    },
    /// Serve the JSON API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
}

fn prover(cli: &Cli) -> Result<Arc<dyn Prover>> {
    let path = cli.solver_config.clone().or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let mut settings = match &path {
        Some(p) => SolverSettings::load(p).with_context(|| format!("loading {}", p.display()))?,
        None => SolverSettings::default(),
    };
    if cli.z3 {
        settings.solvers.push(SolverConfig::z3("z3"));
    }
    if let Some(d) = &cli.dump_smt {
        std::fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
        settings.dump_dir = Some(d.clone());
    }
    Ok(Arc::new(SolverBridge::new(settings, FiniteDomain::default())))
}

fn repl(prover: Arc<dyn Prover>) -> Result<()> {
    let mut s = Session::new("repl", prover);
    let stdin = std::io::stdin();
    let mut out = std::io::stdout();
    write!(out, "> ")?;
    out.flush()?;
    for line in stdin.lock().lines() {
        match s.execute(&line?) {
            Ok(r) if r.quit => break,
            Ok(r) if !r.text.is_empty() => println!("{}", r.text),
            Ok(_) => {}
            Err(e) => println!("error: {e}"),
        }
        write!(out, "> ")?;
        out.flush()?;
    }
    if s.is_dirty() {
        eprintln!("note: unsaved derivation discarded");
    }
    Ok(())
}

fn run(prover: Arc<dyn Prover>, script: &Path, save: Option<&Path>, show: bool) -> Result<()> {
    let text = std::fs::read_to_string(script).with_context(|| format!("reading {}", script.display()))?;
    let mut s = Session::new("batch", prover);
    for (k, line) in text.lines().enumerate() {
        match s.execute(line) {
            Ok(r) if r.quit => break,
            Ok(r) if !r.text.is_empty() => println!("{}", r.text),
            Ok(_) => {}
            Err(e) => bail!("{}:{}: {e}", script.display(), k + 1),
        }
    }
    if show {
        println!("{}", s.execute(":show minimal")?.text);
    }
    if let Some(p) = save {
        s.save(p)?;
    }
    if s.tree().active_state().is_complete() {
        println!("derivation complete");
    }
    Ok(())
}

fn replay(prover: Arc<dyn Prover>, doc: &Path, trust: bool) -> Result<()> {
    let mut s = Session::new("replay", prover);
    s.load(doc, trust)?;
    println!("{}", s.tree().outline());
    println!("replayed {} nodes", s.tree().len());
    Ok(())
}

async fn serve(prover: Arc<dyn Prover>, host: &str, port: u16) -> Result<()> {
    let api = Arc::new(Api::new(prover));
    let app = Router::new().fallback(move |method: Method, uri: Uri, body: Bytes| {
        let api = api.clone();
        async move {
            let target = uri.path_and_query().map(|p| p.as_str().to_string()).unwrap_or_default();
            let body = String::from_utf8_lossy(&body).into_owned();
            // Tactic application runs the prover; keep it off the async workers.
            let r = tokio::task::spawn_blocking(move || api.handle(method.as_str(), &target, &body))
                .await
                .expect("request handler panicked");
            let status = StatusCode::from_u16(r.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
            (status, axum::Json(r.body)).into_response()
        }
    });
    let addr: SocketAddr = format!("{host}:{port}").parse().context("listen address")?;
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app).await?;
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let prover = prover(&cli)?;
    if let Some(script) = &cli.script {
        if cli.command.is_some() {
            bail!("--script cannot be combined with a subcommand");
        }
        return run(prover, script, None, true);
    }
    match &cli.command {
        None | Some(Command::Repl) => repl(prover),
        Some(Command::Run { script, save, show }) => run(prover, script, save.as_deref(), *show),
        Some(Command::Replay { document, trust_replay }) => replay(prover, document, *trust_replay),
        Some(Command::Serve { port, host }) => tokio::runtime::Runtime::new()?.block_on(serve(prover, host, *port)),
    }
}
