use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::{Arc, Mutex};

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde_json::json;
use tangram_core::{
    builtin_levels, evaluate_description, parse_circuit, reduce, score_board, BoardFile, ComparisonMode, Engine,
    OutcomePolicy, ParseError,
};

#[derive(Parser)]
#[command(name = "tangram", version, about = "Verify and score MBQC tangram boards")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check that a board implements a circuit. Exit 0 if correct, 1 if not, 2 on unreadable input.
    Verify {
        circuit: PathBuf,
        board: PathBuf,
        #[arg(long, default_value = "unsigned")]
        mode: ComparisonMode,
        /// Seed for random measurement outcomes; all outcomes are +1 without it.
        #[arg(long, env = "ENGINE_SEED")]
        seed: Option<u64>,
        /// Print nothing, only set the exit status.
        #[arg(long)]
        quiet: bool,
    },
    /// Covered fraction and the score the board earns if it is correct.
    Score { board: PathBuf },
    /// Stabilizers of the circuit's output state, raw and canonical.
    Simulate { circuit: PathBuf },
    /// List the built-in levels.
    Levels,
    /// Speak the session protocol as newline-delimited JSON on stdin/stdout.
    Serve,
    /// Same protocol over HTTP: POST one request object to /rpc.
    Http {
        #[arg(long, default_value = "127.0.0.1:8787")]
        addr: String,
    },
}

/// Input problems: exit status 2.
struct Unreadable(String);

fn read(path: &Path) -> Result<String, Unreadable> {
    std::fs::read_to_string(path).map_err(|e| Unreadable(format!("{}: {e}", path.display())))
}

fn located(path: &Path, e: ParseError) -> Unreadable {
    Unreadable(format!("{}: {e}", path.display()))
}

fn load_board(path: &Path) -> Result<tangram_core::BoardDescription, Unreadable> {
    let text = read(path)?;
    BoardFile::parse(&text).and_then(|f| f.describe()).map_err(|e| located(path, e))
}

fn load_circuit(path: &Path) -> Result<tangram_core::Circuit, Unreadable> {
    parse_circuit(&read(path)?).map_err(|e| located(path, e))
}

fn print_json(v: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("values serialize"));
}

fn run(cmd: Cmd) -> Result<ExitCode, Unreadable> {
    match cmd {
        Cmd::Verify { circuit, board, mode, seed, quiet } => {
            let c = load_circuit(&circuit)?;
            let desc = load_board(&board)?;
            let mut policy = seed.map_or(OutcomePolicy::PlusOne, OutcomePolicy::seeded);
            let result = evaluate_description(&desc, &c, mode, &mut policy);
            if !quiet {
                print_json(&serde_json::to_value(&result).expect("results serialize"));
            }
            Ok(if result.correct { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Cmd::Score { board } => {
            let desc = load_board(&board)?;
            match desc.build() {
                Ok(b) => {
                    let (covered, score) = score_board(&b);
                    print_json(&json!({"covered_fraction": covered, "score_if_correct": score}));
                    Ok(ExitCode::SUCCESS)
                }
                Err(v) => {
                    print_json(&json!({"rule": v.rule(), "message": v.to_string()}));
                    Ok(ExitCode::from(1))
                }
            }
        }
        Cmd::Simulate { circuit } => {
            let t = load_circuit(&circuit)?.simulate();
            let rows = |t: &tangram_core::Tableau| t.stabilizers().iter().map(|r| r.to_string()).collect::<Vec<_>>();
            let canonical = reduce(&t).map_err(|e| Unreadable(e.to_string()))?;
            print_json(&json!({"n": t.num_qubits(), "stabilizers": rows(&t), "canonical": rows(&canonical)}));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Levels => {
            let list: Vec<_> = builtin_levels()
                .iter()
                .map(|l| json!({"id": l.id, "name": l.name, "n": l.circuit.num_qubits(), "grid": [l.grid.width, l.grid.height], "par": l.par}))
                .collect();
            print_json(&json!(list));
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Serve => serve_stdio().map_err(|e| Unreadable(format!("{e:#}"))),
        Cmd::Http { addr } => serve_http(&addr).map_err(|e| Unreadable(format!("{e:#}"))),
    }
}

fn serve_stdio() -> anyhow::Result<ExitCode> {
    let mut engine = Engine::from_env();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for line in std::io::stdin().lock().lines() {
        let line = line.context("reading stdin")?;
        if line.trim().is_empty() {
            continue;
        }
        writeln!(out, "{}", engine.handle_line(&line))?;
        out.flush()?;
    }
    Ok(ExitCode::SUCCESS)
}

async fn rpc(axum::extract::State(engine): axum::extract::State<Arc<Mutex<Engine>>>, body: String) -> impl axum::response::IntoResponse {
    let reply = engine.lock().unwrap_or_else(|p| p.into_inner()).handle_line(&body);
    ([(axum::http::header::CONTENT_TYPE, "application/json")], reply)
}

fn serve_http(addr: &str) -> anyhow::Result<ExitCode> {
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let engine = Arc::new(Mutex::new(Engine::from_env()));
        let app = axum::Router::new().route("/rpc", axum::routing::post(rpc)).with_state(engine);
        let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
        eprintln!("listening on http://{}/rpc", listener.local_addr()?);
        axum::serve(listener, app).await?;
        Ok(ExitCode::SUCCESS)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(code) => code,
        Err(Unreadable(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
