// SPDX-License-Identifier: Apache-2.0

use std::io::{self, BufRead, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use ifog_core::arcadian::{compact, import_run, mu_bound, write_csv, CompactionRow};
use ifog_core::game::Branch;
use ifog_core::kripke::ModelFile;
use ifog_core::service::{
    self, parse_formula, parse_state, DecisionRequest, MoveRequest, ServiceError, SessionManager,
    SessionMode, SessionStatus, SessionView,
};
use ifog_core::smp::{s_of, Caps, FormulaClass, CAPS_ENV};

#[derive(Parser)]
#[command(
    name = "ifog",
    version,
    about = "Intuitionistic first-order games and deciders"
)]
struct Cli {
    /// Default budgets, e.g. `model=5,depth=12,nodes=200000`.
    #[arg(long, global = true, env = CAPS_ENV, value_name = "CAPS")]
    caps: Option<Caps>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Budget {
    #[arg(long)]
    max_model: Option<usize>,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    max_nodes: Option<u64>,
}

impl Budget {
    fn apply(&self, mut caps: Caps) -> Caps {
        if let Some(n) = self.max_model {
            caps.max_model = n;
        }
        if let Some(d) = self.max_depth {
            caps.max_depth = d;
        }
        if let Some(n) = self.max_nodes {
            caps.max_nodes = n;
        }
        caps
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a formula and print its canonical form.
    Parse { formula: String },
    /// Validate a model file; optionally evaluate a closed formula at a state.
    CheckModel {
        model: PathBuf,
        #[arg(short, long)]
        formula: Option<String>,
        #[arg(long, default_value = "c0")]
        state: String,
    },
    /// Decide satisfiability within a class.
    Decide {
        #[arg(short, long)]
        formula: String,
        /// Axiom file, one closed formula per line.
        #[arg(long)]
        class: Option<PathBuf>,
        #[command(flatten)]
        budget: Budget,
        /// Attach the model or the proof of the negation.
        #[arg(long)]
        witness: bool,
    },
    /// Decide provability.
    Prove {
        #[arg(short, long)]
        formula: String,
        #[command(flatten)]
        budget: Budget,
    },
    /// Play a game in the terminal.
    Play {
        #[arg(short, long)]
        formula: String,
    },
    /// Compact a run trace and report the eigenvariable bound.
    Compact {
        #[arg(long)]
        trace: PathBuf,
        /// Write the statistics row here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value = "t0")]
        id: String,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
    },
}

type Failure = (u8, String);

fn input<E: std::fmt::Display>(e: E) -> Failure {
    (1, e.to_string())
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| (1, format!("{}: {e}", path.display())))
}

fn print_json<T: serde::Serialize>(v: &T) {
    println!("{}", serde_json::to_string(v).expect("serializable"));
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let caps = cli.caps.unwrap_or_default();
    match cli.cmd {
        Cmd::Parse { formula } => {
            let f = parse_formula(&formula).map_err(input)?;
            let free: Vec<String> = f.free_vars().iter().map(|v| v.to_string()).collect();
            print_json(&json!({
                "formula": f.to_string(),
                "nodes": f.node_count(),
                "free_vars": free,
            }));
            Ok(0)
        }
        Cmd::CheckModel {
            model,
            formula,
            state,
        } => {
            let mf: ModelFile = serde_json::from_str(&read(&model)?).map_err(input)?;
            let m = mf.to_model_unchecked();
            let violations: Vec<String> = m.validate().iter().map(|v| v.to_string()).collect();
            let mut out = json!({
                "valid": violations.is_empty(),
                "size": m.size(),
                "violations": violations,
            });
            if let (Some(text), true) = (formula, violations.is_empty()) {
                let f = parse_formula(&text).map_err(input)?;
                if !f.is_closed() {
                    return Err((1, format!("{f} has free variables")));
                }
                let s = parse_state(&state).map_err(input)?;
                let forced = m.satisfies(s, &Default::default(), &f).map_err(input)?;
                out["forced"] = json!(forced);
            }
            print_json(&out);
            Ok(if violations.is_empty() { 0 } else { 1 })
        }
        Cmd::Decide {
            formula,
            class,
            budget,
            witness,
        } => {
            let axioms = match class {
                Some(p) => {
                    let text = read(&p)?;
                    FormulaClass::parse_axioms("file", &text).map_err(input)?;
                    text.lines()
                        .map(str::trim)
                        .filter(|l| !l.is_empty() && !l.starts_with('#'))
                        .map(String::from)
                        .collect()
                }
                None => Vec::new(),
            };
            let req = DecisionRequest {
                formula,
                axioms,
                caps: Some(budget.apply(caps)),
            };
            let r = service::decide(&req, witness).map_err(input)?;
            print_json(&r);
            Ok(if r.is_decided() { 0 } else { 2 })
        }
        Cmd::Prove { formula, budget } => {
            let req = DecisionRequest {
                formula,
                axioms: Vec::new(),
                caps: Some(budget.apply(caps)),
            };
            let r = service::prove(&req).map_err(input)?;
            print_json(&r);
            Ok(if r.is_decided() { 0 } else { 2 })
        }
        Cmd::Play { formula } => play(&formula, &caps),
        Cmd::Compact { trace, csv, id } => {
            let run = import_run(&read(&trace)?).map_err(input)?;
            let phi = run
                .positions
                .first()
                .map(|p| p.target().clone())
                .ok_or_else(|| (1, "empty run".to_string()))?;
            let s = s_of(&phi, &FormulaClass::all(), &caps).map_err(|e| (2, e.to_string()))?;
            let bound = mu_bound(&phi, s.value);
            let out = compact(&run);
            for p in &out.positions {
                eprintln!("{p}");
            }
            let row = CompactionRow::measure(&id, &run, &out, &bound);
            match csv {
                Some(path) => {
                    let f = std::fs::File::create(&path).map_err(input)?;
                    write_csv(f, &[row]).map_err(input)?;
                }
                None => write_csv(io::stdout(), &[row]).map_err(input)?,
            }
            Ok(0)
        }
        Cmd::Serve { port, host } => {
            let addr = SocketAddr::new(host, port);
            let rt = tokio::runtime::Runtime::new().map_err(input)?;
            eprintln!("listening on {addr}");
            rt.block_on(service::http::serve(addr, caps))
                .map_err(input)?;
            Ok(0)
        }
    }
}

fn show(v: &SessionView) {
    let gamma = if v.position.assumptions.is_empty() {
        "-".to_string()
    } else {
        v.position.assumptions.join(" ; ")
    };
    println!("{gamma} |- {}", v.position.target);
    if let Some(r) = &v.afrodite_reply {
        println!("afrodite: {} ({})", r.branch, r.reason);
    }
    if let (Some(s), Some(c), Some(m)) = (&v.model_state, v.classes, v.max_classes) {
        println!("state {s}, classes {c}/{m}");
    }
}

/// Numbered moves on stdout, one choice per stdin line.
fn play(formula: &str, caps: &Caps) -> Result<u8, Failure> {
    let sessions = SessionManager::new();
    let mut v = sessions.create(formula, caps).map_err(input)?;
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    loop {
        show(&v);
        if v.status == SessionStatus::ErosWon {
            println!("eros wins");
            return Ok(0);
        }
        let req = match v.mode {
            SessionMode::HumanEros => {
                if v.legal_moves.is_empty() {
                    println!("no moves left; afrodite survives");
                    return Ok(0);
                }
                for (i, m) in v.legal_moves.iter().enumerate() {
                    let var = m
                        .var
                        .as_deref()
                        .map(|x| format!(" with {x}"))
                        .unwrap_or_default();
                    println!("  {}: {} on {}{var}", i + 1, m.rule, m.selected);
                }
                print!("move> ");
                io::stdout().flush().ok();
                let Some(line) = lines.next() else {
                    return Ok(0);
                };
                let line = line.map_err(input)?;
                let Ok(k) = line.trim().parse::<usize>() else {
                    println!("enter a move number");
                    continue;
                };
                let Some(m) = k.checked_sub(1).and_then(|i| v.legal_moves.get(i)) else {
                    println!("no move {k}");
                    continue;
                };
                MoveRequest {
                    rule: Some(m.rule.clone()),
                    selected: Some(m.selected.clone()),
                    var: m.var.clone(),
                    ..Default::default()
                }
            }
            SessionMode::HumanAfrodite => {
                let Some(p) = &v.pending_eros_move else {
                    println!("eros is stuck");
                    return Ok(0);
                };
                println!("eros plays {} on {}", p.rule, p.selected);
                print!("branch (left/right)> ");
                io::stdout().flush().ok();
                let Some(line) = lines.next() else {
                    return Ok(0);
                };
                let line = line.map_err(input)?;
                let Ok(b) = line.trim().parse::<Branch>() else {
                    println!("enter left or right");
                    continue;
                };
                MoveRequest {
                    branch: Some(b),
                    ..Default::default()
                }
            }
        };
        match sessions.play(&v.id, &req) {
            Ok(next) => v = next,
            Err(e @ ServiceError::IllegalMove { .. }) => println!("{e}"),
            Err(e) => return Err(input(e)),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
