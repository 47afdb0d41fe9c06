//! `inetc`: validate, run, explore and export interaction-net documents, or
//! serve them over HTTP.
//!
//! Results go to standard output as `key=value` lines, diagnostics to
//! standard error. Exit codes: 0 success, 1 invalid input or strategy
//! failure, 2 I/O error, 3 step limit exceeded.

use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use inetc_core::strategy::{eval, EvalConfig, EvalError, Status, DEFAULT_STAR_CAP};
use inetc_core::textio::{
    check_document, export_dot, export_trace_json, net_to_json, print_document_with_base,
    strategy_for, Diagnostic,
};
use inetc_core::trace::{NodeId, TraceError};
use inetc_core::{iso_equal, Document, Net, RedexSet, RuleSet};
use inetc_service::ServiceConfig;

#[derive(Parser)]
#[command(name = "inetc", version, about = "Interaction-net rewriting engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a document.
    Validate {
        path: PathBuf,
        /// Net used as the base model.
        #[arg(long, default_value = "main")]
        net: String,
    },
    /// Run a strategy from the base model.
    Run {
        path: PathBuf,
        /// A strategy expression, or the name of one of the document's
        /// strategies.
        #[arg(long)]
        strategy: String,
        #[arg(long, default_value = "main")]
        net: String,
        /// Bound on the iterations of any single `*`.
        #[arg(long, env = "INETC_MAX_STEPS", default_value_t = DEFAULT_STAR_CAP,
              value_parser = clap::value_parser!(u64).range(1..))]
        max_steps: u64,
        /// Final net; `.json` and `.dot` select those formats, anything
        /// else gets the document text.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Trace JSON of the run. Without it no intermediate nets are kept.
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Explore every rewrite breadth-first from the base model.
    Explore {
        path: PathBuf,
        #[arg(long, default_value = "main")]
        net: String,
        #[arg(long, default_value_t = 1)]
        depth: usize,
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Export one net as DOT or JSON.
    Export {
        path: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
        #[arg(long, default_value = "main")]
        net: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Start the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Write each document's text here after every change.
        #[arg(long)]
        persist_dir: Option<PathBuf>,
        #[arg(long, default_value_t = inetc_service::DEFAULT_MAX_BODY)]
        max_body: usize,
        #[arg(long, env = "INETC_MAX_STEPS", default_value_t = DEFAULT_STAR_CAP,
              value_parser = clap::value_parser!(u64).range(1..))]
        max_steps: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

/// A failed command: its exit code, with the message already printed.
struct Exit(u8);

const INVALID: Exit = Exit(1);
const IO: Exit = Exit(2);
const STEP_LIMIT: Exit = Exit(3);

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { path, net } => load(&path, &net).map(drop),
        Command::Run {
            path,
            strategy,
            net,
            max_steps,
            out,
            trace_out,
        } => run(
            &path,
            &strategy,
            &net,
            max_steps,
            out.as_deref(),
            trace_out.as_deref(),
        ),
        Command::Explore {
            path,
            net,
            depth,
            trace_out,
        } => explore(&path, &net, depth, trace_out.as_deref()),
        Command::Export {
            path,
            format,
            net,
            out,
        } => export(&path, format, &net, out.as_deref()),
        Command::Serve {
            port,
            persist_dir,
            max_body,
            max_steps,
        } => serve(
            port,
            ServiceConfig {
                max_body,
                max_steps,
                persist_dir,
            },
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Exit(code)) => ExitCode::from(code),
    }
}

fn read(path: &Path) -> Result<String, Exit> {
    fs::read_to_string(path).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        IO
    })
}

fn write(path: &Path, text: &str) -> Result<(), Exit> {
    fs::write(path, text).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        IO
    })
}

fn report(file: &str, diags: &[Diagnostic]) {
    for d in diags {
        eprintln!("{file}:{d}");
    }
}

fn load(path: &Path, base: &str) -> Result<Document, Exit> {
    let text = read(path)?;
    check_document(&text, base).map_err(|diags| {
        report(&path.display().to_string(), &diags);
        INVALID
    })
}

fn normal_form(net: &Net, rules: &RuleSet) -> bool {
    net.find_active_pairs()
        .iter()
        .all(|r| rules.for_pair(r.symbols.0, r.symbols.1).is_none())
}

fn write_net(path: &Path, doc: &Document, net: &Net) -> Result<(), Exit> {
    let text = match path.extension().and_then(|e| e.to_str()) {
        Some("json") => net_to_json(net) + "\n",
        Some("dot") => export_dot(net),
        _ => print_document_with_base(doc, net),
    };
    write(path, &text)
}

fn run(
    path: &Path,
    strategy: &str,
    base: &str,
    max_steps: u64,
    out: Option<&Path>,
    trace_out: Option<&Path>,
) -> Result<(), Exit> {
    let mut doc = load(path, base)?;
    let (expr, name) = strategy_for(&doc, strategy).map_err(|d| {
        report("--strategy", &[d]);
        INVALID
    })?;
    let config = EvalConfig {
        star_cap: max_steps,
    };
    let eval_error = |e: EvalError| {
        eprintln!("{}: {e}", path.display());
        match e {
            EvalError::StepLimitExceeded(_) => STEP_LIMIT,
            _ => INVALID,
        }
    };

    let (status, steps, net) = if trace_out.is_some() {
        let (status, nodes) = doc
            .run_strategy(NodeId::ROOT, &expr, name.as_deref(), &config)
            .map_err(|e| match e {
                TraceError::Eval(e) => eval_error(e),
                other => {
                    eprintln!("{}: {other}", path.display());
                    INVALID
                }
            })?;
        let trace = doc.trace();
        let steps: usize = nodes
            .iter()
            .map(|n| {
                trace
                    .get(*n)
                    .and_then(|v| v.label)
                    .map_or(0, |l| l.rewrites.len())
            })
            .sum();
        let last = nodes.last().copied().unwrap_or(NodeId::ROOT);
        let net = Net::clone(trace.get(last).expect("recorded node").net);
        (status, steps, net)
    } else {
        let expr = inetc_core::strategy::elaborate(&expr).map_err(|e| {
            eprintln!("{}: {e}", path.display());
            INVALID
        })?;
        let mut net = doc.m0().clone();
        let mut redexes = RedexSet::new(&net);
        let outcome =
            eval(&mut net, &mut redexes, doc.rules(), &expr, &config).map_err(eval_error)?;
        (outcome.status, outcome.rewrite_count(), net)
    };

    println!("status={}", status.as_str());
    println!("steps={steps}");
    println!("normal_form={}", normal_form(&net, doc.rules()));
    if let Some(out) = out {
        write_net(out, &doc, &net)?;
    }
    if let Some(t) = trace_out {
        write(t, &(export_trace_json(&doc) + "\n"))?;
    }
    match status {
        Status::Success => Ok(()),
        Status::Failure => Err(INVALID),
    }
}

fn explore(path: &Path, base: &str, depth: usize, trace_out: Option<&Path>) -> Result<(), Exit> {
    let mut doc = load(path, base)?;
    let levels = doc.explore_to_depth(depth).map_err(|e| {
        eprintln!("{}: {e}", path.display());
        INVALID
    })?;
    let trace = doc.trace();
    println!("nodes={}", trace.len());
    println!("edges={}", trace.edges().count());
    for (d, level) in levels.iter().enumerate().skip(1) {
        let mut classes: Vec<&Net> = Vec::new();
        for id in level {
            let net = trace.get(*id).expect("explored node").net.as_ref();
            if !classes.iter().any(|c| iso_equal(c, net)) {
                classes.push(net);
            }
        }
        println!("depth_{d}_nodes={}", level.len());
        println!("depth_{d}_iso_classes={}", classes.len());
    }
    if let Some(t) = trace_out {
        write(t, &(export_trace_json(&doc) + "\n"))?;
    }
    Ok(())
}

fn export(path: &Path, format: Format, name: &str, out: Option<&Path>) -> Result<(), Exit> {
    let text = read(path)?;
    // Any net may be exported, so validate with the requested one as base.
    let doc = check_document(&text, name).map_err(|diags| {
        report(&path.display().to_string(), &diags);
        INVALID
    })?;
    let net = &doc.nets()[name];
    let text = match format {
        Format::Dot => export_dot(net),
        Format::Json => net_to_json(net) + "\n",
    };
    match out {
        Some(out) => write(out, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn serve(port: u16, config: ServiceConfig) -> Result<(), Exit> {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| {
        eprintln!("{e}");
        IO
    })?;
    let addr = SocketAddr::from(([127, 0, 0, 1], port));
    eprintln!("listening on http://{addr}");
    runtime
        .block_on(inetc_service::serve(addr, config))
        .map_err(|e| {
            eprintln!("{addr}: {e}");
            IO
        })
}
