//! `arbor`: batch discovery, incremental extension, conformance checking,
//! format conversion and the session server.

mod select;

use std::fmt::Write as _;
use std::io::{IsTerminal, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use arbor_core::alignment::{conformance_report, is_fitting, Verdict};
use arbor_core::event_log::{extract_variants, parse_xes_file, TraceVariant};
use arbor_core::incremental::{add_trace, AddedTraceSet};
use arbor_core::inductive_miner::discover_from_variants;
use arbor_core::petri_net::{serialize_pnml, LabeledPetriNet};
use arbor_core::process_tree::{parse_ptml, serialize_ptml, ProcessTree, Severity};
use arbor_server::{serve, ServerConfig, DEFAULT_HISTORY_CAP};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::select::Selector;

const EXIT_INPUT: u8 = 2;
const EXIT_SELECTION: u8 = 3;
const EXIT_CONSISTENCY: u8 = 4;
const EXIT_ENVIRONMENT: u8 = 5;

#[derive(Debug, Parser)]
#[command(name = "arbor", version, about = "Interactive process discovery from the command line")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// List the trace variants of a log, most frequent first.
    Variants {
        log: PathBuf,
        #[arg(long, value_enum, default_value_t = TableFormat::Tsv)]
        format: TableFormat,
    },
    /// Discover a process tree from selected variants.
    Discover {
        log: PathBuf,
        /// `top:N`, `ids:1,4,7` or `share>=0.05`.
        #[arg(long, short)]
        select: Selector,
        /// PTML output file; stdout if omitted.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Extend a tree so it also accepts the selected variants.
    Extend {
        log: PathBuf,
        tree: PathBuf,
        #[arg(long, short)]
        select: Selector,
        /// Variants added earlier, which the tree must still accept.
        #[arg(long)]
        added: Option<Selector>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Check which variants the tree accepts.
    Check {
        log: PathBuf,
        tree: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Convert a PTML tree to a PNML workflow net.
    Convert {
        tree: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Run the HTTP session service until interrupted.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: std::net::IpAddr,
        /// Built UI assets served for non-API paths.
        #[arg(long)]
        static_dir: Option<PathBuf>,
        /// Sessions are restored from and saved to this directory.
        #[arg(long)]
        state_dir: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_HISTORY_CAP)]
        history_cap: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TableFormat {
    Tsv,
    Json,
}

/// An error with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

trait ExitWith<T> {
    fn exit_with(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> ExitWith<T> for Result<T, E> {
    fn exit_with(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure { code, error: e.into() })
    }
}

fn color_enabled() -> bool {
    std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty()) && std::io::stdout().is_terminal()
}

fn paint(text: &str, ansi: &str, color: bool) -> String {
    if color {
        format!("\x1b[{ansi}m{text}\x1b[0m")
    } else {
        text.to_string()
    }
}

fn load_variants(path: &Path) -> Result<Vec<TraceVariant>, Failure> {
    let log = parse_xes_file(path)
        .with_context(|| format!("cannot read event log {}", path.display()))
        .exit_with(EXIT_INPUT)?;
    Ok(extract_variants(&log))
}

fn load_tree(path: &Path) -> Result<ProcessTree, Failure> {
    let bytes = std::fs::read(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .exit_with(EXIT_INPUT)?;
    let tree = parse_ptml(&bytes)
        .with_context(|| format!("cannot parse PTML {}", path.display()))
        .exit_with(EXIT_INPUT)?;
    let errors: Vec<String> = tree
        .validate()
        .into_iter()
        .filter(|v| v.severity == Severity::Error)
        .map(|v| format!("{:?} at {}", v.code, v.path))
        .collect();
    if !errors.is_empty() {
        return Err(anyhow!("{} is not a valid process tree: {}", path.display(), errors.join(", ")))
            .exit_with(EXIT_INPUT);
    }
    Ok(tree)
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match path {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display())),
        None => std::io::stdout().write_all(bytes).context("cannot write to stdout"),
    }
    .exit_with(EXIT_ENVIRONMENT)
}

fn share(numerator: usize, denominator: usize) -> String {
    if denominator == 0 {
        "0".into()
    } else {
        format!("{:.6}", numerator as f64 / denominator as f64)
    }
}

fn total_cases(variants: &[TraceVariant]) -> usize {
    variants.iter().map(|v| v.case_count).sum()
}

fn cmd_variants(log: &Path, format: TableFormat) -> Result<(), Failure> {
    let variants = load_variants(log)?;
    let total = total_cases(&variants);
    let mut out = String::new();
    match format {
        TableFormat::Tsv => {
            out.push_str("id\tcount\tshare\tactivities\n");
            for v in &variants {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    v.variant_id,
                    v.case_count,
                    share(v.case_count, total),
                    v.activities.join(",")
                );
            }
        }
        TableFormat::Json => {
            let rows: Vec<_> = variants
                .iter()
                .map(|v| {
                    json!({
                        "id": v.variant_id,
                        "count": v.case_count,
                        "share": share(v.case_count, total),
                        "activities": v.activities,
                    })
                })
                .collect();
            out = serde_json::to_string_pretty(&rows).expect("json values serialize");
            out.push('\n');
        }
    }
    write_output(None, out.as_bytes())
}

/// Fails with the consistency exit code unless the tree accepts every
/// listed variant.
fn verify_fits(tree: &ProcessTree, variants: &[TraceVariant], ids: &[usize]) -> Result<(), Failure> {
    for &id in ids {
        let fits = is_fitting(tree, &variants[id].activities)
            .with_context(|| format!("cannot decide whether variant {id} fits"))
            .exit_with(EXIT_CONSISTENCY)?;
        if !fits {
            return Err(anyhow!("variant {id} is not accepted by the tree")).exit_with(EXIT_CONSISTENCY);
        }
        eprintln!("variant {id}: fits");
    }
    Ok(())
}

fn cmd_discover(log: &Path, selector: &Selector, output: Option<&Path>) -> Result<(), Failure> {
    let variants = load_variants(log)?;
    let ids = selector.resolve(&variants).exit_with(EXIT_SELECTION)?;
    let tree = discover_from_variants(ids.iter().map(|&id| &variants[id])).exit_with(EXIT_SELECTION)?;
    verify_fits(&tree, &variants, &ids)?;
    write_output(output, &serialize_ptml(&tree))
}

fn cmd_extend(
    log: &Path,
    tree: &Path,
    selector: &Selector,
    added: Option<&Selector>,
    output: Option<&Path>,
) -> Result<(), Failure> {
    let variants = load_variants(log)?;
    let mut tree = load_tree(tree)?;
    let selected = selector.resolve(&variants).exit_with(EXIT_SELECTION)?;
    let added = match added {
        Some(selector) => selector.resolve(&variants).exit_with(EXIT_SELECTION)?,
        None => Vec::new(),
    };
    verify_fits(&tree, &variants, &added).map_err(|f| Failure {
        error: f.error.context("the tree does not accept the previously added variants"),
        ..f
    })?;
    let mut added_set: AddedTraceSet = added.iter().map(|&id| variants[id].activities.clone()).collect();
    for &id in &selected {
        let trace = &variants[id].activities;
        tree = add_trace(&tree, &added_set, trace)
            .with_context(|| format!("cannot extend the tree with variant {id}"))
            .exit_with(EXIT_CONSISTENCY)?;
        added_set.insert(trace.clone());
    }
    let mut all: Vec<usize> = added.into_iter().chain(selected).collect();
    all.sort_unstable();
    all.dedup();
    verify_fits(&tree, &variants, &all)?;
    write_output(output, &serialize_ptml(&tree))
}

fn cmd_check(log: &Path, tree: &Path, as_json: bool) -> Result<(), Failure> {
    let variants = load_variants(log)?;
    let tree = load_tree(tree)?;
    let report = conformance_report(&tree, &variants).exit_with(EXIT_INPUT)?;
    let total = total_cases(&variants);
    let accepted: usize = report
        .iter()
        .filter(|(_, verdict)| *verdict == Verdict::Accepted)
        .map(|&(id, _)| variants[id].case_count)
        .sum();
    let mut out = String::new();
    if as_json {
        let rows: Vec<_> = report
            .iter()
            .map(|&(id, verdict)| {
                json!({ "id": id, "count": variants[id].case_count, "conformance": verdict })
            })
            .collect();
        let doc = json!({
            "variants": rows,
            "accepted_cases": accepted,
            "total_cases": total,
            "accepted_share": share(accepted, total),
        });
        out = serde_json::to_string_pretty(&doc).expect("json values serialize");
        out.push('\n');
    } else {
        let color = color_enabled();
        out.push_str("id\tcount\tconformance\n");
        for &(id, verdict) in &report {
            let word = match verdict {
                Verdict::Accepted => paint("accepted", "32", color),
                Verdict::Rejected => paint("rejected", "31", color),
                Verdict::Unknown => paint("unknown", "33", color),
            };
            let _ = writeln!(out, "{id}\t{}\t{word}", variants[id].case_count);
        }
        let _ = writeln!(out, "accepted cases: {accepted}/{total} ({})", share(accepted, total));
    }
    write_output(None, out.as_bytes())
}

fn cmd_convert(tree: &Path, output: Option<&Path>) -> Result<(), Failure> {
    let tree = load_tree(tree)?;
    let net = LabeledPetriNet::from_tree(&tree).exit_with(EXIT_INPUT)?;
    write_output(output, &serialize_pnml(&net))
}

fn cmd_serve(addr: SocketAddr, config: ServerConfig) -> Result<(), Failure> {
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_ansi(std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty()) && std::io::stderr().is_terminal())
        .init();
    let runtime = tokio::runtime::Runtime::new()
        .context("cannot start the async runtime")
        .exit_with(EXIT_ENVIRONMENT)?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .with_context(|| format!("cannot bind {addr}"))
            .exit_with(EXIT_ENVIRONMENT)?;
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
            tracing::info!("shutting down");
        };
        serve(listener, config, shutdown).await.exit_with(EXIT_ENVIRONMENT)
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Variants { log, format } => cmd_variants(&log, format),
        Command::Discover { log, select, output } => cmd_discover(&log, &select, output.as_deref()),
        Command::Extend { log, tree, select, added, output } => {
            cmd_extend(&log, &tree, &select, added.as_ref(), output.as_deref())
        }
        Command::Check { log, tree, json } => cmd_check(&log, &tree, json),
        Command::Convert { tree, output } => cmd_convert(&tree, output.as_deref()),
        Command::Serve { port, host, static_dir, state_dir, history_cap } => cmd_serve(
            SocketAddr::new(host, port),
            ServerConfig { state_dir, static_dir, history_cap },
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}
