use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use ponder_core::export::{graph_from_json, graph_to_curves, graph_to_dot, graph_to_json};
use ponder_core::graph::{CausalGraph, GraphError};
use ponder_core::ingest::{read_corpus, serialize_relations, IngestError};
use ponder_core::lexicon::Lexicon;
use ponder_core::synth::{generate_synthetic, SyntheticConfig};
use ponder_core::DEFAULT_RESOLUTION;

const EXIT_ERROR: u8 = 1;
const EXIT_EMPTY_CORPUS: u8 = 2;
const EXIT_NO_PATH: u8 = 3;

const DEFAULT_MAX_HOPS: usize = 6;

/// Build and query causal graphs whose edges carry distributions over
/// certainty factors.
#[derive(Parser, Debug)]
#[command(name = "ponder", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a graph from a relation corpus and write it as JSON.
    Build {
        #[arg(long)]
        corpus: PathBuf,
        /// Lexicon TOML file; the shipped lexicon is used when omitted.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
        resolution: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compose edge posteriors along every simple path between two concepts.
    Query {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long = "from")]
        source: String,
        #[arg(long = "to")]
        target: String,
        #[arg(long, default_value_t = DEFAULT_MAX_HOPS)]
        max_hops: usize,
        /// Print machine-readable JSON instead of text blocks.
        #[arg(long)]
        json: bool,
    },
    /// Export a graph as dot, json or curves (CSV of per-edge distributions).
    Export {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        format: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic relation corpus.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        lexicon: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Display) -> Self {
        Self {
            code,
            message: message.to_string(),
        }
    }

    fn error(message: impl Display) -> Self {
        Self::new(EXIT_ERROR, message)
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_ERROR)
            } else {
                ExitCode::SUCCESS
            };
        }
    };

    let result = match cli.command {
        Command::Build {
            corpus,
            lexicon,
            resolution,
            out,
        } => build(&corpus, lexicon.as_deref(), resolution, &out),
        Command::Query {
            graph,
            source,
            target,
            max_hops,
            json,
        } => query(&graph, &source, &target, max_hops, json),
        Command::Export { graph, format, out } => export(&graph, &format, &out),
        Command::Synth {
            config,
            lexicon,
            out,
        } => synth(&config, lexicon.as_deref(), &out),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn load_lexicon(path: Option<&Path>, resolution: usize) -> Result<Lexicon, Failure> {
    match path {
        Some(path) => Lexicon::load(path, resolution),
        None => Lexicon::default_at(resolution),
    }
    .map_err(Failure::error)
}

fn load_graph(path: &Path) -> Result<CausalGraph, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::error(format!("cannot read {}: {e}", path.display())))?;
    graph_from_json(&text).map_err(|e| Failure::error(format!("{}: {e}", path.display())))
}

fn write_output(path: &Path, contents: &str) -> CmdResult {
    std::fs::write(path, contents)
        .map_err(|e| Failure::error(format!("cannot write {}: {e}", path.display())))
}

fn build(corpus: &Path, lexicon: Option<&Path>, resolution: usize, out: &Path) -> CmdResult {
    let lexicon = Arc::new(load_lexicon(lexicon, resolution)?);
    let parsed = match read_corpus(corpus) {
        Ok(parsed) => parsed,
        Err(IngestError::EmptyCorpus { diagnostics }) => {
            for d in &diagnostics {
                eprintln!("warning: {d}");
            }
            return Err(Failure::new(
                EXIT_EMPTY_CORPUS,
                format!("{}: no valid relations", corpus.display()),
            ));
        }
        Err(e) => return Err(Failure::error(format!("{}: {e}", corpus.display()))),
    };
    for d in &parsed.diagnostics {
        eprintln!("warning: {d}");
    }

    let (graph, report) = CausalGraph::from_records(lexicon, &parsed.records);
    for (index, err) in &report.rejected {
        eprintln!("warning: line {}: {err}", parsed.lines[*index]);
    }
    for (index, _) in &report.contradictions {
        let r = &parsed.records[*index];
        eprintln!(
            "warning: line {}: {:?} conflicts with earlier evidence for {} -> {}; edge reset to uniform",
            parsed.lines[*index], r.adverb, r.cause, r.effect
        );
    }
    if report.observations == 0 {
        return Err(Failure::new(
            EXIT_EMPTY_CORPUS,
            format!("{}: no relation could be ingested", corpus.display()),
        ));
    }

    write_output(out, &graph_to_json(&graph))?;
    println!("nodes: {}", graph.node_count());
    println!("edges: {}", graph.edge_count());
    println!("observations: {}", report.observations);
    println!("contradictions: {}", graph.contradiction_count());
    println!("mean entropy: {:.4} nats", graph.mean_entropy());
    Ok(())
}

fn query(graph: &Path, source: &str, target: &str, max_hops: usize, json: bool) -> CmdResult {
    let graph = load_graph(graph)?;
    let paths = graph
        .find_paths(source, target, max_hops)
        .map_err(Failure::error)?;
    if paths.is_empty() {
        return Err(Failure::new(
            EXIT_NO_PATH,
            format!("no directed path from {source:?} to {target:?} within {max_hops} hops"),
        ));
    }
    let results = paths
        .iter()
        .map(|p| graph.compose_path(p))
        .collect::<Result<Vec<_>, GraphError>>()
        .map_err(Failure::error)?;

    if json {
        let text = serde_json::to_string_pretty(&results).map_err(Failure::error)?;
        println!("{text}");
        return Ok(());
    }
    for (i, r) in results.iter().enumerate() {
        if i > 0 {
            println!();
        }
        println!("path: {}", r.path.join(" -> "));
        println!("  map: {:.4}", r.map_value);
        println!("  best adverb: {} (kl {:.4})", r.best_adverb, r.divergence);
        println!("  entropy: {:.4} nats", r.entropy_value);
        println!(
            "  contradiction: {}",
            if r.contradiction_flag { "yes" } else { "no" }
        );
    }
    Ok(())
}

fn export(graph: &Path, format: &str, out: &Path) -> CmdResult {
    if !matches!(format, "dot" | "json" | "curves") {
        return Err(Failure::error(format!(
            "unknown export format {format:?} (expected dot, json or curves)"
        )));
    }
    let graph = load_graph(graph)?;
    let text = match format {
        "dot" => graph_to_dot(&graph),
        "curves" => graph_to_curves(&graph),
        _ => Ok(graph_to_json(&graph)),
    }
    .map_err(Failure::error)?;
    write_output(out, &text)
}

fn synth(config: &Path, lexicon: Option<&Path>, out: &Path) -> CmdResult {
    let config = SyntheticConfig::load(config).map_err(Failure::error)?;
    let lexicon = load_lexicon(lexicon, DEFAULT_RESOLUTION)?;
    let records = generate_synthetic(&config, &lexicon).map_err(Failure::error)?;
    write_output(out, &serialize_relations(&records))
}
