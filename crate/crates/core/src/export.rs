//! Serialized forms of a graph: canonical JSON, Graphviz DOT and per-edge
//! curve tables.
//!
//! The JSON document carries the lexicon and settings alongside nodes and
//! edges, so a graph loads back without any other input. Keys are sorted and
//! masses are written at full double precision; the same graph always
//! serializes to the same bytes.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CausalEdge, CausalGraph, ConceptNode, GraphError, GraphSettings};
use crate::grid::GridDistribution;
use crate::lexicon::{Lexicon, LexiconConfig, LexiconError};

pub const FORMAT_VERSION: u32 = 1;

/// Upper bound on the DOT `penwidth` attribute.
pub const MAX_PEN_WIDTH: f64 = 8.0;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error("invalid graph document: {0}")]
    Json(#[from] serde_json::Error),

    #[error("unsupported graph format version {0}")]
    Version(u32),

    #[error(transparent)]
    Lexicon(#[from] LexiconError),

    #[error(transparent)]
    Graph(#[from] GraphError),

    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDocument {
    format_version: u32,
    resolution: usize,
    settings: GraphSettings,
    lexicon: LexiconConfig,
    nodes: Vec<ConceptNode>,
    edges: Vec<EdgeDocument>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDocument {
    source: String,
    target: String,
    observations: Vec<String>,
    observation_count: usize,
    conflicted: bool,
    posterior: GridDistribution,
}

pub fn graph_to_json(graph: &CausalGraph) -> String {
    let doc = GraphDocument {
        format_version: FORMAT_VERSION,
        resolution: graph.resolution(),
        settings: *graph.settings(),
        lexicon: graph.lexicon().to_config(),
        nodes: graph.nodes().cloned().collect(),
        edges: graph
            .edges()
            .map(|e| EdgeDocument {
                source: e.source().to_string(),
                target: e.target().to_string(),
                observations: e.observations().to_vec(),
                observation_count: e.observation_count(),
                conflicted: e.is_conflicted(),
                posterior: e.posterior().clone(),
            })
            .collect(),
    };
    // Going through `Value` sorts every object's keys.
    let value = serde_json::to_value(&doc).expect("graph document is always serializable");
    let mut text = serde_json::to_string(&value).expect("json value is always serializable");
    text.push('\n');
    text
}

pub fn graph_from_json(text: &str) -> Result<CausalGraph, ExportError> {
    let doc: GraphDocument = serde_json::from_str(text)?;
    if doc.format_version != FORMAT_VERSION {
        return Err(ExportError::Version(doc.format_version));
    }
    let lexicon = Arc::new(Lexicon::from_config(&doc.lexicon, doc.resolution)?);
    let mut edges = Vec::with_capacity(doc.edges.len());
    for e in doc.edges {
        if e.observation_count != e.observations.len() {
            return Err(GraphError::Inconsistent(format!(
                "edge {} -> {} claims {} observations but lists {}",
                e.source,
                e.target,
                e.observation_count,
                e.observations.len()
            ))
            .into());
        }
        edges.push(CausalEdge::from_parts(
            e.source,
            e.target,
            e.observations,
            e.posterior,
            e.conflicted,
        ));
    }
    Ok(CausalGraph::from_parts(
        lexicon,
        doc.settings,
        doc.nodes,
        edges,
    )?)
}

/// `1 + log2(observations)`, capped at [`MAX_PEN_WIDTH`].
pub fn pen_width(observation_count: usize) -> f64 {
    (1.0 + (observation_count.max(1) as f64).log2()).min(MAX_PEN_WIDTH)
}

fn dot_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Graphviz description: one statement per node and per edge. Edges are
/// labeled with the best-matching adverb, the MAP and the entropy.
pub fn graph_to_dot(graph: &CausalGraph) -> Result<String, ExportError> {
    let mut out = String::from("digraph pondered {\n  rankdir=LR;\n  node [shape=box];\n");
    for node in graph.nodes() {
        writeln!(
            out,
            "  {} [label={}];",
            dot_quote(&node.id),
            dot_quote(&node.label)
        )
        .unwrap();
    }
    for edge in graph.edges() {
        let report = graph.edge_report(edge.source(), edge.target())?;
        let label = format!(
            "{} (MAP={:.3}, H={:.3})",
            report.best_adverb, report.map, report.entropy
        );
        let mut attrs = format!(
            "label={}, penwidth={:.3}",
            dot_quote(&label),
            pen_width(edge.observation_count())
        );
        if report.contradiction {
            attrs.push_str(", style=dashed");
        }
        writeln!(
            out,
            "  {} -> {} [{}];",
            dot_quote(edge.source()),
            dot_quote(edge.target()),
            attrs
        )
        .unwrap();
    }
    out.push_str("}\n");
    Ok(out)
}

/// CSV with columns `source,target,x,p`: one row per grid cell per edge.
pub fn graph_to_curves(graph: &CausalGraph) -> Result<String, ExportError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(["source", "target", "x", "p"])?;
    for edge in graph.edges() {
        for (x, p) in edge.posterior().points() {
            writer.write_record([edge.source(), edge.target(), &x.to_string(), &p.to_string()])?;
        }
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| csv::Error::from(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv writer only emits the UTF-8 it was given"))
}

/// Every export of one graph, rendered together.
#[derive(Debug, Clone, PartialEq)]
pub struct ExportBundle {
    pub graph_json: String,
    pub dot_text: String,
    pub edge_curves: String,
}

impl ExportBundle {
    pub fn from_graph(graph: &CausalGraph) -> Result<Self, ExportError> {
        Ok(Self {
            graph_json: graph_to_json(graph),
            dot_text: graph_to_dot(graph)?,
            edge_curves: graph_to_curves(graph)?,
        })
    }
}
