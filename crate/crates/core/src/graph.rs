//! Causal graphs whose edges carry distributions over certainty factors.
//!
//! Nodes are concepts; an edge `cause -> effect` stores every adverb it was
//! observed with and the posterior obtained by fusing those adverbs' priors.
//! The probability lives on the edge, not on the nodes: a node is not a random
//! variable and no joint distribution over nodes is ever formed.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{GridDistribution, GridError};
use crate::ingest::RelationRecord;
use crate::lexicon::{KlDirection, Lexicon, LexiconError};

/// Fraction of `ln R` above which a distribution counts as contradictory.
pub const DEFAULT_CONTRADICTION_THRESHOLD: f64 = 0.9;

/// Minimum [`GridDistribution::compatibility`] between an edge's posterior and
/// a new observation's prior before the two are treated as conflicting.
pub const DEFAULT_CONFLICT_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSettings {
    pub contradiction_threshold: f64,
    pub conflict_floor: f64,
    pub kl_direction: KlDirection,
}

impl Default for GraphSettings {
    fn default() -> Self {
        Self {
            contradiction_threshold: DEFAULT_CONTRADICTION_THRESHOLD,
            conflict_floor: DEFAULT_CONFLICT_FLOOR,
            kl_direction: KlDirection::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error(transparent)]
    Lexicon(#[from] LexiconError),

    #[error(transparent)]
    Grid(#[from] GridError),

    #[error("concept name is empty")]
    EmptyConcept,

    #[error("self-loop on {0:?}: cause and effect must differ")]
    SelfLoop(String),

    #[error("no edge {cause:?} -> {effect:?}")]
    MissingEdge { cause: String, effect: String },

    #[error("unknown node {0:?}")]
    UnknownNode(String),

    #[error("broken path: no edge {from:?} -> {to:?}")]
    BrokenPath { from: String, to: String },

    #[error("a path needs at least two nodes, got {0}")]
    PathTooShort(usize),

    #[error("max_hops must be at least 1")]
    ZeroHops,

    #[error("inconsistent graph data: {0}")]
    Inconsistent(String),
}

/// Lowercases, trims and collapses internal whitespace.
pub fn normalize_concept(name: &str) -> String {
    collapse_whitespace(name).to_lowercase()
}

fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptNode {
    pub id: String,
    pub label: String,
}

/// Why an observation could not be fused into an edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Conflict {
    /// The new prior puts almost no mass where the posterior lives.
    Incompatible { compatibility: f64 },
    /// The cell-wise product underflowed.
    Disjoint { left_map: f64, right_map: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObservationOutcome {
    Created,
    Fused,
    /// The edge was reset to the uniform distribution and flagged.
    Contradiction(Conflict),
}

fn fuse(
    posterior: &GridDistribution,
    prior: &GridDistribution,
    conflict_floor: f64,
) -> Result<Result<GridDistribution, Conflict>, GridError> {
    let compatibility = posterior.compatibility(prior)?;
    if compatibility < conflict_floor {
        return Ok(Err(Conflict::Incompatible { compatibility }));
    }
    match posterior.multiply_normalize(prior) {
        Ok(fused) => Ok(Ok(fused)),
        Err(GridError::DisjointEvidence {
            left_map,
            right_map,
        }) => Ok(Err(Conflict::Disjoint {
            left_map,
            right_map,
        })),
        Err(e) => Err(e),
    }
}

/// Folds a sequence of adverb observations into a posterior from scratch.
///
/// Returns the posterior and whether any step hit a conflict. This is the
/// single definition of edge state: [`CausalGraph::add_observation`] applies
/// the same step incrementally.
pub fn replay_observations<S: AsRef<str>>(
    lexicon: &Lexicon,
    observations: &[S],
    settings: &GraphSettings,
) -> Result<(GridDistribution, bool), GraphError> {
    let (first, rest) = observations
        .split_first()
        .ok_or_else(|| GraphError::Inconsistent("edge has no observations".into()))?;
    let mut posterior = lexicon.prior_of(first.as_ref())?.clone();
    let mut conflicted = false;
    for adverb in rest {
        let prior = lexicon.prior_of(adverb.as_ref())?;
        match fuse(&posterior, prior, settings.conflict_floor)? {
            Ok(next) => posterior = next,
            Err(_) => {
                posterior = GridDistribution::uniform(lexicon.resolution())?;
                conflicted = true;
            }
        }
    }
    Ok((posterior, conflicted))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CausalEdge {
    source: String,
    target: String,
    observations: Vec<String>,
    posterior: GridDistribution,
    conflicted: bool,
}

impl CausalEdge {
    pub(crate) fn from_parts(
        source: String,
        target: String,
        observations: Vec<String>,
        posterior: GridDistribution,
        conflicted: bool,
    ) -> Self {
        Self {
            source,
            target,
            observations,
            posterior,
            conflicted,
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn target(&self) -> &str {
        &self.target
    }

    /// Normalized adverb tokens in the order they were observed.
    pub fn observations(&self) -> &[String] {
        &self.observations
    }

    pub fn observation_count(&self) -> usize {
        self.observations.len()
    }

    pub fn posterior(&self) -> &GridDistribution {
        &self.posterior
    }

    /// Whether any fusion on this edge hit conflicting evidence.
    pub fn is_conflicted(&self) -> bool {
        self.conflicted
    }
}

/// Point summaries of one edge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeReport {
    pub source: String,
    pub target: String,
    pub map: f64,
    pub mean: f64,
    pub median: f64,
    pub entropy: f64,
    pub best_adverb: String,
    pub divergence: f64,
    pub observation_count: usize,
    pub contradiction: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathQueryResult {
    pub path: Vec<String>,
    #[serde(skip)]
    pub composed: GridDistribution,
    pub map_value: f64,
    pub best_adverb: String,
    pub divergence: f64,
    pub entropy_value: f64,
    pub contradiction_flag: bool,
}

#[derive(Debug, Default)]
pub struct BuildReport {
    pub observations: usize,
    /// Records that were skipped, by index into the input slice.
    pub rejected: Vec<(usize, GraphError)>,
    /// Records whose fusion hit conflicting evidence, by index.
    pub contradictions: Vec<(usize, Conflict)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CausalGraph {
    lexicon: Arc<Lexicon>,
    settings: GraphSettings,
    nodes: BTreeMap<String, ConceptNode>,
    edges: BTreeMap<(String, String), CausalEdge>,
}

impl CausalGraph {
    pub fn new(lexicon: Arc<Lexicon>) -> Self {
        Self::with_settings(lexicon, GraphSettings::default())
    }

    pub fn with_settings(lexicon: Arc<Lexicon>, settings: GraphSettings) -> Self {
        Self {
            lexicon,
            settings,
            nodes: BTreeMap::new(),
            edges: BTreeMap::new(),
        }
    }

    /// Builds a graph from records, skipping the ones that cannot be applied.
    pub fn from_records(lexicon: Arc<Lexicon>, records: &[RelationRecord]) -> (Self, BuildReport) {
        let mut graph = Self::new(lexicon);
        let report = graph.add_records(records);
        (graph, report)
    }

    pub(crate) fn from_parts(
        lexicon: Arc<Lexicon>,
        settings: GraphSettings,
        nodes: Vec<ConceptNode>,
        edges: Vec<CausalEdge>,
    ) -> Result<Self, GraphError> {
        let mut graph = Self::with_settings(lexicon, settings);
        for node in nodes {
            if node.id.is_empty() || node.id != normalize_concept(&node.id) {
                return Err(GraphError::Inconsistent(format!(
                    "node id {:?} is not normalized",
                    node.id
                )));
            }
            if graph.nodes.insert(node.id.clone(), node).is_some() {
                return Err(GraphError::Inconsistent("duplicate node id".into()));
            }
        }
        for edge in edges {
            for end in [&edge.source, &edge.target] {
                if !graph.nodes.contains_key(end) {
                    return Err(GraphError::UnknownNode(end.clone()));
                }
            }
            if edge.source == edge.target {
                return Err(GraphError::SelfLoop(edge.source));
            }
            if edge.observations.is_empty() {
                return Err(GraphError::Inconsistent(format!(
                    "edge {} -> {} has no observations",
                    edge.source, edge.target
                )));
            }
            for adverb in &edge.observations {
                graph.lexicon.entry(adverb)?;
            }
            if edge.posterior.resolution() != graph.resolution() {
                return Err(GridError::ResolutionMismatch {
                    left: edge.posterior.resolution(),
                    right: graph.resolution(),
                }
                .into());
            }
            let key = (edge.source.clone(), edge.target.clone());
            if graph.edges.insert(key, edge).is_some() {
                return Err(GraphError::Inconsistent("duplicate edge".into()));
            }
        }
        Ok(graph)
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    pub fn lexicon_arc(&self) -> Arc<Lexicon> {
        Arc::clone(&self.lexicon)
    }

    pub fn settings(&self) -> &GraphSettings {
        &self.settings
    }

    pub fn resolution(&self) -> usize {
        self.lexicon.resolution()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &ConceptNode> {
        self.nodes.values()
    }

    /// Edges ordered by `(source, target)`.
    pub fn edges(&self) -> impl Iterator<Item = &CausalEdge> {
        self.edges.values()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node(&self, name: &str) -> Option<&ConceptNode> {
        self.nodes.get(&normalize_concept(name))
    }

    /// Records one `cause -> effect` observation qualified by `adverb`.
    ///
    /// Nothing is modified when the adverb is unknown or the endpoints are
    /// invalid. When the new prior conflicts with the edge's posterior, the
    /// observation is still recorded but the posterior resets to uniform and
    /// the edge is flagged; later observations fuse onto that uniform state.
    pub fn add_observation(
        &mut self,
        cause: &str,
        effect: &str,
        adverb: &str,
    ) -> Result<ObservationOutcome, GraphError> {
        let source = normalize_concept(cause);
        let target = normalize_concept(effect);
        if source.is_empty() || target.is_empty() {
            return Err(GraphError::EmptyConcept);
        }
        if source == target {
            return Err(GraphError::SelfLoop(source));
        }
        let entry = self.lexicon.entry(adverb)?;
        let token = crate::lexicon::normalize_adverb(adverb);
        let prior = entry.grid();

        for (id, raw) in [(&source, cause), (&target, effect)] {
            self.nodes.entry(id.clone()).or_insert_with(|| ConceptNode {
                id: id.clone(),
                label: collapse_whitespace(raw),
            });
        }

        let key = (source, target);
        let Some(edge) = self.edges.get_mut(&key) else {
            let (source, target) = key.clone();
            self.edges.insert(
                key,
                CausalEdge {
                    source,
                    target,
                    observations: vec![token],
                    posterior: prior.clone(),
                    conflicted: false,
                },
            );
            return Ok(ObservationOutcome::Created);
        };

        edge.observations.push(token);
        match fuse(&edge.posterior, prior, self.settings.conflict_floor)? {
            Ok(next) => {
                edge.posterior = next;
                Ok(ObservationOutcome::Fused)
            }
            Err(conflict) => {
                edge.posterior = GridDistribution::uniform(self.lexicon.resolution())?;
                edge.conflicted = true;
                Ok(ObservationOutcome::Contradiction(conflict))
            }
        }
    }

    pub fn add_records(&mut self, records: &[RelationRecord]) -> BuildReport {
        let mut report = BuildReport::default();
        for (index, record) in records.iter().enumerate() {
            match self.add_observation(&record.cause, &record.effect, &record.adverb) {
                Ok(outcome) => {
                    report.observations += 1;
                    if let ObservationOutcome::Contradiction(conflict) = outcome {
                        report.contradictions.push((index, conflict));
                    }
                }
                Err(e) => report.rejected.push((index, e)),
            }
        }
        report
    }

    pub fn edge(&self, cause: &str, effect: &str) -> Result<&CausalEdge, GraphError> {
        let key = (normalize_concept(cause), normalize_concept(effect));
        self.edges.get(&key).ok_or(GraphError::MissingEdge {
            cause: key.0,
            effect: key.1,
        })
    }

    pub fn edge_posterior(
        &self,
        cause: &str,
        effect: &str,
    ) -> Result<&GridDistribution, GraphError> {
        self.edge(cause, effect).map(CausalEdge::posterior)
    }

    /// Entropy above `threshold · ln R` marks a distribution as contradictory.
    pub fn exceeds_entropy_threshold(&self, distribution: &GridDistribution) -> bool {
        let max_entropy = (distribution.resolution() as f64).ln();
        distribution.entropy() > self.settings.contradiction_threshold * max_entropy
    }

    pub fn is_contradictory(&self, edge: &CausalEdge) -> bool {
        edge.conflicted || self.exceeds_entropy_threshold(&edge.posterior)
    }

    pub fn contradiction_count(&self) -> usize {
        self.edges().filter(|e| self.is_contradictory(e)).count()
    }

    /// Mean posterior entropy over all edges; zero for an empty graph.
    pub fn mean_entropy(&self) -> f64 {
        if self.edges.is_empty() {
            return 0.0;
        }
        self.edges().map(|e| e.posterior.entropy()).sum::<f64>() / self.edges.len() as f64
    }

    pub fn edge_report(&self, cause: &str, effect: &str) -> Result<EdgeReport, GraphError> {
        let edge = self.edge(cause, effect)?;
        let p = &edge.posterior;
        let best = self
            .lexicon
            .best_adverb_with(p, self.settings.kl_direction)?;
        Ok(EdgeReport {
            source: edge.source.clone(),
            target: edge.target.clone(),
            map: p.map_estimate(),
            mean: p.mean(),
            median: p.median(),
            entropy: p.entropy(),
            best_adverb: best.adverb,
            divergence: best.divergence,
            observation_count: edge.observation_count(),
            contradiction: self.is_contradictory(edge),
        })
    }

    /// Fuses the posteriors along `path` into one distribution.
    ///
    /// For `a -> b -> c` this is `P(c | b, a) ∝ P(c | b) P(b | a)`, cell by
    /// cell. A hop that would make the product underflow resets the running
    /// distribution to uniform and raises the contradiction flag.
    pub fn compose_path<S: AsRef<str>>(&self, path: &[S]) -> Result<PathQueryResult, GraphError> {
        if path.len() < 2 {
            return Err(GraphError::PathTooShort(path.len()));
        }
        let ids: Vec<String> = path.iter().map(|s| normalize_concept(s.as_ref())).collect();
        let mut hops = Vec::with_capacity(ids.len() - 1);
        for pair in ids.windows(2) {
            let edge = self
                .edges
                .get(&(pair[0].clone(), pair[1].clone()))
                .ok_or_else(|| GraphError::BrokenPath {
                    from: pair[0].clone(),
                    to: pair[1].clone(),
                })?;
            hops.push(&edge.posterior);
        }

        let mut composed = hops[0].clone();
        let mut disjoint = false;
        for hop in &hops[1..] {
            composed = match composed.multiply_normalize(hop) {
                Ok(next) => next,
                Err(GridError::DisjointEvidence { .. }) => {
                    disjoint = true;
                    GridDistribution::uniform(self.resolution())?
                }
                Err(e) => return Err(e.into()),
            };
        }

        let best = self
            .lexicon
            .best_adverb_with(&composed, self.settings.kl_direction)?;
        Ok(PathQueryResult {
            map_value: composed.map_estimate(),
            best_adverb: best.adverb,
            divergence: best.divergence,
            entropy_value: composed.entropy(),
            contradiction_flag: disjoint || self.exceeds_entropy_threshold(&composed),
            path: ids,
            composed,
        })
    }

    /// All simple directed paths from `source` to `target` with at most
    /// `max_hops` edges, in lexicographic order of their node ids.
    pub fn find_paths(
        &self,
        source: &str,
        target: &str,
        max_hops: usize,
    ) -> Result<Vec<Vec<String>>, GraphError> {
        if max_hops == 0 {
            return Err(GraphError::ZeroHops);
        }
        let source = normalize_concept(source);
        let target = normalize_concept(target);
        for id in [&source, &target] {
            if !self.nodes.contains_key(id) {
                return Err(GraphError::UnknownNode(id.clone()));
            }
        }

        let mut found = Vec::new();
        let mut stack = vec![source.as_str()];
        self.extend_paths(&mut stack, &target, max_hops, &mut found);
        found.sort();
        Ok(found)
    }

    fn successors<'a>(&'a self, node: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .range((node.to_string(), String::new())..)
            .take_while(move |((s, _), _)| s == node)
            .map(|((_, t), _)| t.as_str())
    }

    fn extend_paths<'a>(
        &'a self,
        stack: &mut Vec<&'a str>,
        target: &str,
        max_hops: usize,
        found: &mut Vec<Vec<String>>,
    ) {
        let here = *stack.last().expect("stack starts with the source");
        for next in self.successors(here) {
            if stack.contains(&next) {
                continue;
            }
            stack.push(next);
            if next == target {
                found.push(stack.iter().map(|s| s.to_string()).collect());
            } else if stack.len() <= max_hops {
                self.extend_paths(stack, target, max_hops, found);
            }
            stack.pop();
        }
    }

    /// Recomputes every edge posterior from its observation history.
    pub fn replay(&self) -> Result<Self, GraphError> {
        let mut rebuilt = self.clone();
        for edge in rebuilt.edges.values_mut() {
            let (posterior, conflicted) =
                replay_observations(&self.lexicon, &edge.observations, &self.settings)?;
            edge.posterior = posterior;
            edge.conflicted = conflicted;
        }
        Ok(rebuilt)
    }
}
