//! Causal graphs whose edges carry full distributions over certainty factors.
//!
//! Each causal relation `cause -> effect` is observed in text qualified by a
//! hedge adverb ("often", "hardly ever"). Every adverb maps to a prior over the
//! certainty factor `x ∈ [0, 1]`; repeated observations of one edge fuse by
//! multiplying priors on a grid. The resulting posterior can be summarized
//! (MAP, mean, median, entropy), mapped back to the closest adverb, and
//! composed along paths.
//!
//! ```
//! use std::sync::Arc;
//! use ponder_core::{CausalGraph, Lexicon};
//!
//! let lexicon = Arc::new(Lexicon::default_at(1000).unwrap());
//! let mut graph = CausalGraph::new(lexicon);
//! graph.add_observation("radon gas", "lung cancer", "often").unwrap();
//! graph.add_observation("radon gas", "lung cancer", "frequently").unwrap();
//! let report = graph.edge_report("radon gas", "lung cancer").unwrap();
//! assert_eq!(report.best_adverb, "often");
//! ```

pub mod corpus;
pub mod export;
pub mod graph;
pub mod grid;
pub mod ingest;
pub mod lexicon;
pub mod sampler;
pub mod synth;

pub use export::{graph_from_json, graph_to_curves, graph_to_dot, graph_to_json, ExportBundle};
pub use graph::{CausalEdge, CausalGraph, EdgeReport, GraphError, GraphSettings, PathQueryResult};
pub use grid::{DistributionFamily, GridDistribution, GridError, Orientation, DEFAULT_RESOLUTION};
pub use ingest::{RelationFormat, RelationRecord};
pub use lexicon::{KlDirection, Lexicon};
pub use sampler::mh_sample;
pub use synth::{generate_synthetic, AdverbSimilarity, SyntheticConfig};
