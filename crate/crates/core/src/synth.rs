//! Synthetic relation corpora for toy experiments.
//!
//! Every allowed edge receives exactly `relations_per_edge` records. In
//! `similar` mode an edge picks one anchor adverb from the pool and each record
//! draws from the anchor and its immediate neighbours, with the pool ordered by
//! prior mean. In `mixed` mode every record draws uniformly from the whole pool.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::RelationRecord;
use crate::lexicon::{Lexicon, LexiconError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdverbSimilarity {
    Similar,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub node_names: Vec<String>,
    pub allowed_edges: Vec<(String, String)>,
    pub relations_per_edge: usize,
    pub adverb_pool: Vec<String>,
    pub adverb_similarity: AdverbSimilarity,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthetic config: {0}")]
    Config(String),

    #[error("adverb pool is empty")]
    EmptyPool,

    #[error("adverb pool: {0}")]
    UnknownAdverb(#[source] LexiconError),

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl SyntheticConfig {
    /// The four-node toy problem: A -> C, C -> D, C -> B over the whole default pool.
    pub fn toy(relations_per_edge: usize, adverb_similarity: AdverbSimilarity, seed: u64) -> Self {
        let lexicon = Lexicon::default_at(2).expect("shipped lexicon is valid");
        Self {
            node_names: ["A", "B", "C", "D"].map(String::from).to_vec(),
            allowed_edges: [("A", "C"), ("C", "D"), ("C", "B")]
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .to_vec(),
            relations_per_edge,
            adverb_pool: lexicon.entries().map(|e| e.name().to_string()).collect(),
            adverb_similarity,
            seed,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self, SynthError> {
        toml::from_str(text).map_err(|e| SynthError::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, SynthError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| SynthError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("synthetic config is always representable")
    }

    fn validate(&self) -> Result<(), SynthError> {
        if self.relations_per_edge == 0 {
            return Err(SynthError::Config(
                "relations_per_edge must be at least 1".into(),
            ));
        }
        for (cause, effect) in &self.allowed_edges {
            for node in [cause, effect] {
                if !self.node_names.contains(node) {
                    return Err(SynthError::Config(format!(
                        "edge {cause} -> {effect} uses unknown node {node:?}"
                    )));
                }
            }
            if cause == effect {
                return Err(SynthError::Config(format!("self-pair {cause} -> {effect}")));
            }
        }
        if self.adverb_pool.is_empty() {
            return Err(SynthError::EmptyPool);
        }
        Ok(())
    }
}

pub fn generate_synthetic(
    config: &SyntheticConfig,
    lexicon: &Lexicon,
) -> Result<Vec<RelationRecord>, SynthError> {
    config.validate()?;

    let mut pool: Vec<(f64, &str)> = Vec::with_capacity(config.adverb_pool.len());
    for adverb in &config.adverb_pool {
        let prior = lexicon
            .prior_of(adverb)
            .map_err(SynthError::UnknownAdverb)?;
        pool.push((prior.mean(), adverb.as_str()));
    }
    pool.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut records = Vec::with_capacity(config.allowed_edges.len() * config.relations_per_edge);
    for (cause, effect) in &config.allowed_edges {
        let (lo, hi) = match config.adverb_similarity {
            AdverbSimilarity::Mixed => (0, pool.len() - 1),
            AdverbSimilarity::Similar => {
                let anchor = rng.random_range(0..pool.len());
                (anchor.saturating_sub(1), (anchor + 1).min(pool.len() - 1))
            }
        };
        for _ in 0..config.relations_per_edge {
            let adverb = pool[rng.random_range(lo..=hi)].1;
            records.push(RelationRecord::new(cause.as_str(), adverb, effect.as_str()));
        }
    }
    Ok(records)
}
