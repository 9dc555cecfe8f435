//! Hedge adverbs and the priors they stand for.
//!
//! A [`Lexicon`] maps adverb tokens ("sometimes", "hardly ever") to a
//! [`DistributionFamily`] and keeps each family materialized on a grid of a
//! single resolution. It is loaded from a TOML document made of `[[adverb]]`
//! tables; see `data/default_lexicon.toml` for the schema and the shipped
//! defaults.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{DistributionFamily, GridDistribution, GridError, Orientation};

/// The lexicon shipped with the crate.
pub const DEFAULT_LEXICON_TOML: &str = include_str!("../data/default_lexicon.toml");

const SUGGESTIONS: usize = 3;

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("failed to parse lexicon: {0}")]
    Parse(String),

    #[error("lexicon must contain at least one adverb")]
    Empty,

    #[error("duplicate adverb name {0:?}")]
    DuplicateName(String),

    #[error("adverb entry #{index} ({name:?}): {message}")]
    InvalidEntry {
        index: usize,
        name: String,
        message: String,
    },

    #[error("unknown adverb {token:?}; nearest known: {}", suggestions.join(", "))]
    UnknownAdverb {
        token: String,
        suggestions: Vec<String>,
    },

    #[error(transparent)]
    Grid(#[from] GridError),

    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Case-folds and maps runs of whitespace to a single underscore.
pub fn normalize_adverb(token: &str) -> String {
    token
        .split_whitespace()
        .collect::<Vec<_>>()
        .join("_")
        .to_lowercase()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyTag {
    Gaussian,
    Beta,
    Exponential,
    Uniform,
}

/// One `[[adverb]]` table as written in a lexicon file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdverbSpec {
    pub name: String,
    pub family: FamilyTag,
    #[serde(default)]
    pub params: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<Orientation>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aliases: Vec<String>,
}

impl AdverbSpec {
    pub fn family(&self) -> Result<DistributionFamily, String> {
        let want = match self.family {
            FamilyTag::Gaussian | FamilyTag::Beta => 2,
            FamilyTag::Exponential => 1,
            FamilyTag::Uniform => 0,
        };
        if self.params.len() != want {
            return Err(format!(
                "{:?} takes {want} parameter(s), got {}",
                self.family,
                self.params.len()
            ));
        }
        if self.orientation.is_some() && self.family != FamilyTag::Exponential {
            return Err("orientation only applies to the exponential family".into());
        }
        let p = &self.params;
        let family = match self.family {
            FamilyTag::Gaussian => DistributionFamily::Gaussian {
                mean: p[0],
                stddev: p[1],
            },
            FamilyTag::Beta => DistributionFamily::Beta {
                alpha: p[0],
                beta: p[1],
            },
            FamilyTag::Exponential => DistributionFamily::Exponential {
                rate: p[0],
                orientation: self
                    .orientation
                    .ok_or("exponential needs an orientation (rising or falling)")?,
            },
            FamilyTag::Uniform => DistributionFamily::Uniform,
        };
        family.validate().map_err(|e| e.to_string())?;
        Ok(family)
    }

    fn from_family(name: &str, family: DistributionFamily, aliases: &[String]) -> Self {
        let (tag, params, orientation) = match family {
            DistributionFamily::Gaussian { mean, stddev } => {
                (FamilyTag::Gaussian, vec![mean, stddev], None)
            }
            DistributionFamily::Beta { alpha, beta } => (FamilyTag::Beta, vec![alpha, beta], None),
            DistributionFamily::Exponential { rate, orientation } => {
                (FamilyTag::Exponential, vec![rate], Some(orientation))
            }
            DistributionFamily::Uniform => (FamilyTag::Uniform, vec![], None),
        };
        Self {
            name: name.to_string(),
            family: tag,
            params,
            orientation,
            aliases: aliases.to_vec(),
        }
    }
}

/// Serialized form of a whole lexicon.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconConfig {
    #[serde(default, rename = "adverb")]
    pub adverbs: Vec<AdverbSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdverbPrior {
    name: String,
    aliases: Vec<String>,
    family: DistributionFamily,
    grid: GridDistribution,
}

impl AdverbPrior {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn aliases(&self) -> &[String] {
        &self.aliases
    }

    pub fn family(&self) -> DistributionFamily {
        self.family
    }

    pub fn grid(&self) -> &GridDistribution {
        &self.grid
    }
}

/// Argument order used when scoring an adverb against a posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KlDirection {
    /// `KL(prior ‖ posterior)`.
    #[default]
    PriorToPosterior,
    /// `KL(posterior ‖ prior)`.
    PosteriorToPrior,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdverbMatch {
    pub adverb: String,
    pub divergence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    entries: BTreeMap<String, AdverbPrior>,
    // Normalized token (name or alias) to entry name.
    tokens: BTreeMap<String, String>,
    resolution: usize,
}

impl Lexicon {
    pub fn from_config(config: &LexiconConfig, resolution: usize) -> Result<Self, LexiconError> {
        if config.adverbs.is_empty() {
            return Err(LexiconError::Empty);
        }
        // Surface resolution errors before blaming an entry for them.
        GridDistribution::uniform(resolution)?;

        let mut entries = BTreeMap::new();
        let mut tokens = BTreeMap::new();
        for (index, spec) in config.adverbs.iter().enumerate() {
            let invalid = |message: String| LexiconError::InvalidEntry {
                index,
                name: spec.name.clone(),
                message,
            };
            let name = normalize_adverb(&spec.name);
            if name.is_empty() {
                return Err(invalid("adverb name must not be empty".into()));
            }
            let family = spec.family().map_err(invalid)?;
            let grid = family.grid(resolution)?;

            let mut aliases = Vec::with_capacity(spec.aliases.len());
            for token in std::iter::once(&name).chain(&spec.aliases) {
                let token = normalize_adverb(token);
                if token.is_empty() {
                    return Err(invalid("aliases must not be empty".into()));
                }
                if tokens.insert(token.clone(), name.clone()).is_some() {
                    return Err(LexiconError::DuplicateName(token));
                }
                if token != name {
                    aliases.push(token);
                }
            }
            entries.insert(
                name.clone(),
                AdverbPrior {
                    name,
                    aliases,
                    family,
                    grid,
                },
            );
        }
        Ok(Self {
            entries,
            tokens,
            resolution,
        })
    }

    pub fn from_toml_str(text: &str, resolution: usize) -> Result<Self, LexiconError> {
        let config: LexiconConfig =
            toml::from_str(text).map_err(|e| LexiconError::Parse(e.to_string()))?;
        Self::from_config(&config, resolution)
    }

    pub fn load(path: impl AsRef<Path>, resolution: usize) -> Result<Self, LexiconError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text, resolution)
    }

    /// The shipped lexicon materialized at `resolution`.
    pub fn default_at(resolution: usize) -> Result<Self, LexiconError> {
        Self::from_toml_str(DEFAULT_LEXICON_TOML, resolution)
    }

    pub fn to_config(&self) -> LexiconConfig {
        LexiconConfig {
            adverbs: self
                .entries
                .values()
                .map(|e| AdverbSpec::from_family(&e.name, e.family, &e.aliases))
                .collect(),
        }
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(&self.to_config()).expect("lexicon config is always representable")
    }

    /// Same entries, re-materialized at another resolution.
    pub fn with_resolution(&self, resolution: usize) -> Result<Self, LexiconError> {
        Self::from_config(&self.to_config(), resolution)
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in name order.
    pub fn entries(&self) -> impl Iterator<Item = &AdverbPrior> {
        self.entries.values()
    }

    pub fn entry(&self, adverb: &str) -> Result<&AdverbPrior, LexiconError> {
        let token = normalize_adverb(adverb);
        self.tokens
            .get(&token)
            .and_then(|name| self.entries.get(name))
            .ok_or_else(|| LexiconError::UnknownAdverb {
                suggestions: self.nearest(&token),
                token: adverb.to_string(),
            })
    }

    pub fn contains(&self, adverb: &str) -> bool {
        self.tokens.contains_key(&normalize_adverb(adverb))
    }

    pub fn prior_of(&self, adverb: &str) -> Result<&GridDistribution, LexiconError> {
        self.entry(adverb).map(AdverbPrior::grid)
    }

    fn nearest(&self, token: &str) -> Vec<String> {
        let mut scored: Vec<(usize, &String)> = self
            .tokens
            .keys()
            .map(|known| (strsim::levenshtein(token, known), known))
            .collect();
        scored.sort();
        scored
            .into_iter()
            .take(SUGGESTIONS)
            .map(|(_, name)| name.clone())
            .collect()
    }

    /// The adverb whose prior is closest to `posterior` under `KL(prior ‖ posterior)`.
    pub fn best_adverb(&self, posterior: &GridDistribution) -> Result<AdverbMatch, LexiconError> {
        self.best_adverb_with(posterior, KlDirection::PriorToPosterior)
    }

    /// Like [`best_adverb`](Self::best_adverb) with an explicit argument order.
    /// Ties go to the lexicographically smallest name.
    pub fn best_adverb_with(
        &self,
        posterior: &GridDistribution,
        direction: KlDirection,
    ) -> Result<AdverbMatch, LexiconError> {
        let mut best: Option<AdverbMatch> = None;
        for entry in self.entries.values() {
            let divergence = match direction {
                KlDirection::PriorToPosterior => entry.grid.kl_divergence(posterior)?,
                KlDirection::PosteriorToPrior => posterior.kl_divergence(&entry.grid)?,
            };
            if best.as_ref().is_none_or(|b| divergence < b.divergence) {
                best = Some(AdverbMatch {
                    adverb: entry.name.clone(),
                    divergence,
                });
            }
        }
        Ok(best.expect("lexicon is never empty"))
    }
}
