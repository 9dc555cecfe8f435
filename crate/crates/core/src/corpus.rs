//! Data files bundled with the crate.

/// Reconstructed lung-cancer relation corpus in the pipe format.
pub const LUNG_CANCER: &str = include_str!("../data/lung_cancer.txt");

/// Synthetic-generator config for the A -> C, C -> D, C -> B toy problem.
pub const TOY_SYNTH_CONFIG: &str = include_str!("../data/toy_synth.toml");
