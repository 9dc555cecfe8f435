//! Random-walk Metropolis–Hastings over a grid distribution.
//!
//! The target is the piecewise-constant density that places `p_k * R` on
//! cell `k`. Proposals are Gaussian steps from the current point; anything
//! that leaves `[0, 1]` is rejected outright. The proposal is symmetric, so the
//! acceptance ratio is just the ratio of target densities.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::grid::{GridDistribution, GridError};

/// Fraction of the chain discarded before any sample is returned.
pub const BURN_IN_FRACTION: f64 = 0.1;

/// Draws `n_samples` certainty factors from `target`.
///
/// The chain starts at the MAP cell center, runs `ceil(n / 0.9)` steps, drops
/// the first 10% and returns the rest. Output depends only on the arguments.
pub fn mh_sample(
    target: &GridDistribution,
    n_samples: usize,
    proposal_stddev: f64,
    seed: u64,
) -> Result<Vec<f64>, GridError> {
    if n_samples == 0 {
        return Err(GridError::ParameterDomain {
            what: "sampler",
            message: "n_samples must be at least 1".into(),
        });
    }
    let step = Normal::new(0.0, proposal_stddev)
        .ok()
        .filter(|_| proposal_stddev > 0.0)
        .ok_or_else(|| GridError::ParameterDomain {
            what: "sampler",
            message: format!("proposal_stddev must be positive and finite, got {proposal_stddev}"),
        })?;

    let total = (n_samples as f64 / (1.0 - BURN_IN_FRACTION)).ceil() as usize;
    let burn_in = total - n_samples;
    let masses = target.masses();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut x = target.map_estimate();
    let mut density = masses[target.cell_of(x)];
    let mut samples = Vec::with_capacity(n_samples);

    for i in 0..total {
        let proposal = x + step.sample(&mut rng);
        if (0.0..=1.0).contains(&proposal) {
            let proposed_density = masses[target.cell_of(proposal)];
            if proposed_density > 0.0
                && (proposed_density >= density || rng.random::<f64>() < proposed_density / density)
            {
                x = proposal;
                density = proposed_density;
            }
        }
        if i >= burn_in {
            samples.push(x);
        }
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DistributionFamily;

    fn sample_mean(xs: &[f64]) -> f64 {
        xs.iter().sum::<f64>() / xs.len() as f64
    }

    #[test]
    fn returns_exactly_the_requested_count() {
        let g = GridDistribution::uniform(50).unwrap();
        for n in [1, 2, 9, 10, 1234] {
            assert_eq!(mh_sample(&g, n, 0.1, 3).unwrap().len(), n);
        }
    }

    #[test]
    fn point_mass_chain_never_leaves_its_cell() {
        let g = GridDistribution::point_mass(200, 57).unwrap();
        let center = g.cell_center(57);
        let xs = mh_sample(&g, 5000, 0.05, 11).unwrap();
        assert!(xs.iter().all(|&x| (x - center).abs() <= g.cell_width()));
    }

    #[test]
    fn fixed_seed_is_bit_reproducible() {
        let g = DistributionFamily::Beta {
            alpha: 3.0,
            beta: 4.0,
        }
        .grid(500)
        .unwrap();
        let a = mh_sample(&g, 2000, 0.2, 99).unwrap();
        let b = mh_sample(&g, 2000, 0.2, 99).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
        let c = mh_sample(&g, 2000, 0.2, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn gaussian_target_mean_matches_grid_mean() {
        let g = DistributionFamily::Gaussian {
            mean: 0.5,
            stddev: 0.1,
        }
        .grid(1000)
        .unwrap();
        let xs = mh_sample(&g, 50_000, 0.1, 2024).unwrap();
        assert!((sample_mean(&xs) - g.mean()).abs() < 0.01);
        assert!(xs.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }

    #[test]
    fn bimodal_target_splits_mass_like_the_grid() {
        let r = 1000;
        let left = DistributionFamily::Gaussian {
            mean: 0.2,
            stddev: 0.07,
        }
        .grid(r)
        .unwrap();
        let right = DistributionFamily::Gaussian {
            mean: 0.8,
            stddev: 0.07,
        }
        .grid(r)
        .unwrap();
        let mixture = GridDistribution::from_weights(
            left.masses()
                .iter()
                .zip(right.masses())
                .map(|(a, b)| 0.6 * a + 0.4 * b)
                .collect(),
        )
        .unwrap();
        let xs = mh_sample(&mixture, 50_000, 0.3, 5).unwrap();
        let sampled = xs.iter().filter(|&&x| x <= 0.5).count() as f64 / xs.len() as f64;
        let grid = mixture.mass_between(0.0, 0.5);
        assert!(
            (sampled - grid).abs() < 0.05,
            "sampled {sampled} grid {grid}"
        );
    }

    #[test]
    fn bad_arguments_are_rejected() {
        let g = GridDistribution::uniform(10).unwrap();
        assert!(mh_sample(&g, 0, 0.1, 0).is_err());
        assert!(mh_sample(&g, 10, 0.0, 0).is_err());
        assert!(mh_sample(&g, 10, f64::NAN, 0).is_err());
    }
}
