//! Discrete distributions over the certainty-factor universe `[0, 1]`.
//!
//! A [`GridDistribution`] splits `[0, 1]` into `R` equal cells and stores the
//! probability *mass* of each cell; cell `k` is represented by its center
//! `(k + 0.5) / R`. Every value produced by this module is normalized, so the
//! discrete formulas for entropy, divergence and moments are exact on the grid.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Resolution used when callers do not choose one.
pub const DEFAULT_RESOLUTION: usize = 1000;

/// Lower bound applied to the second argument of [`GridDistribution::kl_divergence`].
pub const KL_FLOOR: f64 = 1e-12;

/// Product masses below this are treated as numerically disjoint evidence.
pub const DISJOINT_MASS_THRESHOLD: f64 = 1e-300;

const NORMALIZATION_TOLERANCE: f64 = 1e-9;

// Factors below this are dropped from cell products so that no product is
// subnormal; subnormal arithmetic is orders of magnitude slower on x86.
const PRODUCT_CUTOFF: f64 = 1e-150;

// Normalized masses below this are stored as exact zeros.
const FLUSH_BELOW: f64 = 1e-300;

// exp() of anything below this is flushed to zero while materializing a family.
const LOG_UNDERFLOW: f64 = -690.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("resolution must be at least 2, got {0}")]
    Resolution(usize),

    #[error("invalid {what} parameter: {message}")]
    ParameterDomain { what: &'static str, message: String },

    #[error("resolution mismatch: {left} vs {right}")]
    ResolutionMismatch { left: usize, right: usize },

    #[error(
        "evidence is numerically disjoint: product mass underflowed (MAPs {left_map:.4} and {right_map:.4})"
    )]
    DisjointEvidence { left_map: f64, right_map: f64 },

    #[error("invalid masses: {0}")]
    InvalidMasses(String),
}

/// Which end of `[0, 1]` an exponential prior piles its mass against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// Mode at `x = 1`.
    #[serde(alias = "rising_toward_1")]
    Rising,
    /// Mode at `x = 0`.
    #[serde(alias = "falling_toward_0")]
    Falling,
}

/// Parametric shapes a prior over certainty factors can take.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionFamily {
    Gaussian { mean: f64, stddev: f64 },
    Beta { alpha: f64, beta: f64 },
    Exponential { rate: f64, orientation: Orientation },
    Uniform,
}

impl DistributionFamily {
    pub fn validate(&self) -> Result<(), GridError> {
        fn positive(what: &'static str, name: &str, v: f64) -> Result<(), GridError> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(GridError::ParameterDomain {
                    what,
                    message: format!("{name} must be a positive finite number, got {v}"),
                })
            }
        }

        match *self {
            DistributionFamily::Gaussian { mean, stddev } => {
                if !(mean.is_finite() && (0.0..=1.0).contains(&mean)) {
                    return Err(GridError::ParameterDomain {
                        what: "gaussian",
                        message: format!("mean must lie in [0, 1], got {mean}"),
                    });
                }
                positive("gaussian", "stddev", stddev)
            }
            DistributionFamily::Beta { alpha, beta } => {
                positive("beta", "alpha", alpha)?;
                positive("beta", "beta", beta)
            }
            DistributionFamily::Exponential { rate, .. } => positive("exponential", "rate", rate),
            DistributionFamily::Uniform => Ok(()),
        }
    }

    /// Unnormalized log-density at `x`; only the differences between cells matter.
    fn log_density(&self, x: f64) -> f64 {
        match *self {
            DistributionFamily::Gaussian { mean, stddev } => {
                let z = (x - mean) / stddev;
                -0.5 * z * z
            }
            DistributionFamily::Beta { alpha, beta } => {
                (alpha - 1.0) * x.ln() + (beta - 1.0) * (1.0 - x).ln()
            }
            DistributionFamily::Exponential { rate, orientation } => match orientation {
                Orientation::Rising => rate * (x - 1.0),
                Orientation::Falling => -rate * x,
            },
            DistributionFamily::Uniform => 0.0,
        }
    }

    /// Evaluates the family at every cell center and renormalizes.
    pub fn grid(&self, resolution: usize) -> Result<GridDistribution, GridError> {
        check_resolution(resolution)?;
        self.validate()?;
        if let DistributionFamily::Uniform = self {
            return GridDistribution::uniform(resolution);
        }

        let logs: Vec<f64> = (0..resolution)
            .map(|k| self.log_density(cell_center(k, resolution)))
            .collect();
        let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights = logs
            .iter()
            .map(|&l| {
                let d = l - peak;
                if d < LOG_UNDERFLOW {
                    0.0
                } else {
                    d.exp()
                }
            })
            .collect();
        GridDistribution::from_weights(weights)
    }
}

/// Convenience wrapper for [`DistributionFamily::grid`].
pub fn make_grid(
    family: DistributionFamily,
    resolution: usize,
) -> Result<GridDistribution, GridError> {
    family.grid(resolution)
}

fn check_resolution(resolution: usize) -> Result<(), GridError> {
    if resolution < 2 {
        Err(GridError::Resolution(resolution))
    } else {
        Ok(())
    }
}

#[inline]
fn cell_center(k: usize, resolution: usize) -> f64 {
    (k as f64 + 0.5) / resolution as f64
}

/// Normalized probability masses on a uniform grid over `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct GridDistribution {
    masses: Vec<f64>,
}

impl TryFrom<Vec<f64>> for GridDistribution {
    type Error = GridError;

    fn try_from(masses: Vec<f64>) -> Result<Self, Self::Error> {
        GridDistribution::from_masses(masses)
    }
}

impl From<GridDistribution> for Vec<f64> {
    fn from(g: GridDistribution) -> Self {
        g.masses
    }
}

impl GridDistribution {
    pub fn uniform(resolution: usize) -> Result<Self, GridError> {
        check_resolution(resolution)?;
        Ok(Self {
            masses: vec![1.0 / resolution as f64; resolution],
        })
    }

    /// All mass in a single cell.
    pub fn point_mass(resolution: usize, cell: usize) -> Result<Self, GridError> {
        check_resolution(resolution)?;
        if cell >= resolution {
            return Err(GridError::InvalidMasses(format!(
                "cell {cell} out of range for resolution {resolution}"
            )));
        }
        let mut masses = vec![0.0; resolution];
        masses[cell] = 1.0;
        Ok(Self { masses })
    }

    /// Accepts masses that already sum to one (within 1e-9).
    pub fn from_masses(masses: Vec<f64>) -> Result<Self, GridError> {
        check_resolution(masses.len())?;
        let sum = checked_sum(&masses)?;
        if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(GridError::InvalidMasses(format!(
                "masses sum to {sum}, expected 1"
            )));
        }
        Ok(Self { masses })
    }

    /// Normalizes arbitrary non-negative weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self, GridError> {
        check_resolution(weights.len())?;
        let sum = checked_sum(&weights)?;
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(GridError::InvalidMasses(format!(
                "weights must have a positive finite sum, got {sum}"
            )));
        }
        Ok(Self {
            masses: normalized(weights, sum),
        })
    }

    pub fn resolution(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn cell_width(&self) -> f64 {
        1.0 / self.resolution() as f64
    }

    pub fn cell_center(&self, k: usize) -> f64 {
        cell_center(k, self.resolution())
    }

    /// `(x_k, p_k)` pairs in cell order.
    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let r = self.resolution();
        self.masses
            .iter()
            .enumerate()
            .map(move |(k, &p)| (cell_center(k, r), p))
    }

    /// Index of the cell containing `x`; `x = 1` belongs to the last cell.
    pub fn cell_of(&self, x: f64) -> usize {
        let r = self.resolution();
        ((x * r as f64).floor() as usize).min(r - 1)
    }

    fn check_same_resolution(&self, other: &Self) -> Result<(), GridError> {
        if self.resolution() != other.resolution() {
            return Err(GridError::ResolutionMismatch {
                left: self.resolution(),
                right: other.resolution(),
            });
        }
        Ok(())
    }

    /// Cell-wise product of two distributions, renormalized.
    ///
    /// This is the posterior update `p(x | a, b) ∝ p(x | a) p(x | b)`. When the
    /// product mass underflows, the inputs share no numerically meaningful
    /// support and [`GridError::DisjointEvidence`] is returned instead of a
    /// renormalized noise vector.
    pub fn multiply_normalize(&self, other: &Self) -> Result<Self, GridError> {
        self.check_same_resolution(other)?;
        let product: Vec<f64> = self
            .masses
            .iter()
            .zip(&other.masses)
            .map(|(&a, &b)| {
                if a < PRODUCT_CUTOFF || b < PRODUCT_CUTOFF {
                    0.0
                } else {
                    a * b
                }
            })
            .collect();
        let sum: f64 = product.iter().sum();
        if sum < DISJOINT_MASS_THRESHOLD {
            return Err(GridError::DisjointEvidence {
                left_map: self.map_estimate(),
                right_map: other.map_estimate(),
            });
        }
        Ok(Self {
            masses: normalized(product, sum),
        })
    }

    /// Expected value under `self` of `other` scaled to a peak of one.
    ///
    /// Lies in `(0, 1]`: close to one when `self` sits where `other` is
    /// highest, and vanishing when `self` lives where `other` has almost no
    /// mass. Unlike raw product mass it does not shrink as `self` sharpens on
    /// evidence that agrees with `other`.
    pub fn compatibility(&self, other: &Self) -> Result<f64, GridError> {
        self.check_same_resolution(other)?;
        let peak = other.masses.iter().copied().fold(0.0, f64::max);
        let overlap: f64 = self
            .masses
            .iter()
            .zip(&other.masses)
            .map(|(&a, &b)| a * b)
            .sum();
        Ok(overlap / peak)
    }

    /// Center of the highest cell; ties go to the lowest index.
    pub fn map_estimate(&self) -> f64 {
        self.cell_center(self.map_cell())
    }

    pub fn map_cell(&self) -> usize {
        let mut best = 0;
        for (k, &p) in self.masses.iter().enumerate().skip(1) {
            if p > self.masses[best] {
                best = k;
            }
        }
        best
    }

    /// Shannon entropy in nats, with `0 log 0 = 0`.
    pub fn entropy(&self) -> f64 {
        -self
            .masses
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| p * p.ln())
            .sum::<f64>()
    }

    /// `Σ p_k log(p_k / q_k)` where `self` is `p`.
    ///
    /// Cells where `q` falls below [`KL_FLOOR`] are raised to
    /// `min(p_k, KL_FLOOR)` and `q` is renormalized, so the result is finite for
    /// any pair and never meaningfully negative. The floor never exceeds `p_k`,
    /// which keeps `KL(P, P)` exactly zero.
    pub fn kl_divergence(&self, q: &Self) -> Result<f64, GridError> {
        self.check_same_resolution(q)?;
        let floored: Vec<f64> = self
            .masses
            .iter()
            .zip(&q.masses)
            .map(|(&p, &qv)| {
                if qv < KL_FLOOR {
                    qv.max(p.min(KL_FLOOR))
                } else {
                    qv
                }
            })
            .collect();
        let raised = floored.iter().zip(&q.masses).any(|(a, b)| a != b);
        let scale = if raised {
            floored.iter().sum::<f64>()
        } else {
            1.0
        };
        let kl = self
            .masses
            .iter()
            .zip(&floored)
            .filter(|(&p, _)| p > 0.0)
            .map(|(&p, &qv)| p * (p.ln() - (qv / scale).ln()))
            .sum();
        Ok(kl)
    }

    pub fn mean(&self) -> f64 {
        self.points().map(|(x, p)| x * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.points().map(|(x, p)| p * (x - mean).powi(2)).sum()
    }

    /// Smallest cell center whose cumulative mass reaches one half.
    pub fn median(&self) -> f64 {
        let mut cumulative = 0.0;
        for (k, &p) in self.masses.iter().enumerate() {
            cumulative += p;
            // Slack absorbs rounding in the running sum for exactly-half cases.
            if cumulative >= 0.5 - 1e-12 {
                return self.cell_center(k);
            }
        }
        self.cell_center(self.resolution() - 1)
    }

    /// Total mass of the cells whose centers lie in `[lo, hi]`.
    pub fn mass_between(&self, lo: f64, hi: f64) -> f64 {
        self.points()
            .filter(|&(x, _)| x >= lo && x <= hi)
            .map(|(_, p)| p)
            .sum()
    }
}

fn checked_sum(values: &[f64]) -> Result<f64, GridError> {
    if let Some((k, v)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
    {
        return Err(GridError::InvalidMasses(format!(
            "cell {k} holds {v}; masses must be finite and non-negative"
        )));
    }
    Ok(values.iter().sum())
}

fn normalized(mut values: Vec<f64>, sum: f64) -> Vec<f64> {
    for v in &mut values {
        *v /= sum;
        if *v < FLUSH_BELOW {
            *v = 0.0;
        }
    }
    values
}
