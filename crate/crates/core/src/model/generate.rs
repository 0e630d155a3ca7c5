// Seeded random instances. Every draw comes from ChaCha8 seeded with the
// caller's seed, so a (shape, concentration, seed) triple pins the table.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Uniform};

use super::FiniteJointDistribution;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Range of the default per-cell concentration draws.
pub const DEFAULT_CONCENTRATION_RANGE: (f64, f64) = (0.5, 2.0);

/// Dirichlet concentration over the `nx * ny` cells of the table.
#[derive(Debug, Clone, PartialEq)]
pub enum Concentration {
    /// Same parameter for every cell.
    Symmetric(f64),
    /// One parameter per cell, row-major.
    PerCell(Vec<f64>),
    /// Per-cell parameters drawn i.i.d. uniform on `[low, high]` from the
    /// same seeded stream, before the gamma draws.
    RandomUniform { low: f64, high: f64 },
}

impl Default for Concentration {
    fn default() -> Self {
        let (low, high) = DEFAULT_CONCENTRATION_RANGE;
        Concentration::RandomUniform { low, high }
    }
}

impl Concentration {
    fn resolve(&self, cells: usize, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
        let check = |a: f64| {
            if a.is_finite() && a > 0.0 {
                Ok(a)
            } else {
                Err(Error::BadConcentration(format!(
                    "parameter {a} is not positive"
                )))
            }
        };
        match self {
            Concentration::Symmetric(a) => Ok(vec![check(*a)?; cells]),
            Concentration::PerCell(values) => {
                if values.len() != cells {
                    return Err(Error::BadConcentration(format!(
                        "expected {cells} parameters, got {}",
                        values.len()
                    )));
                }
                values.iter().map(|&a| check(a)).collect()
            }
            Concentration::RandomUniform { low, high } => {
                check(*low)?;
                check(*high)?;
                let range = Uniform::new_inclusive(*low, *high)
                    .map_err(|e| Error::BadConcentration(e.to_string()))?;
                Ok((0..cells).map(|_| range.sample(rng)).collect())
            }
        }
    }
}

/// One Dirichlet draw over the cells of an `nx x ny` table.
///
/// Cell `k` (row-major) receives `G_k / sum_j G_j` with `G_k ~ Gamma(a_k, 1)`
/// drawn in row-major order.
pub fn gen_dirichlet_joint<T: Scalar>(
    nx: usize,
    ny: usize,
    concentration: &Concentration,
    seed: u64,
) -> Result<FiniteJointDistribution<T>> {
    if nx < 2 || ny < 2 {
        return Err(Error::AssumptionOneViolated {
            positive_rows: nx,
            positive_cols: ny,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphas = concentration.resolve(nx * ny, &mut rng)?;
    let mut draws = Vec::with_capacity(alphas.len());
    for &alpha in &alphas {
        let gamma =
            Gamma::new(alpha, 1.0).map_err(|e| Error::BadConcentration(e.to_string()))?;
        draws.push(gamma.sample(&mut rng));
    }
    let total: f64 = draws.iter().sum();
    let cells: Vec<T> = draws.iter().map(|g| T::lit(g / total)).collect();
    FiniteJointDistribution::from_row_major(nx, ny, &cells)
}

/// Per-instance seeds derived from a master seed.
pub fn instance_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.next_u64()).collect()
}

/// `count` independent draws, instance `i` seeded by `instance_seeds(seed, count)[i]`.
pub fn dirichlet_corpus<T: Scalar>(
    count: usize,
    nx: usize,
    ny: usize,
    concentration: &Concentration,
    seed: u64,
) -> Result<Vec<FiniteJointDistribution<T>>> {
    instance_seeds(seed, count)
        .into_iter()
        .map(|s| gen_dirichlet_joint(nx, ny, concentration, s))
        .collect()
}
