// Deterministic-scan Gibbs on a standard bivariate normal with correlation
// gamma. Normal variates come from rand_distr's StandardNormal (ziggurat)
// on a ChaCha8 stream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SelectionProbability;
use crate::theory::theorem1_rhs;

pub const MIN_GAUSSIAN_STEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianExperimentResult {
    pub gamma: f64,
    pub r: f64,
    pub n_steps: usize,
    pub seed: u64,
    pub lag1_autocorr_x: f64,
    /// `gamma^2`.
    pub theory_rho_d: f64,
    /// Random-scan rate from the closed form at `rho_d = gamma^2`.
    pub theory_rho_r: f64,
}

/// Runs `n_steps` sweeps (Y from `N(gamma x, 1 - gamma^2)`, then X from
/// `N(gamma y, 1 - gamma^2)`) from a stationary start and estimates the
/// lag-1 autocorrelation of the X path.
pub fn gaussian_experiment(
    gamma: f64,
    r: f64,
    n_steps: usize,
    seed: u64,
) -> Result<GaussianExperimentResult> {
    if !(gamma.abs() < 1.0) {
        return Err(Error::DomainError(format!(
            "correlation {gamma} must lie strictly inside (-1, 1)"
        )));
    }
    if n_steps < MIN_GAUSSIAN_STEPS {
        return Err(Error::DomainError(format!(
            "n_steps = {n_steps} is below the minimum of {MIN_GAUSSIAN_STEPS}"
        )));
    }
    let selection = SelectionProbability::new(r)?;
    let sd = (1.0 - gamma * gamma).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut z = || -> f64 { StandardNormal.sample(&mut rng) };

    let mut x = z();
    let mut path = Vec::with_capacity(n_steps);
    for _ in 0..n_steps {
        let y = gamma * x + sd * z();
        x = gamma * y + sd * z();
        path.push(x);
    }

    let theory_rho_d = gamma * gamma;
    Ok(GaussianExperimentResult {
        gamma,
        r: selection.value(),
        n_steps,
        seed,
        lag1_autocorr_x: lag1_autocorrelation(&path),
        theory_rho_d,
        theory_rho_r: theorem1_rhs(theory_rho_d, r)?,
    })
}

fn lag1_autocorrelation(path: &[f64]) -> f64 {
    let n = path.len() as f64;
    let mean = path.iter().sum::<f64>() / n;
    let var: f64 = path.iter().map(|v| (v - mean) * (v - mean)).sum();
    let cov: f64 = path
        .windows(2)
        .map(|w| (w[0] - mean) * (w[1] - mean))
        .sum();
    if var > 0.0 {
        (cov / var).clamp(-1.0, 1.0)
    } else {
        0.0
    }
}
