use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::TransitionKernel;
use crate::scalar::Scalar;

/// Path `s0, s1, ..., sn` of the chain, each step an inverse-CDF draw
/// from the current row using a ChaCha8 stream seeded with `seed`.
pub fn sample_chain<T: Scalar>(
    kernel: &TransitionKernel<T>,
    s0: usize,
    n: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    let states = kernel.n_states();
    if s0 >= states {
        return Err(Error::DimensionMismatch {
            expected: states,
            found: s0 + 1,
        });
    }
    let cdfs: Vec<Vec<f64>> = kernel
        .matrix()
        .row_iter()
        .map(|row| {
            row.iter()
                .scan(0.0, |acc, p| {
                    *acc += p.as_f64();
                    Some(*acc)
                })
                .collect()
        })
        .collect();
    // last state with positive mass per row, absorbing round-off at the top
    let last_positive: Vec<usize> = kernel
        .matrix()
        .row_iter()
        .map(|row| {
            row.iter()
                .rposition(|p| *p > T::zero())
                .expect("stochastic rows have positive mass")
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut path = Vec::with_capacity(n + 1);
    let mut current = s0;
    path.push(current);
    for _ in 0..n {
        let u: f64 = rng.random();
        let cdf = &cdfs[current];
        current = cdf
            .iter()
            .position(|&c| u < c)
            .unwrap_or(last_positive[current]);
        path.push(current);
    }
    Ok(path)
}

/// Fraction of the path spent in each state.
pub fn occupation_frequencies(path: &[usize], n_states: usize) -> Vec<f64> {
    let mut counts = vec![0usize; n_states];
    for &s in path {
        counts[s] += 1;
    }
    let total = path.len().max(1) as f64;
    counts.into_iter().map(|c| c as f64 / total).collect()
}
