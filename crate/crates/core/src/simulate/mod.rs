//! Exact distribution iteration, distances to stationarity, decay-rate
//! fitting, chain sampling and the bivariate Gaussian experiment.

mod chain;
mod gaussian;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{TransitionKernel, INPUT_SUM_TOL};
use crate::scalar::Scalar;
use crate::spectral::centered_similarity;

pub use chain::{occupation_frequencies, sample_chain};
pub use gaussian::{gaussian_experiment, GaussianExperimentResult, MIN_GAUSSIAN_STEPS};

/// Default fit window `(n1, n2)`.
pub const DEFAULT_WINDOW: (usize, usize) = (10, 30);
/// Smallest relative component on the dominant eigenspace for a start to
/// count as generic.
pub const GENERIC_OVERLAP: f64 = 1e-6;
/// Eigenvalues whose moduli differ by less than this share an eigenspace.
const EIGENSPACE_GAP: f64 = 1e-9;

fn check_distribution<T: Scalar>(kernel: &TransitionKernel<T>, mu: &[T]) -> Result<()> {
    if mu.len() != kernel.n_states() {
        return Err(Error::DimensionMismatch {
            expected: kernel.n_states(),
            found: mu.len(),
        });
    }
    let total = mu.iter().fold(T::zero(), |a, b| a + *b);
    if mu.iter().any(|m| !m.is_finite() || *m < T::zero())
        || (total - T::one()).magnitude() > T::tol(INPUT_SUM_TOL)
    {
        return Err(Error::DomainError(
            "initial law is not a probability vector".into(),
        ));
    }
    Ok(())
}

/// `mu0, mu0 P, ..., mu0 P^n` by exact left multiplication.
pub fn iterate_distribution<T: Scalar>(
    kernel: &TransitionKernel<T>,
    mu0: &[T],
    n: usize,
) -> Result<Vec<DVector<T>>> {
    check_distribution(kernel, mu0)?;
    let mut current = DVector::from_column_slice(mu0);
    let mut out = Vec::with_capacity(n + 1);
    out.push(current.clone());
    for _ in 0..n {
        current = kernel.matrix().tr_mul(&current);
        out.push(current.clone());
    }
    Ok(out)
}

/// `sqrt(sum_s pi(s) (mu(s) / pi(s) - 1)^2)`.
pub fn chi_square_distance<T: Scalar>(mu: &[T], pi: &[T]) -> Result<T> {
    if mu.len() != pi.len() {
        return Err(Error::DimensionMismatch {
            expected: pi.len(),
            found: mu.len(),
        });
    }
    let signed: Vec<T> = mu.iter().zip(pi).map(|(m, p)| *m - *p).collect();
    chi_square_of_error(&signed, pi)
}

fn chi_square_of_error<T: Scalar>(error: &[T], pi: &[T]) -> Result<T> {
    let mut total = T::zero();
    for (s, (e, p)) in error.iter().zip(pi).enumerate() {
        if *p <= T::zero() {
            return Err(Error::ZeroStationaryMass { state: s });
        }
        total += *e * *e / *p;
    }
    Ok(total.sqrt())
}

/// Half the L¹ distance.
pub fn total_variation<T: Scalar>(mu: &[T], pi: &[T]) -> T {
    let sum = mu
        .iter()
        .zip(pi)
        .fold(T::zero(), |acc, (m, p)| acc + (*m - *p).magnitude());
    sum / T::lit(2.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayPoint {
    pub n: usize,
    pub chi_square: f64,
    pub tv: f64,
}

/// Least-squares fit of `d_n ~ c_mu rho^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricFit {
    pub rate: f64,
    /// `c_mu`, the exponentiated intercept.
    pub intercept: f64,
    pub window: (usize, usize),
}

/// Distances of `mu0 P^n` to stationarity with fitted decay rates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayTrace {
    pub initial: String,
    pub points: Vec<DecayPoint>,
    pub fitted_rate: f64,
    pub fit: Option<GeometricFit>,
    pub tv_fit: Option<GeometricFit>,
    /// Relative weight of the start on the dominant eigenspace (reversible
    /// kernels only).
    pub dominant_overlap: Option<f64>,
}

impl DecayTrace {
    /// True unless the start is known to miss the dominant eigenspace.
    pub fn is_generic(&self) -> bool {
        self.dominant_overlap.is_none_or(|o| o >= GENERIC_OVERLAP)
    }

    pub fn chi_square_series(&self) -> Vec<(usize, f64)> {
        self.points.iter().map(|p| (p.n, p.chi_square)).collect()
    }

    pub fn tv_series(&self) -> Vec<(usize, f64)> {
        self.points.iter().map(|p| (p.n, p.tv)).collect()
    }
}

/// Slope of the least-squares line through `(n, ln d_n)` for `n` in the
/// window, exponentiated and clamped to `[0, 1]`.
pub fn fit_geometric_rate(series: &[(usize, f64)], window: (usize, usize)) -> Result<GeometricFit> {
    let (n1, n2) = window;
    if n1 < 1 || n2 <= n1 {
        return Err(Error::DomainError(format!(
            "fit window ({n1}, {n2}) needs n2 > n1 >= 1"
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(n, d) in series.iter().filter(|(n, _)| (n1..=n2).contains(n)) {
        if !(d > 0.0) {
            return Err(Error::ZeroDistanceInWindow { n });
        }
        xs.push(n as f64);
        ys.push(d.ln());
    }
    if xs.len() < 2 {
        return Err(Error::DomainError(format!(
            "fewer than two points inside window ({n1}, {n2})"
        )));
    }
    let count = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / count;
    let mean_y = ys.iter().sum::<f64>() / count;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - mean_x) * (y - mean_y);
        sxx += (x - mean_x) * (x - mean_x);
    }
    let slope = sxy / sxx;
    Ok(GeometricFit {
        rate: slope.exp().clamp(0.0, 1.0),
        intercept: (mean_y - slope * mean_x).exp(),
        window,
    })
}

/// Decay of `mu0 P^n` towards `pi` for `n = 0..=n_max`, fitted on `window`.
///
/// The signed error `mu0 P^n - pi` is propagated directly and its total
/// mass projected out after every step, so distances far below machine
/// epsilon relative to `pi` stay accurate.
pub fn decay_trace<T: Scalar>(
    kernel: &TransitionKernel<T>,
    mu0: &[T],
    n_max: usize,
    window: (usize, usize),
    initial: impl Into<String>,
) -> Result<DecayTrace> {
    check_distribution(kernel, mu0)?;
    let pi: Vec<T> = kernel.stationary().iter().copied().collect();
    let mut error = DVector::from_iterator(mu0.len(), mu0.iter().zip(&pi).map(|(m, p)| *m - *p));
    let pi_vec = kernel.stationary();
    let mut points = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        if n > 0 {
            error = kernel.matrix().tr_mul(&error);
            let drift = error.sum();
            error -= pi_vec * drift;
        }
        let e: Vec<T> = error.iter().copied().collect();
        points.push(DecayPoint {
            n,
            chi_square: chi_square_of_error(&e, &pi)?.as_f64(),
            tv: (e.iter().fold(T::zero(), |a, v| a + v.magnitude()) / T::lit(2.0)).as_f64(),
        });
    }

    let fit_series = |select: fn(&DecayPoint) -> f64| -> Result<Option<GeometricFit>> {
        let series: Vec<(usize, f64)> = points.iter().map(|p| (p.n, select(p))).collect();
        match fit_geometric_rate(&series, window) {
            Ok(fit) => Ok(Some(fit)),
            Err(Error::ZeroDistanceInWindow { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    };
    let fit = fit_series(|p| p.chi_square)?;
    let tv_fit = fit_series(|p| p.tv)?;
    let dominant_overlap = if kernel.is_reversible() {
        Some(dominant_overlap(kernel, mu0)?)
    } else {
        None
    };
    Ok(DecayTrace {
        initial: initial.into(),
        points,
        fitted_rate: fit.map_or(0.0, |f| f.rate),
        fit,
        tv_fit,
        dominant_overlap,
    })
}

/// Share of the initial error, in the `L²(pi)` norm, carried by the
/// eigenspace of largest modulus on the mean-zero space of a reversible
/// kernel. Zero when `mu0 = pi`.
pub fn dominant_overlap<T: Scalar>(kernel: &TransitionKernel<T>, mu0: &[T]) -> Result<f64> {
    if !kernel.is_reversible() {
        return Err(Error::InvalidKernel(
            "eigenspace overlap needs a reversible kernel".into(),
        ));
    }
    check_distribution(kernel, mu0)?;
    let m = centered_similarity(kernel)?;
    let eig = linalg::symmetric_eigen(&m)?;
    let pi = kernel.stationary();
    // error in the symmetric coordinates: (mu - pi) / sqrt(pi)
    let v = DVector::from_fn(mu0.len(), |s, _| (mu0[s] - pi[s]) / pi[s].sqrt());
    let total = v.norm().as_f64();
    if total == 0.0 {
        return Ok(0.0);
    }
    let top = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, l| acc.max(l.as_f64().abs()));
    let mut captured = 0.0;
    for (k, lambda) in eig.eigenvalues.iter().enumerate() {
        if (lambda.as_f64().abs() - top).abs() < EIGENSPACE_GAP {
            let c = eig.eigenvectors.column(k).dot(&v).as_f64();
            captured += c * c;
        }
    }
    Ok(captured.sqrt() / total)
}

/// Point mass with the largest dominant-eigenspace overlap, and that
/// overlap. Errors when no point mass reaches [`GENERIC_OVERLAP`].
pub fn generic_point_mass_start<T: Scalar>(kernel: &TransitionKernel<T>) -> Result<(usize, f64)> {
    let n = kernel.n_states();
    let mut best = (0, f64::NEG_INFINITY);
    for s in 0..n {
        let overlap = dominant_overlap(kernel, &point_mass(n, s))?;
        if overlap > best.1 {
            best = (s, overlap);
        }
    }
    if best.1 < GENERIC_OVERLAP {
        return Err(Error::DomainError(
            "no point mass has a component on the dominant eigenspace".into(),
        ));
    }
    Ok(best)
}

/// Unit mass on state `s` of an `n`-state space.
pub fn point_mass<T: Scalar>(n: usize, s: usize) -> Vec<T> {
    (0..n).map(|t| if t == s { T::one() } else { T::zero() }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{dg_kernel, rc_kernel, rg_kernel};
    use crate::model::{validate_joint, FiniteJointDistribution, SelectionProbability};
    use crate::theory::build_counterexample;

    fn example() -> FiniteJointDistribution<f64> {
        validate_joint(&[vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap()
    }

    fn half() -> SelectionProbability<f64> {
        SelectionProbability::new(0.5).unwrap()
    }

    #[test]
    fn stationary_start_stays_put() {
        let kernel = rg_kernel(&example(), half()).unwrap();
        let pi: Vec<f64> = kernel.stationary().iter().copied().collect();
        for mu in iterate_distribution(&kernel, &pi, 10).unwrap() {
            assert!(mu.iter().zip(&pi).all(|(a, b)| (a - b).abs() < 1e-13));
        }
        assert_eq!(iterate_distribution(&kernel, &pi, 0).unwrap().len(), 1);
        assert!(matches!(
            iterate_distribution(&kernel, &[1.0], 1),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn counterexample_one_step() {
        let (joint, swap) = build_counterexample::<f64>();
        let prm = rc_kernel(&joint, &swap, half()).unwrap();
        let path = iterate_distribution(&prm, &point_mass(4, 0), 1).unwrap();
        let step = &path[1];
        // states in row-major order: (0,0), (0,1), (1,0), (1,1)
        assert!((step[2] - 0.5).abs() < 1e-15);
        assert!((step[0] - 0.25).abs() < 1e-15);
        assert!((step[1] - 0.25).abs() < 1e-15);
        assert!(step[3].abs() < 1e-15);
    }

    #[test]
    fn chi_square_examples() {
        let pi = [0.25; 4];
        assert_eq!(chi_square_distance(&pi, &pi).unwrap(), 0.0);
        let d = chi_square_distance(&[1.0, 0.0, 0.0, 0.0], &pi).unwrap();
        assert!((d - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(
            chi_square_distance(&[0.5, 0.5], &[1.0, 0.0]),
            Err(Error::ZeroStationaryMass { state: 1 })
        );
        assert!((total_variation::<f64>(&[1.0, 0.0], &[0.5, 0.5]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn exact_geometric_sequence_fit() {
        let series: Vec<(usize, f64)> = (0..40).map(|n| (n, 3.0 * 0.7f64.powi(n as i32))).collect();
        let fit = fit_geometric_rate(&series, (10, 30)).unwrap();
        assert!((fit.rate - 0.7).abs() < 1e-12);
        assert!((fit.intercept - 3.0).abs() < 1e-9);
        let with_zero = vec![(10, 1.0), (11, 0.0), (12, 0.5)];
        assert_eq!(
            fit_geometric_rate(&with_zero, (10, 12)),
            Err(Error::ZeroDistanceInWindow { n: 11 })
        );
        assert!(fit_geometric_rate(&series, (5, 5)).is_err());
    }

    #[test]
    fn decay_rates_on_the_example() {
        let joint = example();
        let pr = rg_kernel(&joint, half()).unwrap();
        let trace = decay_trace(&pr, &point_mass(4, 0), 30, DEFAULT_WINDOW, "delta(0,0)").unwrap();
        assert!((trace.fitted_rate - 0.8).abs() < 0.008);
        assert!(trace.is_generic());
        let pd = dg_kernel(&joint).unwrap();
        let trace = decay_trace(&pd, &point_mass(4, 0), 30, DEFAULT_WINDOW, "delta(0,0)").unwrap();
        assert!((trace.fitted_rate - 0.36).abs() < 0.0036);
        assert!(trace.points[30].chi_square > 0.0);
    }

    #[test]
    fn stationary_start_has_zero_rate() {
        let pr = rg_kernel(&example(), half()).unwrap();
        let pi: Vec<f64> = pr.stationary().iter().copied().collect();
        let trace = decay_trace(&pr, &pi, 30, DEFAULT_WINDOW, "pi").unwrap();
        assert_eq!(trace.fitted_rate, 0.0);
        assert!(trace.fit.is_none());
        assert_eq!(trace.dominant_overlap, Some(0.0));
    }

    #[test]
    fn generic_start_detection() {
        let pr = rg_kernel(&example(), half()).unwrap();
        let (_, overlap) = generic_point_mass_start(&pr).unwrap();
        assert!(overlap > 0.1);
    }
}
