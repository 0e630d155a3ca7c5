#![allow(dead_code)]

use gibbs_spectra::model::{dirichlet_corpus, Concentration};
use gibbs_spectra::{Joint64, Kernel64};

pub fn corpus(count: usize, n: usize, seed: u64) -> Vec<Joint64> {
    dirichlet_corpus(count, n, n, &Concentration::default(), seed).unwrap()
}

pub fn example() -> Joint64 {
    gibbs_spectra::model::validate_joint(&[vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap()
}

/// Cyclic Jacobi rotations on a dense symmetric matrix, row-major.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut values: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    values.sort_by(|x, y| x.partial_cmp(y).unwrap());
    values
}

/// Eigenvalues of `D^(1/2) P D^(-1/2) - sqrt(pi) sqrt(pi)^T`, symmetrized,
/// for a reversible kernel.
pub fn centered_spectrum(kernel: &Kernel64) -> Vec<f64> {
    let n = kernel.n_states();
    let u: Vec<f64> = kernel.stationary().iter().map(|p| p.sqrt()).collect();
    let m: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let a = u[i] * kernel.prob(i, j) / u[j];
                    let b = u[j] * kernel.prob(j, i) / u[i];
                    (a + b) / 2.0 - u[i] * u[j]
                })
                .collect()
        })
        .collect();
    jacobi_eigenvalues(m)
}

pub fn spectral_rate(kernel: &Kernel64) -> f64 {
    centered_spectrum(kernel)
        .into_iter()
        .map(f64::abs)
        .fold(0.0, f64::max)
}
