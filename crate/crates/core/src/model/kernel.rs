use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::PROBABILITY_TOL;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major index of the product state `(x, y)`.
pub fn product_index(x: usize, y: usize, ny: usize) -> usize {
    x * ny + y
}

pub fn decode_product_index(s: usize, ny: usize) -> (usize, usize) {
    (s / ny, s % ny)
}

/// Coordinates carried by one state of a kernel: both components for
/// product-space chains, one for marginal chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StateLabel {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub x: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub y: Option<usize>,
}

impl StateLabel {
    pub fn pair(x: usize, y: usize) -> Self {
        Self {
            x: Some(x),
            y: Some(y),
        }
    }

    pub fn x_only(x: usize) -> Self {
        Self { x: Some(x), y: None }
    }

    pub fn y_only(y: usize) -> Self {
        Self { x: None, y: Some(y) }
    }

    /// Labels of the product space in row-major order.
    pub fn product_space(nx: usize, ny: usize) -> Vec<Self> {
        (0..nx * ny)
            .map(|s| {
                let (x, y) = decode_product_index(s, ny);
                Self::pair(x, y)
            })
            .collect()
    }
}

/// Stochastic matrix over an indexed state space, with the stationary
/// distribution it is built for and whether it claims reversibility.
///
/// `matrix[(s, t)]` is the probability of moving from `s` to `t`. The
/// constructor checks row sums, stationarity and, when claimed, detailed
/// balance, all at [`PROBABILITY_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionKernel<T: Scalar> {
    labels: Vec<StateLabel>,
    matrix: DMatrix<T>,
    stationary: DVector<T>,
    reversible: bool,
}

impl<T: Scalar> TransitionKernel<T> {
    pub fn new(
        labels: Vec<StateLabel>,
        matrix: DMatrix<T>,
        stationary: DVector<T>,
        reversible: bool,
    ) -> Result<Self> {
        let n = labels.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        if stationary.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: stationary.len(),
            });
        }
        if matrix.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::InvalidKernel(
                "negative or non-finite transition probability".into(),
            ));
        }
        let kernel = Self {
            labels,
            matrix,
            stationary,
            reversible,
        };
        let tolerance = T::tol(PROBABILITY_TOL);
        let rows = kernel.row_sum_defect();
        if rows > tolerance {
            return Err(Error::InvalidKernel(format!(
                "row sums deviate from 1 by {rows}"
            )));
        }
        let mass = (kernel.stationary.sum() - T::one()).magnitude();
        if mass > tolerance || kernel.stationary.iter().any(|p| *p < T::zero()) {
            return Err(Error::InvalidKernel(
                "stationary vector is not a probability vector".into(),
            ));
        }
        let drift = kernel.stationarity_defect();
        if drift > tolerance {
            return Err(Error::InvalidKernel(format!(
                "stationary vector moves by {drift} under one step"
            )));
        }
        if reversible {
            let balance = kernel.detailed_balance_defect();
            if balance > tolerance {
                return Err(Error::InvalidKernel(format!(
                    "detailed balance fails by {balance}"
                )));
            }
        }
        Ok(kernel)
    }

    pub fn n_states(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[StateLabel] {
        &self.labels
    }

    pub fn label(&self, s: usize) -> StateLabel {
        self.labels[s]
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn stationary(&self) -> &DVector<T> {
        &self.stationary
    }

    pub fn is_reversible(&self) -> bool {
        self.reversible
    }

    pub fn prob(&self, from: usize, to: usize) -> T {
        self.matrix[(from, to)]
    }

    /// Largest `|sum_t P[s][t] - 1|`.
    pub fn row_sum_defect(&self) -> T {
        self.matrix
            .row_iter()
            .map(|row| (row.sum() - T::one()).magnitude())
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Largest entry of `|pi P - pi|`.
    pub fn stationarity_defect(&self) -> T {
        let moved = self.matrix.tr_mul(&self.stationary);
        (moved - &self.stationary)
            .iter()
            .fold(T::zero(), |a, b| a.max(b.magnitude()))
    }

    /// Largest `|pi(s) P[s][t] - pi(t) P[t][s]|`.
    pub fn detailed_balance_defect(&self) -> T {
        let n = self.n_states();
        let mut worst = T::zero();
        for s in 0..n {
            for t in (s + 1)..n {
                let flow = self.stationary[s] * self.matrix[(s, t)]
                    - self.stationary[t] * self.matrix[(t, s)];
                worst = worst.max(flow.magnitude());
            }
        }
        worst
    }

    /// `P^n` as a dense matrix (`n = 0` gives the identity).
    pub fn power(&self, n: usize) -> DMatrix<T> {
        let mut result = DMatrix::identity(self.n_states(), self.n_states());
        for _ in 0..n {
            result = &result * &self.matrix;
        }
        result
    }

    /// Kernel restricted to states of positive stationary mass. Stationary
    /// flow never enters a null state, so the restricted rows stay
    /// stochastic.
    pub fn restrict_to_positive_support(&self) -> Result<Self> {
        let kept: Vec<usize> = (0..self.n_states())
            .filter(|&s| self.stationary[s] > T::zero())
            .collect();
        if kept.len() == self.n_states() {
            return Ok(self.clone());
        }
        let matrix = DMatrix::from_fn(kept.len(), kept.len(), |i, j| {
            self.matrix[(kept[i], kept[j])]
        });
        let stationary = DVector::from_fn(kept.len(), |i, _| self.stationary[kept[i]]);
        let labels = kept.iter().map(|&s| self.labels[s]).collect();
        Self::new(labels, matrix, stationary, self.reversible)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state(a: f64, b: f64) -> TransitionKernel<f64> {
        let matrix = DMatrix::from_row_slice(2, 2, &[1.0 - a, a, b, 1.0 - b]);
        let stationary = DVector::from_vec(vec![b / (a + b), a / (a + b)]);
        TransitionKernel::new(
            vec![StateLabel::x_only(0), StateLabel::x_only(1)],
            matrix,
            stationary,
            true,
        )
        .unwrap()
    }

    #[test]
    fn product_index_round_trips() {
        for ny in 1..5 {
            for s in 0..(3 * ny) {
                let (x, y) = decode_product_index(s, ny);
                assert_eq!(product_index(x, y, ny), s);
            }
        }
        let labels = StateLabel::product_space(2, 3);
        assert_eq!(labels[4], StateLabel::pair(1, 1));
    }

    #[test]
    fn two_state_chain_passes_every_check() {
        let kernel = two_state(0.3, 0.1);
        assert!(kernel.row_sum_defect() < 1e-15);
        assert!(kernel.stationarity_defect() < 1e-15);
        assert!(kernel.detailed_balance_defect() < 1e-15);
        assert_eq!(kernel.power(0), DMatrix::identity(2, 2));
    }

    #[test]
    fn wrong_stationary_vector_is_rejected() {
        let matrix = DMatrix::from_row_slice(2, 2, &[0.7, 0.3, 0.1, 0.9]);
        let result = TransitionKernel::new(
            vec![StateLabel::x_only(0), StateLabel::x_only(1)],
            matrix,
            DVector::from_vec(vec![0.5, 0.5]),
            false,
        );
        assert!(matches!(result, Err(Error::InvalidKernel(_))));
    }

    #[test]
    fn false_reversibility_claim_is_rejected() {
        // cyclic rotation on three states: uniform is stationary, not reversible
        let matrix = DMatrix::from_row_slice(3, 3, &[0., 1., 0., 0., 0., 1., 1., 0., 0.]);
        let labels = (0..3).map(StateLabel::x_only).collect::<Vec<_>>();
        let pi = DVector::from_element(3, 1.0 / 3.0);
        assert!(TransitionKernel::new(labels.clone(), matrix.clone(), pi.clone(), true).is_err());
        assert!(TransitionKernel::new(labels, matrix, pi, false).is_ok());
    }

    #[test]
    fn label_serialization_omits_missing_coordinates() {
        assert_eq!(
            serde_json::to_string(&StateLabel::pair(1, 2)).unwrap(),
            r#"{"x":1,"y":2}"#
        );
        assert_eq!(
            serde_json::to_string(&StateLabel::y_only(3)).unwrap(),
            r#"{"y":3}"#
        );
    }
}
