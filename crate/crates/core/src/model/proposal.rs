use nalgebra::DMatrix;

use super::{product_index, Axis, FiniteJointDistribution, PROBABILITY_TOL};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Proposal `q(.|x,y)` over the states of one component.
///
/// Row `x * ny + y` of the table is the probability vector proposed from
/// the current state `(x, y)`; it has `nx` entries when `axis` is X and
/// `ny` entries when it is Y.
#[derive(Debug, Clone, PartialEq)]
pub struct ProposalFamily<T: Scalar> {
    axis: Axis,
    nx: usize,
    ny: usize,
    table: DMatrix<T>,
}

impl<T: Scalar> ProposalFamily<T> {
    pub fn new(axis: Axis, nx: usize, ny: usize, table: DMatrix<T>) -> Result<Self> {
        let width = match axis {
            Axis::X => nx,
            Axis::Y => ny,
        };
        if table.nrows() != nx * ny {
            return Err(Error::DimensionMismatch {
                expected: nx * ny,
                found: table.nrows(),
            });
        }
        if table.ncols() != width {
            return Err(Error::DimensionMismatch {
                expected: width,
                found: table.ncols(),
            });
        }
        let tolerance = T::tol(PROBABILITY_TOL);
        for s in 0..table.nrows() {
            let row = table.row(s);
            if row.iter().any(|v| !v.is_finite() || *v < T::zero()) {
                return Err(Error::InvalidProposal(format!(
                    "row {s} has a negative or non-finite entry"
                )));
            }
            let sum = row.sum();
            if (sum - T::one()).magnitude() > tolerance {
                return Err(Error::InvalidProposal(format!(
                    "row {s} sums to {sum}, not 1"
                )));
            }
        }
        Ok(Self {
            axis,
            nx,
            ny,
            table,
        })
    }

    /// One probability vector per current state, in row-major `(x, y)` order.
    pub fn from_vectors(axis: Axis, nx: usize, ny: usize, rows: &[Vec<T>]) -> Result<Self> {
        if rows.len() != nx * ny {
            return Err(Error::DimensionMismatch {
                expected: nx * ny,
                found: rows.len(),
            });
        }
        let width = rows.first().map_or(0, Vec::len);
        if let Some((s, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != width) {
            return Err(Error::NotRectangular {
                row: s,
                expected: width,
                found: row.len(),
            });
        }
        Self::new(
            axis,
            nx,
            ny,
            DMatrix::from_fn(rows.len(), width, |s, j| rows[s][j]),
        )
    }

    /// Same vector `weights` proposed from every state.
    pub fn constant(axis: Axis, nx: usize, ny: usize, weights: &[T]) -> Result<Self> {
        Self::new(
            axis,
            nx,
            ny,
            DMatrix::from_fn(nx * ny, weights.len(), |_, j| weights[j]),
        )
    }

    /// Uniform over the states of `axis` other than the current one. On a
    /// two-state component this always swaps.
    pub fn swap(axis: Axis, nx: usize, ny: usize) -> Result<Self> {
        let width = match axis {
            Axis::X => nx,
            Axis::Y => ny,
        };
        if width < 2 {
            return Err(Error::InvalidProposal(
                "a swap proposal needs at least two states".into(),
            ));
        }
        let mass = T::one() / T::from_usize_lossy(width - 1);
        let table = DMatrix::from_fn(nx * ny, width, |s, j| {
            let current = match axis {
                Axis::X => s / ny,
                Axis::Y => s % ny,
            };
            if j == current {
                T::zero()
            } else {
                mass
            }
        });
        Self::new(axis, nx, ny, table)
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    /// Number of states of the proposed component.
    pub fn width(&self) -> usize {
        self.table.ncols()
    }

    pub fn table(&self) -> &DMatrix<T> {
        &self.table
    }

    /// `q(proposed | x, y)`.
    pub fn prob(&self, proposed: usize, x: usize, y: usize) -> T {
        self.table[(product_index(x, y, self.ny), proposed)]
    }

    /// Vectors in row-major `(x, y)` order, as in the JSON schema.
    pub fn to_vectors(&self) -> Vec<Vec<T>> {
        self.table
            .row_iter()
            .map(|row| row.iter().copied().collect())
            .collect()
    }

    pub(crate) fn restrict(&self, kept_x: &[usize], kept_y: &[usize]) -> Result<Self> {
        let kept_axis = match self.axis {
            Axis::X => kept_x,
            Axis::Y => kept_y,
        };
        let nx = kept_x.len();
        let ny = kept_y.len();
        let mut table = DMatrix::zeros(nx * ny, kept_axis.len());
        for (i, &x) in kept_x.iter().enumerate() {
            for (j, &y) in kept_y.iter().enumerate() {
                let s = product_index(i, j, ny);
                let current = match self.axis {
                    Axis::X => i,
                    Axis::Y => j,
                };
                let mut kept_mass = T::zero();
                for (k, &original) in kept_axis.iter().enumerate() {
                    let q = self.prob(original, x, y);
                    table[(s, k)] = q;
                    kept_mass += q;
                }
                table[(s, current)] += T::one() - kept_mass;
            }
        }
        Self::new(self.axis, nx, ny, table)
    }
}

/// Proposal equal to the `axis` marginal of `joint` from every state.
pub fn gen_independence_proposal<T: Scalar>(
    joint: &FiniteJointDistribution<T>,
    axis: Axis,
) -> Result<ProposalFamily<T>> {
    let marginal = joint.marginal(axis);
    if let Some(index) = marginal.iter().position(|&m| m <= T::zero()) {
        return Err(Error::ZeroMarginal { axis, index });
    }
    let weights: Vec<T> = marginal.iter().copied().collect();
    ProposalFamily::constant(axis, joint.nx(), joint.ny(), &weights)
}
