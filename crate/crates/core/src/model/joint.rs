use nalgebra::{DMatrix, DVector};

use super::{Axis, ProposalFamily, INPUT_SUM_TOL};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Target pmf on `{0..nx} x {0..ny}`; row index is `x`, column index is `y`.
///
/// Construction checks nonnegativity, total mass 1 within
/// [`INPUT_SUM_TOL`] (then renormalizes exactly), and that at least two X
/// states and two Y states carry positive mass.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteJointDistribution<T: Scalar> {
    table: DMatrix<T>,
}

/// Validates a rectangular table given as rows.
pub fn validate_joint<T: Scalar>(rows: &[Vec<T>]) -> Result<FiniteJointDistribution<T>> {
    let nx = rows.len();
    if nx == 0 || rows[0].is_empty() {
        return Err(Error::EmptyTable);
    }
    let ny = rows[0].len();
    for (row, values) in rows.iter().enumerate() {
        if values.len() != ny {
            return Err(Error::NotRectangular {
                row,
                expected: ny,
                found: values.len(),
            });
        }
    }
    FiniteJointDistribution::new(DMatrix::from_fn(nx, ny, |x, y| rows[x][y]))
}

impl<T: Scalar> FiniteJointDistribution<T> {
    pub fn new(table: DMatrix<T>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::EmptyTable);
        }
        let mut sum = T::zero();
        for x in 0..table.nrows() {
            for y in 0..table.ncols() {
                let value = table[(x, y)];
                if !value.is_finite() {
                    return Err(Error::NonFinite { row: x, col: y });
                }
                if value < T::zero() {
                    return Err(Error::NegativeEntry {
                        row: x,
                        col: y,
                        value: value.as_f64(),
                    });
                }
                sum += value;
            }
        }
        let tolerance = T::tol(INPUT_SUM_TOL);
        if (sum - T::one()).magnitude() > tolerance {
            return Err(Error::SumNotOne {
                sum: sum.as_f64(),
                tolerance: tolerance.as_f64(),
            });
        }
        let table = table / sum;

        let positive_rows = (0..table.nrows())
            .filter(|&x| table.row(x).sum() > T::zero())
            .count();
        let positive_cols = (0..table.ncols())
            .filter(|&y| table.column(y).sum() > T::zero())
            .count();
        if positive_rows < 2 || positive_cols < 2 {
            return Err(Error::AssumptionOneViolated {
                positive_rows,
                positive_cols,
            });
        }
        Ok(Self { table })
    }

    /// Row-major flat layout, as in the JSON schema.
    pub fn from_row_major(nx: usize, ny: usize, p: &[T]) -> Result<Self> {
        if p.len() != nx * ny {
            return Err(Error::DimensionMismatch {
                expected: nx * ny,
                found: p.len(),
            });
        }
        Self::new(DMatrix::from_row_slice(nx, ny, p))
    }

    /// Independent coupling of two marginals.
    pub fn product(px: &[T], py: &[T]) -> Result<Self> {
        Self::new(DMatrix::from_fn(px.len(), py.len(), |x, y| px[x] * py[y]))
    }

    pub fn nx(&self) -> usize {
        self.table.nrows()
    }

    pub fn ny(&self) -> usize {
        self.table.ncols()
    }

    pub fn prob(&self, x: usize, y: usize) -> T {
        self.table[(x, y)]
    }

    pub fn table(&self) -> &DMatrix<T> {
        &self.table
    }

    pub fn to_row_major(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.nx() * self.ny());
        for x in 0..self.nx() {
            for y in 0..self.ny() {
                out.push(self.table[(x, y)]);
            }
        }
        out
    }

    pub fn marginal_x(&self) -> DVector<T> {
        DVector::from_fn(self.nx(), |x, _| self.table.row(x).sum())
    }

    pub fn marginal_y(&self) -> DVector<T> {
        DVector::from_fn(self.ny(), |y, _| self.table.column(y).sum())
    }

    pub fn marginal(&self, axis: Axis) -> DVector<T> {
        match axis {
            Axis::X => self.marginal_x(),
            Axis::Y => self.marginal_y(),
        }
    }

    pub fn is_strictly_positive(&self) -> bool {
        self.table.iter().all(|&v| v > T::zero())
    }

    /// Drops X and Y states with zero marginal mass.
    pub fn restrict_to_support(&self) -> SupportRestriction<T> {
        let px = self.marginal_x();
        let py = self.marginal_y();
        let kept_x: Vec<usize> = (0..self.nx()).filter(|&x| px[x] > T::zero()).collect();
        let kept_y: Vec<usize> = (0..self.ny()).filter(|&y| py[y] > T::zero()).collect();
        let table = DMatrix::from_fn(kept_x.len(), kept_y.len(), |i, j| {
            self.table[(kept_x[i], kept_y[j])]
        });
        SupportRestriction {
            joint: Self { table },
            kept_x,
            kept_y,
            original_shape: (self.nx(), self.ny()),
        }
    }
}

/// A joint with its zero-mass marginal states removed, plus the index maps
/// back to the original labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportRestriction<T: Scalar> {
    pub joint: FiniteJointDistribution<T>,
    /// `kept_x[i]` is the original X label of restricted state `i`.
    pub kept_x: Vec<usize>,
    pub kept_y: Vec<usize>,
    pub original_shape: (usize, usize),
}

impl<T: Scalar> SupportRestriction<T> {
    /// True when no state was dropped.
    pub fn is_identity(&self) -> bool {
        (self.kept_x.len(), self.kept_y.len()) == self.original_shape
    }

    /// Re-indexes a proposal defined on the original space. Mass proposed
    /// into a dropped state is moved onto the current state; such moves
    /// target zero conditional mass and are always rejected, so the
    /// resulting Metropolis-Hastings kernel is unchanged on the support.
    pub fn restrict_proposal(&self, proposal: &ProposalFamily<T>) -> Result<ProposalFamily<T>> {
        proposal.restrict(&self.kept_x, &self.kept_y)
    }
}
