//! Exact transition kernels of the two-component samplers.
//!
//! Product-space kernels index `(x, y)` as `x * ny + y`. Every sampler is
//! assembled from two single-component updates (an exact conditional
//! refresh or a Metropolis-Hastings step), composed for deterministic scan
//! or mixed with the selection probability for random scan.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{
    product_index, Axis, FiniteJointDistribution, ProposalFamily, SelectionProbability,
    StateLabel, TransitionKernel,
};
use crate::scalar::Scalar;

/// Both full conditionals of a joint with strictly positive marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalFamily<T: Scalar> {
    // entry (x, y) holds pi(x | y); columns are stochastic
    x_given_y: DMatrix<T>,
    // entry (x, y) holds pi(y | x); rows are stochastic
    y_given_x: DMatrix<T>,
    px: DVector<T>,
    py: DVector<T>,
}

pub fn conditionals<T: Scalar>(joint: &FiniteJointDistribution<T>) -> Result<ConditionalFamily<T>> {
    let px = joint.marginal_x();
    let py = joint.marginal_y();
    if let Some(index) = px.iter().position(|&m| m <= T::zero()) {
        return Err(Error::ZeroMarginal {
            axis: Axis::X,
            index,
        });
    }
    if let Some(index) = py.iter().position(|&m| m <= T::zero()) {
        return Err(Error::ZeroMarginal {
            axis: Axis::Y,
            index,
        });
    }
    let p = joint.table();
    let x_given_y = DMatrix::from_fn(joint.nx(), joint.ny(), |x, y| p[(x, y)] / py[y]);
    let y_given_x = DMatrix::from_fn(joint.nx(), joint.ny(), |x, y| p[(x, y)] / px[x]);
    Ok(ConditionalFamily {
        x_given_y,
        y_given_x,
        px,
        py,
    })
}

impl<T: Scalar> ConditionalFamily<T> {
    pub fn nx(&self) -> usize {
        self.px.len()
    }

    pub fn ny(&self) -> usize {
        self.py.len()
    }

    /// `pi(x | y)`.
    pub fn prob_x_given_y(&self, x: usize, y: usize) -> T {
        self.x_given_y[(x, y)]
    }

    /// `pi(y | x)`.
    pub fn prob_y_given_x(&self, y: usize, x: usize) -> T {
        self.y_given_x[(x, y)]
    }

    pub fn marginal_x(&self) -> &DVector<T> {
        &self.px
    }

    pub fn marginal_y(&self) -> &DVector<T> {
        &self.py
    }

    /// Probability of `updated` for component `axis` given the other
    /// component's value `other`.
    fn target(&self, axis: Axis, updated: usize, other: usize) -> T {
        match axis {
            Axis::X => self.prob_x_given_y(updated, other),
            Axis::Y => self.prob_y_given_x(updated, other),
        }
    }

    /// Largest deviation of `p(x,y)` from both Bayes factorizations.
    pub fn bayes_defect(&self, joint: &FiniteJointDistribution<T>) -> T {
        let mut worst = T::zero();
        for x in 0..self.nx() {
            for y in 0..self.ny() {
                let p = joint.prob(x, y);
                let via_y = self.prob_x_given_y(x, y) * self.py[y];
                let via_x = self.prob_y_given_x(y, x) * self.px[x];
                worst = worst
                    .max((p - via_y).magnitude())
                    .max((p - via_x).magnitude());
            }
        }
        worst
    }
}

impl<T: Scalar> ProposalFamily<T> {
    /// Proposal equal to the full conditional of `axis`; Metropolis-Hastings
    /// with it accepts every move.
    pub fn exact_conditional(cond: &ConditionalFamily<T>, axis: Axis) -> Result<Self> {
        let (nx, ny) = (cond.nx(), cond.ny());
        let width = match axis {
            Axis::X => nx,
            Axis::Y => ny,
        };
        let table = DMatrix::from_fn(nx * ny, width, |s, j| {
            let (x, y) = (s / ny, s % ny);
            match axis {
                Axis::X => cond.prob_x_given_y(j, y),
                Axis::Y => cond.prob_y_given_x(j, x),
            }
        });
        Self::new(axis, nx, ny, table)
    }
}

/// Single-component update kernel `Q(next | x, y)` for one axis, including
/// the rejection mass on the current value.
#[derive(Debug, Clone, PartialEq)]
pub struct MhStepFamily<T: Scalar> {
    axis: Axis,
    nx: usize,
    ny: usize,
    // row x * ny + y, column = next value of the updated component
    table: DMatrix<T>,
}

impl<T: Scalar> MhStepFamily<T> {
    /// Exact draw from the full conditional (the Gibbs update).
    pub fn exact_refresh(cond: &ConditionalFamily<T>, axis: Axis) -> Self {
        let (nx, ny) = (cond.nx(), cond.ny());
        let width = match axis {
            Axis::X => nx,
            Axis::Y => ny,
        };
        let table = DMatrix::from_fn(nx * ny, width, |s, j| {
            let (x, y) = (s / ny, s % ny);
            match axis {
                Axis::X => cond.prob_x_given_y(j, y),
                Axis::Y => cond.prob_y_given_x(j, x),
            }
        });
        Self {
            axis,
            nx,
            ny,
            table,
        }
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    /// `Q(next | x, y)`.
    pub fn prob(&self, next: usize, x: usize, y: usize) -> T {
        self.table[(product_index(x, y, self.ny), next)]
    }

    pub fn table(&self) -> &DMatrix<T> {
        &self.table
    }

    /// Largest violation of detailed balance with respect to the targeted
    /// conditional, over pairs of distinct values.
    pub fn detailed_balance_defect(&self, cond: &ConditionalFamily<T>) -> T {
        let width = self.table.ncols();
        let others = match self.axis {
            Axis::X => self.ny,
            Axis::Y => self.nx,
        };
        let mut worst = T::zero();
        for other in 0..others {
            for a in 0..width {
                for b in (a + 1)..width {
                    let (from_a, from_b) = match self.axis {
                        Axis::X => (self.prob(b, a, other), self.prob(a, b, other)),
                        Axis::Y => (self.prob(b, other, a), self.prob(a, other, b)),
                    };
                    let flow = cond.target(self.axis, a, other) * from_a
                        - cond.target(self.axis, b, other) * from_b;
                    worst = worst.max(flow.magnitude());
                }
            }
        }
        worst
    }
}

/// Metropolis-Hastings update of component `axis` targeting its full
/// conditional with the given proposal.
///
/// Moves proposed with zero probability are never taken. The rejection
/// mass is `1 - sum of accepted off-state moves`, so rows are stochastic
/// by construction.
pub fn mh_step<T: Scalar>(
    target: &ConditionalFamily<T>,
    axis: Axis,
    proposal: &ProposalFamily<T>,
) -> Result<MhStepFamily<T>> {
    if proposal.axis() != axis {
        return Err(Error::AxisMismatch {
            expected: axis,
            found: proposal.axis(),
        });
    }
    check_shape(target, proposal)?;
    let (nx, ny) = (target.nx(), target.ny());
    let width = proposal.width();
    let mut table = DMatrix::zeros(nx * ny, width);
    for x in 0..nx {
        for y in 0..ny {
            let (current, other) = match axis {
                Axis::X => (x, y),
                Axis::Y => (y, x),
            };
            // q(to | state with the updated coordinate set to `from`)
            let q = |to: usize, from: usize| match axis {
                Axis::X => proposal.prob(to, from, y),
                Axis::Y => proposal.prob(to, x, from),
            };
            let here = target.target(axis, current, other);
            let s = product_index(x, y, ny);
            let mut moved = T::zero();
            for next in (0..width).filter(|&next| next != current) {
                let forward = q(next, current);
                if forward <= T::zero() {
                    continue;
                }
                let denominator = here * forward;
                let acceptance = if denominator <= T::zero() {
                    T::one()
                } else {
                    let numerator = target.target(axis, next, other) * q(current, next);
                    (numerator / denominator).min(T::one())
                };
                let mass = forward * acceptance;
                table[(s, next)] = mass;
                moved += mass;
            }
            table[(s, current)] = (T::one() - moved).max(T::zero());
        }
    }
    Ok(MhStepFamily {
        axis,
        nx,
        ny,
        table,
    })
}

fn check_shape<T: Scalar>(cond: &ConditionalFamily<T>, proposal: &ProposalFamily<T>) -> Result<()> {
    if proposal.nx() != cond.nx() {
        return Err(Error::DimensionMismatch {
            expected: cond.nx(),
            found: proposal.nx(),
        });
    }
    if proposal.ny() != cond.ny() {
        return Err(Error::DimensionMismatch {
            expected: cond.ny(),
            found: proposal.ny(),
        });
    }
    Ok(())
}

fn x_update<T: Scalar>(
    cond: &ConditionalFamily<T>,
    proposal: Option<&ProposalFamily<T>>,
) -> Result<MhStepFamily<T>> {
    match proposal {
        Some(q) => mh_step(cond, Axis::X, q),
        None => Ok(MhStepFamily::exact_refresh(cond, Axis::X)),
    }
}

fn y_update<T: Scalar>(
    cond: &ConditionalFamily<T>,
    proposal: Option<&ProposalFamily<T>>,
) -> Result<MhStepFamily<T>> {
    match proposal {
        Some(q) => mh_step(cond, Axis::Y, q),
        None => Ok(MhStepFamily::exact_refresh(cond, Axis::Y)),
    }
}

fn stationary_of<T: Scalar>(joint: &FiniteJointDistribution<T>) -> DVector<T> {
    DVector::from_vec(joint.to_row_major())
}

/// Update Y with `first`, then X with `second` given the new Y.
fn deterministic_scan<T: Scalar>(
    joint: &FiniteJointDistribution<T>,
    first: &MhStepFamily<T>,
    second: &MhStepFamily<T>,
) -> Result<TransitionKernel<T>> {
    let (nx, ny) = (joint.nx(), joint.ny());
    let mut matrix = DMatrix::zeros(nx * ny, nx * ny);
    for x in 0..nx {
        for y in 0..ny {
            let s = product_index(x, y, ny);
            for y_next in 0..ny {
                let p_y = first.prob(y_next, x, y);
                if p_y == T::zero() {
                    continue;
                }
                for x_next in 0..nx {
                    matrix[(s, product_index(x_next, y_next, ny))] =
                        p_y * second.prob(x_next, x, y_next);
                }
            }
        }
    }
    TransitionKernel::new(
        StateLabel::product_space(nx, ny),
        matrix,
        stationary_of(joint),
        false,
    )
}

/// With probability `r` update X by `x_move`, otherwise Y by `y_move`.
fn random_scan<T: Scalar>(
    joint: &FiniteJointDistribution<T>,
    x_move: &MhStepFamily<T>,
    y_move: &MhStepFamily<T>,
    r: SelectionProbability<T>,
) -> Result<TransitionKernel<T>> {
    let (nx, ny) = (joint.nx(), joint.ny());
    let (rx, ry) = (r.value(), r.complement());
    let mut matrix = DMatrix::zeros(nx * ny, nx * ny);
    for x in 0..nx {
        for y in 0..ny {
            let s = product_index(x, y, ny);
            for x_next in 0..nx {
                matrix[(s, product_index(x_next, y, ny))] += rx * x_move.prob(x_next, x, y);
            }
            for y_next in 0..ny {
                matrix[(s, product_index(x, y_next, ny))] += ry * y_move.prob(y_next, x, y);
            }
        }
    }
    TransitionKernel::new(
        StateLabel::product_space(nx, ny),
        matrix,
        stationary_of(joint),
        true,
    )
}

fn expect_axis<T: Scalar>(proposal: &ProposalFamily<T>, axis: Axis) -> Result<()> {
    if proposal.axis() == axis {
        Ok(())
    } else {
        Err(Error::AxisMismatch {
            expected: axis,
            found: proposal.axis(),
        })
    }
}

/// Deterministic-scan Gibbs (refresh Y from `pi(.|x)`, then X from `pi(.|y')`).
pub fn dg_kernel<T: Scalar>(joint: &FiniteJointDistribution<T>) -> Result<TransitionKernel<T>> {
    let cond = conditionals(joint)?;
    deterministic_scan(joint, &y_update(&cond, None)?, &x_update(&cond, None)?)
}

/// Random-scan Gibbs with selection probability `r` for X.
pub fn rg_kernel<T: Scalar>(
    joint: &FiniteJointDistribution<T>,
    r: SelectionProbability<T>,
) -> Result<TransitionKernel<T>> {
    let cond = conditionals(joint)?;
    random_scan(joint, &x_update(&cond, None)?, &y_update(&cond, None)?, r)
}

/// Deterministic-scan CMH: Gibbs refresh of Y, then a Metropolis-Hastings
/// step on X with proposal `q2`.
pub fn dc_kernel<T: Scalar>(
    joint: &FiniteJointDistribution<T>,
    q2: &ProposalFamily<T>,
) -> Result<TransitionKernel<T>> {
    expect_axis(q2, Axis::X)?;
    let cond = conditionals(joint)?;
    deterministic_scan(joint, &y_update(&cond, None)?, &x_update(&cond, Some(q2))?)
}

/// Random-scan CMH with a Metropolis-Hastings X update.
pub fn rc_kernel<T: Scalar>(
    joint: &FiniteJointDistribution<T>,
    q2: &ProposalFamily<T>,
    r: SelectionProbability<T>,
) -> Result<TransitionKernel<T>> {
    expect_axis(q2, Axis::X)?;
    let cond = conditionals(joint)?;
    random_scan(joint, &x_update(&cond, Some(q2))?, &y_update(&cond, None)?, r)
}

/// Deterministic scan with Metropolis-Hastings updates on both components:
/// Y with `q1`, then X with `q2`.
pub fn dcmm_kernel<T: Scalar>(
    joint: &FiniteJointDistribution<T>,
    q1: &ProposalFamily<T>,
    q2: &ProposalFamily<T>,
) -> Result<TransitionKernel<T>> {
    expect_axis(q1, Axis::Y)?;
    expect_axis(q2, Axis::X)?;
    let cond = conditionals(joint)?;
    deterministic_scan(joint, &y_update(&cond, Some(q1))?, &x_update(&cond, Some(q2))?)
}

/// Random scan mixing the two Metropolis-Hastings updates.
pub fn rcmm_kernel<T: Scalar>(
    joint: &FiniteJointDistribution<T>,
    q1: &ProposalFamily<T>,
    q2: &ProposalFamily<T>,
    r: SelectionProbability<T>,
) -> Result<TransitionKernel<T>> {
    expect_axis(q1, Axis::Y)?;
    expect_axis(q2, Axis::X)?;
    let cond = conditionals(joint)?;
    random_scan(
        joint,
        &x_update(&cond, Some(q2))?,
        &y_update(&cond, Some(q1))?,
        r,
    )
}

/// X-marginal of the deterministic-scan Gibbs chain, reversible w.r.t. `pi_X`.
pub fn marginal_x<T: Scalar>(joint: &FiniteJointDistribution<T>) -> Result<TransitionKernel<T>> {
    let cond = conditionals(joint)?;
    let x_move = MhStepFamily::exact_refresh(&cond, Axis::X);
    x_marginal_of(&cond, &x_move)
}

/// Y-marginal of the deterministic-scan Gibbs chain, reversible w.r.t. `pi_Y`.
pub fn marginal_y<T: Scalar>(joint: &FiniteJointDistribution<T>) -> Result<TransitionKernel<T>> {
    let cond = conditionals(joint)?;
    let (nx, ny) = (cond.nx(), cond.ny());
    let matrix = DMatrix::from_fn(ny, ny, |y, y_next| {
        (0..nx).fold(T::zero(), |acc, x| {
            acc + cond.prob_x_given_y(x, y) * cond.prob_y_given_x(y_next, x)
        })
    });
    TransitionKernel::new(
        (0..ny).map(StateLabel::y_only).collect(),
        matrix,
        cond.marginal_y().clone(),
        true,
    )
}

/// X-marginal of the deterministic-scan CMH chain with proposal `q2`.
pub fn marginal_xm<T: Scalar>(
    joint: &FiniteJointDistribution<T>,
    q2: &ProposalFamily<T>,
) -> Result<TransitionKernel<T>> {
    expect_axis(q2, Axis::X)?;
    let cond = conditionals(joint)?;
    let x_move = mh_step(&cond, Axis::X, q2)?;
    x_marginal_of(&cond, &x_move)
}

fn x_marginal_of<T: Scalar>(
    cond: &ConditionalFamily<T>,
    x_move: &MhStepFamily<T>,
) -> Result<TransitionKernel<T>> {
    let (nx, ny) = (cond.nx(), cond.ny());
    let matrix = DMatrix::from_fn(nx, nx, |x, x_next| {
        (0..ny).fold(T::zero(), |acc, y| {
            acc + cond.prob_y_given_x(y, x) * x_move.prob(x_next, x, y)
        })
    });
    TransitionKernel::new(
        (0..nx).map(StateLabel::x_only).collect(),
        matrix,
        cond.marginal_x().clone(),
        true,
    )
}
