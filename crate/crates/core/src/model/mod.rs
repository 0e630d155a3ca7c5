//! Domain types: the target joint pmf, proposal families, selection
//! probabilities, transition kernels, and seeded random instances.

mod generate;
mod joint;
mod kernel;
mod proposal;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use generate::{
    dirichlet_corpus, gen_dirichlet_joint, instance_seeds, Concentration,
    DEFAULT_CONCENTRATION_RANGE,
};
pub use joint::{validate_joint, FiniteJointDistribution, SupportRestriction};
pub use kernel::{decode_product_index, product_index, StateLabel, TransitionKernel};
pub use proposal::{gen_independence_proposal, ProposalFamily};

/// Absolute tolerance on probability vectors and kernel invariants.
pub const PROBABILITY_TOL: f64 = 1e-12;

/// Drift from 1 tolerated on the total mass of an input table before it is
/// rejected; accepted tables are renormalized.
pub const INPUT_SUM_TOL: f64 = 1e-9;

/// Coordinate of the two-component state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::X => f.write_str("X"),
            Axis::Y => f.write_str("Y"),
        }
    }
}

/// Probability `r` of refreshing X in a random-scan sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionProbability<T>(T);

impl<T: Scalar> SelectionProbability<T> {
    pub fn new(r: T) -> Result<Self> {
        if r.is_finite() && r > T::zero() && r < T::one() {
            Ok(Self(r))
        } else {
            Err(Error::BadSelection(r.as_f64()))
        }
    }

    pub fn value(self) -> T {
        self.0
    }

    /// `1 - r`, the probability of refreshing Y.
    pub fn complement(self) -> T {
        T::one() - self.0
    }
}

/// How rate computations treat cells of the joint with zero mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SupportPolicy {
    /// Reject any joint with a zero cell.
    #[default]
    StrictlyPositive,
    /// Drop zero-mass states (marginal states first, then product states)
    /// and re-index before building kernels.
    RestrictToSupport,
}
