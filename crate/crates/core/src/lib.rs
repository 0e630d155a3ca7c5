//! Exact spectral analysis of two-component Gibbs and conditional
//! Metropolis-Hastings samplers on finite state spaces.

pub mod error;
pub mod io;
pub mod kernels;
mod linalg;
pub mod model;
pub mod scalar;
pub mod simulate;
pub mod spectral;
pub mod theory;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Joint64 = model::FiniteJointDistribution<f64>;
pub type Joint32 = model::FiniteJointDistribution<f32>;
pub type Proposal64 = model::ProposalFamily<f64>;
pub type Proposal32 = model::ProposalFamily<f32>;
pub type Kernel64 = model::TransitionKernel<f64>;
pub type Kernel32 = model::TransitionKernel<f32>;
