//! L² operator norms, spectral radii and convergence rates of finite kernels.
//!
//! Every quantity is computed on the mean-zero subspace through the
//! similarity `A = diag(u) P diag(u)^-1` with `u = sqrt(pi)`, where the
//! π-weighted inner product becomes the Euclidean one. Removing the
//! stationary direction leaves `M = A - u u^T`, so `||P||_pi` is the largest
//! singular value of `M` and the spectral radius is its largest eigenvalue
//! modulus.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{
    conditionals, dc_kernel, dcmm_kernel, dg_kernel, marginal_x, marginal_xm, rc_kernel,
    rcmm_kernel, rg_kernel,
};
use crate::linalg;
use crate::model::{
    FiniteJointDistribution, ProposalFamily, SelectionProbability, SupportPolicy,
    TransitionKernel,
};
use crate::scalar::Scalar;

/// Tolerance for equalities between independently computed rates.
pub const EQUALITY_TOL: f64 = 1e-10;
/// Slack allowed on inequalities between exact quantities.
pub const INEQUALITY_SLACK: f64 = 1e-12;
/// Relative tolerance for sequences that should be constant.
pub const SEQUENCE_REL_TOL: f64 = 1e-7;

/// How a [`SpectralReport`] obtained its rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateMethod {
    /// Operator norm of a reversible product-space kernel.
    SlemReversible,
    /// Operator norm of the reversible marginal chain.
    MarginalChain,
    /// Largest eigenvalue modulus of a non-reversible kernel.
    SpectralRadius,
    /// `||P^n||^(1/n)` at the deepest computed power.
    NormPowerLimit,
}

impl fmt::Display for RateMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateMethod::SlemReversible => "slem-reversible",
            RateMethod::MarginalChain => "marginal-chain",
            RateMethod::SpectralRadius => "spectral-radius",
            RateMethod::NormPowerLimit => "norm-power-limit",
        })
    }
}

/// The six two-component samplers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplerKind {
    /// Deterministic-scan Gibbs.
    Dg,
    /// Random-scan Gibbs.
    Rg,
    /// Deterministic-scan CMH, Metropolis-Hastings on X.
    Dc,
    /// Random-scan CMH, Metropolis-Hastings on X.
    Rc,
    /// Deterministic-scan CMH, Metropolis-Hastings on both components.
    Dcmm,
    /// Random-scan CMH, Metropolis-Hastings on both components.
    Rcmm,
}

impl SamplerKind {
    pub const ALL: [SamplerKind; 6] = [
        SamplerKind::Dg,
        SamplerKind::Rg,
        SamplerKind::Dc,
        SamplerKind::Rc,
        SamplerKind::Dcmm,
        SamplerKind::Rcmm,
    ];

    pub fn is_random_scan(self) -> bool {
        matches!(self, SamplerKind::Rg | SamplerKind::Rc | SamplerKind::Rcmm)
    }

    pub fn needs_q1(self) -> bool {
        matches!(self, SamplerKind::Dcmm | SamplerKind::Rcmm)
    }

    pub fn needs_q2(self) -> bool {
        !matches!(self, SamplerKind::Dg | SamplerKind::Rg)
    }

    /// Lowercase tag used in JSON keys (`rho_<tag>`).
    pub fn tag(self) -> &'static str {
        match self {
            SamplerKind::Dg => "dg",
            SamplerKind::Rg => "rg",
            SamplerKind::Dc => "dc",
            SamplerKind::Rc => "rc",
            SamplerKind::Dcmm => "dcmm",
            SamplerKind::Rcmm => "rcmm",
        }
    }
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplerKind::Dg => "DG",
            SamplerKind::Rg => "RG",
            SamplerKind::Dc => "DC",
            SamplerKind::Rc => "RC",
            SamplerKind::Dcmm => "D~C",
            SamplerKind::Rcmm => "R~C",
        })
    }
}

/// `(n, ||P^n||_pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct NormPower<T: Scalar> {
    pub n: usize,
    pub norm: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct SpectralReport<T: Scalar> {
    pub kind: SamplerKind,
    pub rate: T,
    pub method: RateMethod,
    pub norm_powers: Vec<NormPower<T>>,
    pub maximal_correlation: Option<T>,
    /// Set when the rate is a finite-state fact with no operator-norm
    /// characterization behind it.
    pub finite_state_only: bool,
}

/// Everything a sampler kind may need. Missing pieces are reported as
/// [`Error::MissingInput`] only when the kind requires them.
#[derive(Debug, Clone, Copy)]
pub struct SamplerInputs<'a, T: Scalar> {
    pub joint: &'a FiniteJointDistribution<T>,
    /// Proposal for the Y update.
    pub q1: Option<&'a ProposalFamily<T>>,
    /// Proposal for the X update.
    pub q2: Option<&'a ProposalFamily<T>>,
    pub r: Option<SelectionProbability<T>>,
    pub support: SupportPolicy,
    /// Number of powers recorded in `norm_powers` (0 skips them).
    pub norm_power_depth: usize,
}

impl<'a, T: Scalar> SamplerInputs<'a, T> {
    pub fn new(joint: &'a FiniteJointDistribution<T>) -> Self {
        Self {
            joint,
            q1: None,
            q2: None,
            r: None,
            support: SupportPolicy::default(),
            norm_power_depth: 0,
        }
    }

    pub fn with_q1(mut self, q1: &'a ProposalFamily<T>) -> Self {
        self.q1 = Some(q1);
        self
    }

    pub fn with_q2(mut self, q2: &'a ProposalFamily<T>) -> Self {
        self.q2 = Some(q2);
        self
    }

    pub fn with_r(mut self, r: SelectionProbability<T>) -> Self {
        self.r = Some(r);
        self
    }

    pub fn with_support(mut self, support: SupportPolicy) -> Self {
        self.support = support;
        self
    }

    pub fn with_norm_powers(mut self, depth: usize) -> Self {
        self.norm_power_depth = depth;
        self
    }
}

/// Inputs after the support policy has been applied.
struct Prepared<T: Scalar> {
    joint: FiniteJointDistribution<T>,
    q1: Option<ProposalFamily<T>>,
    q2: Option<ProposalFamily<T>>,
    r: Option<SelectionProbability<T>>,
    restrict_states: bool,
}

fn check_shape<T: Scalar>(
    joint: &FiniteJointDistribution<T>,
    q: Option<&ProposalFamily<T>>,
) -> Result<()> {
    match q {
        Some(q) if (q.nx(), q.ny()) != (joint.nx(), joint.ny()) => Err(Error::DimensionMismatch {
            expected: joint.nx() * joint.ny(),
            found: q.nx() * q.ny(),
        }),
        _ => Ok(()),
    }
}

fn prepare<T: Scalar>(inputs: &SamplerInputs<'_, T>) -> Result<Prepared<T>> {
    check_shape(inputs.joint, inputs.q1)?;
    check_shape(inputs.joint, inputs.q2)?;
    match inputs.support {
        SupportPolicy::StrictlyPositive => {
            if !inputs.joint.is_strictly_positive() {
                return Err(Error::NotStrictlyPositive);
            }
            Ok(Prepared {
                joint: inputs.joint.clone(),
                q1: inputs.q1.cloned(),
                q2: inputs.q2.cloned(),
                r: inputs.r,
                restrict_states: false,
            })
        }
        SupportPolicy::RestrictToSupport => {
            let restriction = inputs.joint.restrict_to_support();
            let q1 = inputs.q1.map(|q| restriction.restrict_proposal(q)).transpose()?;
            let q2 = inputs.q2.map(|q| restriction.restrict_proposal(q)).transpose()?;
            Ok(Prepared {
                joint: restriction.joint,
                q1,
                q2,
                r: inputs.r,
                restrict_states: true,
            })
        }
    }
}

impl<T: Scalar> Prepared<T> {
    fn q1(&self) -> Result<&ProposalFamily<T>> {
        self.q1.as_ref().ok_or(Error::MissingInput("proposal q1 for the Y update"))
    }

    fn q2(&self) -> Result<&ProposalFamily<T>> {
        self.q2.as_ref().ok_or(Error::MissingInput("proposal q2 for the X update"))
    }

    fn r(&self) -> Result<SelectionProbability<T>> {
        self.r.ok_or(Error::MissingInput("selection probability r"))
    }

    fn product_kernel(&self, kind: SamplerKind) -> Result<TransitionKernel<T>> {
        let joint = &self.joint;
        let kernel = match kind {
            SamplerKind::Dg => dg_kernel(joint)?,
            SamplerKind::Rg => rg_kernel(joint, self.r()?)?,
            SamplerKind::Dc => dc_kernel(joint, self.q2()?)?,
            SamplerKind::Rc => rc_kernel(joint, self.q2()?, self.r()?)?,
            SamplerKind::Dcmm => dcmm_kernel(joint, self.q1()?, self.q2()?)?,
            SamplerKind::Rcmm => rcmm_kernel(joint, self.q1()?, self.q2()?, self.r()?)?,
        };
        if self.restrict_states {
            kernel.restrict_to_positive_support()
        } else {
            Ok(kernel)
        }
    }
}

/// Product-space kernel of `kind` after the support policy is applied.
pub fn sampler_kernel<T: Scalar>(
    kind: SamplerKind,
    inputs: &SamplerInputs<'_, T>,
) -> Result<TransitionKernel<T>> {
    prepare(inputs)?.product_kernel(kind)
}

/// `A - u u^T` with `A = diag(u) P diag(u)^-1`, `u = sqrt(pi)`.
pub fn centered_similarity<T: Scalar>(kernel: &TransitionKernel<T>) -> Result<DMatrix<T>> {
    let pi = kernel.stationary();
    if let Some(state) = pi.iter().position(|p| *p <= T::zero()) {
        return Err(Error::ZeroStationaryMass { state });
    }
    let u: DVector<T> = pi.map(|p| p.sqrt());
    let n = kernel.n_states();
    Ok(DMatrix::from_fn(n, n, |s, t| {
        u[s] * kernel.prob(s, t) / u[t] - u[s] * u[t]
    }))
}

/// `||P||` on mean-zero functions in `L²(pi)`.
pub fn l0_operator_norm<T: Scalar>(kernel: &TransitionKernel<T>) -> Result<T> {
    let m = centered_similarity(kernel)?;
    Ok(clamp_centered(linalg::largest_singular_value(&m)?, m.nrows()))
}

/// Largest eigenvalue modulus of `P` restricted to mean-zero functions.
pub fn l0_spectral_radius<T: Scalar>(kernel: &TransitionKernel<T>) -> Result<T> {
    let m = centered_similarity(kernel)?;
    let radius = if kernel.is_reversible() {
        linalg::symmetric_eigen(&m)?
            .eigenvalues
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.magnitude()))
    } else {
        linalg::complex_eigenvalues(&m)?
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.re.hypot(v.im)))
    };
    Ok(clamp_centered(radius, m.nrows()))
}

/// Eigenvalues of a reversible kernel on the mean-zero space, ascending.
/// The stationary direction contributes a single 0.
pub fn centered_eigenvalues<T: Scalar>(kernel: &TransitionKernel<T>) -> Result<Vec<T>> {
    if !kernel.is_reversible() {
        return Err(Error::InvalidKernel(
            "real spectrum requested for a kernel not claimed reversible".into(),
        ));
    }
    let m = centered_similarity(kernel)?;
    let mut values: Vec<T> = linalg::symmetric_eigen(&m)?.eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
    Ok(values)
}

/// `||P^n||_pi` for `n = 1..=n_max`.
///
/// Powers are taken of the centered matrix, which equals `A^n - u u^T`, so
/// small norms are not lost to cancellation against the stationary part.
pub fn norm_power_sequence<T: Scalar>(
    kernel: &TransitionKernel<T>,
    n_max: usize,
) -> Result<Vec<NormPower<T>>> {
    if n_max == 0 {
        return Err(Error::DomainError("n_max must be at least 1".into()));
    }
    let m = centered_similarity(kernel)?;
    let mut power = m.clone();
    let mut out = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        if n > 1 {
            power = &power * &m;
        }
        out.push(NormPower {
            n,
            norm: linalg::largest_singular_value(&power)?,
        });
    }
    Ok(out)
}

/// Gelfand estimate `||P^n||^(1/n)` at `n = n_max`.
pub fn norm_power_limit<T: Scalar>(kernel: &TransitionKernel<T>, n_max: usize) -> Result<T> {
    let powers = norm_power_sequence(kernel, n_max)?;
    let last = powers.last().expect("n_max >= 1");
    Ok(clamp_rate(
        last.norm.powf(T::one() / T::from_usize_lossy(last.n)),
    ))
}

/// Second singular value of `p(x,y) / sqrt(p_X(x) p_Y(y))`.
pub fn maximal_correlation<T: Scalar>(joint: &FiniteJointDistribution<T>) -> Result<T> {
    let cond = conditionals(joint)?;
    let (px, py) = (cond.marginal_x(), cond.marginal_y());
    let b = DMatrix::from_fn(joint.nx(), joint.ny(), |x, y| {
        joint.prob(x, y) / (px[x] * py[y]).sqrt()
    });
    let values = linalg::singular_values(&b)?;
    let top = values[0];
    if (top - T::one()).magnitude() > T::tol(EQUALITY_TOL) {
        return Err(Error::TopSingularValueNotOne { value: top.as_f64() });
    }
    Ok(clamp_centered(
        values.get(1).copied().unwrap_or_else(T::zero),
        joint.nx().max(joint.ny()),
    ))
}

/// Convergence rate of `kind` using the kind's documented characterization.
pub fn convergence_rate<T: Scalar>(
    kind: SamplerKind,
    inputs: &SamplerInputs<'_, T>,
) -> Result<SpectralReport<T>> {
    let prepared = prepare(inputs)?;
    let (rate, method) = match kind {
        SamplerKind::Dg => (
            l0_operator_norm(&marginal_x(&prepared.joint)?)?,
            RateMethod::MarginalChain,
        ),
        SamplerKind::Dc => (
            l0_operator_norm(&marginal_xm(&prepared.joint, prepared.q2()?)?)?,
            RateMethod::MarginalChain,
        ),
        SamplerKind::Rg | SamplerKind::Rc | SamplerKind::Rcmm => (
            l0_operator_norm(&prepared.product_kernel(kind)?)?,
            RateMethod::SlemReversible,
        ),
        SamplerKind::Dcmm => (
            l0_spectral_radius(&prepared.product_kernel(kind)?)?,
            RateMethod::SpectralRadius,
        ),
    };
    let norm_powers = if inputs.norm_power_depth > 0 {
        norm_power_sequence(&prepared.product_kernel(kind)?, inputs.norm_power_depth)?
    } else {
        Vec::new()
    };
    Ok(SpectralReport {
        kind,
        rate,
        method,
        norm_powers,
        maximal_correlation: Some(maximal_correlation(&prepared.joint)?),
        finite_state_only: kind == SamplerKind::Dcmm,
    })
}

/// Rate of `kind` from its product kernel by the Gelfand estimate at `n_max`.
pub fn convergence_rate_by_norm_powers<T: Scalar>(
    kind: SamplerKind,
    inputs: &SamplerInputs<'_, T>,
    n_max: usize,
) -> Result<SpectralReport<T>> {
    let prepared = prepare(inputs)?;
    let kernel = prepared.product_kernel(kind)?;
    let norm_powers = norm_power_sequence(&kernel, n_max)?;
    let last = norm_powers.last().expect("n_max >= 1");
    let rate = clamp_rate(last.norm.powf(T::one() / T::from_usize_lossy(last.n)));
    Ok(SpectralReport {
        kind,
        rate,
        method: RateMethod::NormPowerLimit,
        norm_powers,
        maximal_correlation: Some(maximal_correlation(&prepared.joint)?),
        finite_state_only: true,
    })
}

fn clamp_rate<T: Scalar>(value: T) -> T {
    value.max(T::zero()).min(T::one())
}

/// Clamps to `[0, 1]` and reads values at or below the rounding floor
/// `dim * eps` of a unit-norm `dim x dim` computation as exactly 0.
fn clamp_centered<T: Scalar>(value: T, dim: usize) -> T {
    if value <= T::default_epsilon() * T::from_usize_lossy(dim.max(1)) {
        T::zero()
    } else {
        clamp_rate(value)
    }
}
