//! Numerical verifiers for the quantitative and qualitative convergence
//! relationships between the samplers.
//!
//! Every verifier returns a [`VerificationReport`] holding the computed
//! quantities as `f64` and one line per individual check. Rates are
//! computed on the support of the joint, so degenerate tables such as a
//! perfectly correlated diagonal can still be examined.

mod audit;
mod conditions;
mod report;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{dg_kernel, marginal_x, marginal_xm, marginal_y};
use crate::model::{
    gen_independence_proposal, Axis, FiniteJointDistribution, ProposalFamily,
    SelectionProbability, SupportPolicy,
};
use crate::scalar::Scalar;
use crate::spectral::{
    convergence_rate, l0_operator_norm, maximal_correlation, norm_power_sequence,
    sampler_kernel, SamplerInputs, SamplerKind, EQUALITY_TOL, INEQUALITY_SLACK, SEQUENCE_REL_TOL,
};

pub use audit::{
    evaluate_arrows, qualitative_audit, selection_robustness, Arrow, ArrowGate, AuditOptions,
    ARROWS, DEFAULT_GEO_THRESHOLD,
};
pub use conditions::{
    build_counterexample, condition_c, condition_c1, verify_minorizations, ConditionConstant,
    Witness,
};
pub use report::{Outcome, VerificationReport};

/// Tolerance on `k* >= 1 / (r (1 - r))`.
pub const K_STAR_TOL: f64 = 1e-9;
/// Upper slack of the deterministic-scan CMH sandwich.
pub const SANDWICH_TOL: f64 = 1e-10;

/// Random-scan Gibbs rate predicted from the deterministic-scan rate:
/// `(1 + sqrt(1 - 4 r (1 - r) (1 - rho_d))) / 2`.
pub fn theorem1_rhs<T: Scalar>(rho_d: T, r: T) -> Result<T> {
    if !(rho_d >= T::zero() && rho_d <= T::one()) {
        return Err(Error::DomainError(format!(
            "rho_d = {rho_d} is outside [0, 1]"
        )));
    }
    let r = SelectionProbability::new(r)?;
    let four = T::lit(4.0);
    let radicand = T::one() - four * r.value() * r.complement() * (T::one() - rho_d);
    Ok((T::one() + radicand.max(T::zero()).sqrt()) / T::lit(2.0))
}

/// Compute-time exponents `(k_D, k_R)` for component update costs `t1`
/// (X) and `t2` (Y): `k_D = 1 / (t1 + t2)`, `k_R = 1 / (r t1 + (1 - r) t2)`.
pub fn compute_time_exponents(t1: f64, t2: f64, r: f64) -> Result<(f64, f64)> {
    if !(t1 > 0.0 && t2 > 0.0 && t1.is_finite() && t2.is_finite()) {
        return Err(Error::DomainError(
            "update costs must be positive and finite".into(),
        ));
    }
    let r = SelectionProbability::new(r)?;
    Ok((
        1.0 / (t1 + t2),
        1.0 / (r.value() * t1 + r.complement() * t2),
    ))
}

fn on_support<'a, T: Scalar>(joint: &'a FiniteJointDistribution<T>) -> SamplerInputs<'a, T> {
    SamplerInputs::new(joint).with_support(SupportPolicy::RestrictToSupport)
}

/// Strictly inside `(0, 1)` by more than the rate equality tolerance.
fn interior(rate: f64) -> bool {
    rate > EQUALITY_TOL && rate < 1.0 - EQUALITY_TOL
}

fn describe<T: Scalar>(joint: &FiniteJointDistribution<T>) -> String {
    format!("{}x{} joint", joint.nx(), joint.ny())
}

/// `rho_R` from the reversible kernel against the closed form in `rho_D`.
pub fn verify_theorem1<T: Scalar>(
    joint: &FiniteJointDistribution<T>,
    r: SelectionProbability<T>,
    tol: f64,
) -> Result<VerificationReport> {
    let inputs = on_support(joint).with_r(r);
    let rho_d = convergence_rate(SamplerKind::Dg, &inputs)?.rate;
    let rho_r = convergence_rate(SamplerKind::Rg, &inputs)?.rate;
    let formula = theorem1_rhs(rho_d, r.value())?;
    let error = (rho_r - formula).as_f64().abs();

    let mut report = VerificationReport::new(
        "theorem1",
        format!("{}, r = {}", describe(joint), r.value()),
        tol,
    );
    report.record("r", r.value().as_f64());
    report.record("rho_d", rho_d.as_f64());
    report.record("rho_r_computed", rho_r.as_f64());
    report.record("rho_r_formula", formula.as_f64());
    report.record("abs_error", error);
    report.check(
        error < tol,
        format!("|rho_r - formula| = {error:.3e} against tolerance {tol:.1e}"),
    );
    Ok(report)
}

/// Lower bounds on `rho_R` in terms of the maximal correlation and of
/// `rho_D`, plus the implied bound on `k* = ln rho_D / ln rho_R`.
pub fn lemma4_and_young_bounds<T: Scalar>(
    joint: &FiniteJointDistribution<T>,
    r: SelectionProbability<T>,
) -> Result<VerificationReport> {
    let inputs = on_support(joint).with_r(r);
    let rho_d = convergence_rate(SamplerKind::Dg, &inputs)?.rate.as_f64();
    let rg = convergence_rate(SamplerKind::Rg, &inputs)?;
    let rho_r = rg.rate.as_f64();
    let gamma = rg.maximal_correlation.expect("rates carry the maximal correlation").as_f64();
    let gamma_sq = gamma * gamma;
    let (rv, rc) = (r.value().as_f64(), r.complement().as_f64());
    let bound_x = 1.0 - rv + rv * gamma_sq;
    let bound_y = rv + rc * gamma_sq;
    let young = rho_d.powf(rv * rc);
    let k_bound = 1.0 / (rv * rc);

    let mut report = VerificationReport::new(
        "lemma4_young",
        format!("{}, r = {rv}", describe(joint)),
        INEQUALITY_SLACK,
    );
    report.record("r", rv);
    report.record("rho_d", rho_d);
    report.record("rho_r", rho_r);
    report.record("gamma_bar_sq", gamma_sq);
    report.record("bound_x_refresh", bound_x);
    report.record("bound_y_refresh", bound_y);
    report.record("young_bound", young);
    report.record("k_star_lower_bound", k_bound);
    let slack = -INEQUALITY_SLACK;
    report.check(
        rho_r - bound_x >= slack,
        format!("rho_r - (1 - r + r gamma^2) = {:.3e}", rho_r - bound_x),
    );
    report.check(
        rho_r - bound_y >= slack,
        format!("rho_r - (r + (1 - r) gamma^2) = {:.3e}", rho_r - bound_y),
    );
    report.check(
        rho_r - young >= slack,
        format!("rho_r - rho_d^(r(1-r)) = {:.3e}", rho_r - young),
    );
    if interior(rho_d) && interior(rho_r) {
        let k_star = rho_d.ln() / rho_r.ln();
        report.record("k_star", k_star);
        report.check(
            k_star - k_bound >= -K_STAR_TOL,
            format!("k* = {k_star:.6} against 1/(r(1-r)) = {k_bound:.6}"),
        );
    } else {
        report.note(format!(
            "k* undefined: rho_d = {rho_d}, rho_r = {rho_r} not both inside (0, 1)"
        ));
    }
    Ok(report)
}

/// For `rho_D` strictly inside `(0, 1)`, `rho_R > rho_D`.
pub fn verify_strict_gap<T: Scalar>(
    joint: &FiniteJointDistribution<T>,
    r: SelectionProbability<T>,
) -> Result<VerificationReport> {
    let inputs = on_support(joint).with_r(r);
    let rho_d = convergence_rate(SamplerKind::Dg, &inputs)?.rate.as_f64();
    let rho_r = convergence_rate(SamplerKind::Rg, &inputs)?.rate.as_f64();
    let mut report = VerificationReport::new(
        "strict_gap",
        format!("{}, r = {}", describe(joint), r.value()),
        0.0,
    );
    report.record("rho_d", rho_d);
    report.record("rho_r", rho_r);
    if interior(rho_d) {
        report.check(
            rho_r - rho_d > 0.0,
            format!("rho_r - rho_d = {:.3e}", rho_r - rho_d),
        );
    } else {
        report.skip(format!("rho_d = {rho_d:.3e} is not strictly inside (0, 1)"));
    }
    Ok(report)
}

/// Per unit of compute time `T`, deterministic scan is never slower:
/// `rho_D^(k_D T) <= rho_R^(k_R T)`.
pub fn verify_compute_time<T: Scalar>(
    joint: &FiniteJointDistribution<T>,
    r: SelectionProbability<T>,
    costs: &[(f64, f64)],
    horizon: f64,
) -> Result<VerificationReport> {
    let inputs = on_support(joint).with_r(r);
    let rho_d = convergence_rate(SamplerKind::Dg, &inputs)?.rate.as_f64();
    let rho_r = convergence_rate(SamplerKind::Rg, &inputs)?.rate.as_f64();
    let rv = r.value().as_f64();
    let mut report = VerificationReport::new(
        "compute_time",
        format!("{}, r = {rv}, T = {horizon}", describe(joint)),
        INEQUALITY_SLACK,
    );
    report.record("rho_d", rho_d);
    report.record("rho_r", rho_r);
    for &(t1, t2) in costs {
        let (k_d, k_r) = compute_time_exponents(t1, t2, rv)?;
        let deterministic = rho_d.powf(k_d * horizon);
        let random = rho_r.powf(k_r * horizon);
        report.check(
            random - deterministic >= -INEQUALITY_SLACK,
            format!("t = ({t1}, {t2}): {deterministic:.6e} <= {random:.6e}"),
        );
    }
    Ok(report)
}

/// Marginal-chain identities and the power laws for deterministic scan:
/// `rho_D = ||P_X|| = ||P_Y|| = gamma^2`, `||P_D^n||^(1/(n - 1/2))` constant
/// in `n`, and, with `q2`, the sandwich
/// `||P_DM^n||^(1/(n-1)) <= ||P_XM|| <= ||P_DM^n||^(1/n)`.
pub fn verify_marginal_identities<T: Scalar>(
    joint: &FiniteJointDistribution<T>,
    q2: Option<&ProposalFamily<T>>,
    n_max: usize,
    tol: f64,
) -> Result<VerificationReport> {
    if !joint.is_strictly_positive() {
        return Err(Error::NotStrictlyPositive);
    }
    let mut report = VerificationReport::new("marginal_identities", describe(joint), tol);
    let rho_d = convergence_rate(SamplerKind::Dg, &SamplerInputs::new(joint))?.rate.as_f64();
    let norm_px = l0_operator_norm(&marginal_x(joint)?)?.as_f64();
    let norm_py = l0_operator_norm(&marginal_y(joint)?)?.as_f64();
    let gamma = maximal_correlation(joint)?.as_f64();
    report.record("rho_d", rho_d);
    report.record("norm_px", norm_px);
    report.record("norm_py", norm_py);
    report.record("gamma_bar_sq", gamma * gamma);
    report.check(
        (rho_d - norm_px).abs() < tol,
        format!("|rho_d - ||P_X||| = {:.3e}", (rho_d - norm_px).abs()),
    );
    report.check(
        (norm_px - norm_py).abs() < tol,
        format!("|||P_X|| - ||P_Y||| = {:.3e}", (norm_px - norm_py).abs()),
    );
    report.check(
        (gamma * gamma - rho_d).abs() < tol,
        format!("|gamma^2 - rho_d| = {:.3e}", (gamma * gamma - rho_d).abs()),
    );

    let powers = norm_power_sequence(&dg_kernel(joint)?, n_max)?;
    let roots: Vec<f64> = powers
        .iter()
        .map(|p| p.norm.as_f64().powf(1.0 / (p.n as f64 - 0.5)))
        .collect();
    let base = roots[0];
    let spread = roots
        .iter()
        .map(|v| (v - base).abs())
        .fold(0.0, f64::max);
    let relative = if base > 0.0 { spread / base } else { spread };
    report.record("dg_root_relative_spread", relative);
    report.check(
        relative < SEQUENCE_REL_TOL,
        format!("||P_D^n||^(1/(n-1/2)) relative spread {relative:.3e} over n = 1..{n_max}"),
    );
    report.check(
        (base - rho_d).abs() < tol,
        format!("||P_D||^2 = {:.12} against rho_d = {rho_d:.12}", base),
    );

    if let Some(q2) = q2 {
        let rho_dm = l0_operator_norm(&marginal_xm(joint, q2)?)?.as_f64();
        report.record("rho_dc", rho_dm);
        let kernel = sampler_kernel(SamplerKind::Dc, &SamplerInputs::new(joint).with_q2(q2))?;
        for p in norm_power_sequence(&kernel, n_max)?.into_iter().filter(|p| p.n >= 2) {
            let norm = p.norm.as_f64();
            let lower = norm.powf(1.0 / (p.n as f64 - 1.0));
            let upper = norm.powf(1.0 / p.n as f64);
            report.check(
                lower <= rho_dm + INEQUALITY_SLACK && rho_dm <= upper + SANDWICH_TOL,
                format!(
                    "n = {}: {lower:.12} <= {rho_dm:.12} <= {upper:.12}",
                    p.n
                ),
            );
        }
    }
    Ok(report)
}

/// One point of the `rho_D` against `rho_R` scatter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Figure2Row {
    pub r: f64,
    pub rho_d: f64,
    pub rho_r_computed: f64,
    pub rho_r_formula: f64,
}

/// Rows for one joint, in the order of `r_list`.
pub fn figure2_rows<T: Scalar>(
    joint: &FiniteJointDistribution<T>,
    r_list: &[SelectionProbability<T>],
) -> Result<Vec<Figure2Row>> {
    let base = on_support(joint);
    let rho_d = convergence_rate(SamplerKind::Dg, &base)?.rate;
    r_list
        .iter()
        .map(|&r| {
            let rho_r = convergence_rate(SamplerKind::Rg, &base.with_r(r))?.rate;
            Ok(Figure2Row {
                r: r.value().as_f64(),
                rho_d: rho_d.as_f64(),
                rho_r_computed: rho_r.as_f64(),
                rho_r_formula: theorem1_rhs(rho_d, r.value())?.as_f64(),
            })
        })
        .collect()
}

/// Convenience for corpus runs: independence proposals on both axes.
pub fn independence_proposals<T: Scalar>(
    joint: &FiniteJointDistribution<T>,
) -> Result<(ProposalFamily<T>, ProposalFamily<T>)> {
    Ok((
        gen_independence_proposal(joint, Axis::Y)?,
        gen_independence_proposal(joint, Axis::X)?,
    ))
}

/// Smallest entry of `lhs - scale * rhs`.
pub(crate) fn entrywise_slack<T: Scalar>(lhs: &DMatrix<T>, rhs: &DMatrix<T>, scale: T) -> f64 {
    lhs.iter()
        .zip(rhs.iter())
        .map(|(a, b)| (*a - scale * *b).as_f64())
        .fold(f64::INFINITY, f64::min)
}
