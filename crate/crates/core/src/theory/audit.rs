use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{condition_c, condition_c1, describe, entrywise_slack, on_support, VerificationReport};
use crate::error::{Error, Result};
use crate::model::{FiniteJointDistribution, ProposalFamily, SelectionProbability};
use crate::scalar::Scalar;
use crate::spectral::{convergence_rate, sampler_kernel, SamplerKind, INEQUALITY_SLACK};

/// Rates below this count as geometrically ergodic.
pub const DEFAULT_GEO_THRESHOLD: f64 = 1.0 - 1e-8;

/// What an implication needs beyond the samplers' own definitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrowGate {
    /// Holds unconditionally.
    Solid,
    /// Needs a finite `C` for the X proposal.
    C,
    /// Needs a finite `C1` for the Y proposal.
    C1,
    /// Needs both constants finite.
    Both,
}

/// "If `from` is geometrically ergodic then so is `to`."
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrow {
    pub from: SamplerKind,
    pub to: SamplerKind,
    pub gate: ArrowGate,
}

const fn arrow(from: SamplerKind, to: SamplerKind, gate: ArrowGate) -> Arrow {
    Arrow { from, to, gate }
}

use ArrowGate::{Both, Solid, C, C1};
use SamplerKind::{Dc, Dcmm, Dg, Rc, Rcmm, Rg};

/// Every implication between the six samplers known to hold, directly or
/// by composition. Nothing leaves D~C.
pub const ARROWS: [Arrow; 22] = [
    arrow(Dg, Rg, Solid),
    arrow(Rg, Dg, Solid),
    arrow(Dc, Rc, Solid),
    arrow(Dc, Dg, Solid),
    arrow(Dc, Rg, Solid),
    arrow(Rc, Dg, Solid),
    arrow(Rc, Rg, Solid),
    arrow(Rcmm, Dg, Solid),
    arrow(Rcmm, Rg, Solid),
    arrow(Dg, Dc, C),
    arrow(Rg, Rc, C),
    arrow(Dg, Rc, C),
    arrow(Rg, Dc, C),
    arrow(Dc, Dcmm, C1),
    arrow(Rc, Rcmm, C1),
    arrow(Dc, Rcmm, C1),
    arrow(Dg, Dcmm, Both),
    arrow(Dg, Rcmm, Both),
    arrow(Rg, Rcmm, Both),
    arrow(Rg, Dcmm, Both),
    arrow(Rcmm, Dcmm, Both),
    arrow(Rc, Dcmm, Both),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditOptions {
    pub geo_threshold: f64,
    /// Also assert arrows whose gate constants are finite.
    pub check_dashed: bool,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            geo_threshold: DEFAULT_GEO_THRESHOLD,
            check_dashed: true,
        }
    }
}

/// Checks every arrow whose endpoints have a rate. `c_finite` and
/// `c1_finite` are `None` when the corresponding proposal is absent.
pub fn evaluate_arrows(
    rates: &BTreeMap<SamplerKind, f64>,
    c_finite: Option<bool>,
    c1_finite: Option<bool>,
    options: AuditOptions,
) -> VerificationReport {
    let mut report = VerificationReport::new("implication_arrows", "sampler rates", 0.0);
    for (kind, rate) in rates {
        report.record(format!("rho_{}", kind.tag()), *rate);
    }
    let geometric = |kind: &SamplerKind| rates.get(kind).map(|r| *r < options.geo_threshold);
    for a in ARROWS.iter() {
        let (Some(from), Some(to)) = (geometric(&a.from), geometric(&a.to)) else {
            continue;
        };
        let label = format!("{} -> {}", a.from, a.to);
        if a.gate != Solid {
            if !options.check_dashed {
                report.skip(format!("{label}: dashed arrows not requested"));
                continue;
            }
            let needs_c = matches!(a.gate, C | Both);
            let needs_c1 = matches!(a.gate, C1 | Both);
            if needs_c && c_finite != Some(true) {
                report.skip(format!("{label}: C is not finite"));
                continue;
            }
            if needs_c1 && c1_finite != Some(true) {
                report.skip(format!("{label}: C1 is not finite"));
                continue;
            }
        }
        report.check(
            !from || to,
            format!(
                "{label} ({:?}): geometric {from} -> {to}",
                a.gate
            ),
        );
    }
    report
}

/// Computes every available rate and checks the implication arrows.
/// Nodes needing `q2` (and `q1` for the two-update samplers) are skipped
/// when the proposal is absent.
pub fn qualitative_audit<T: Scalar>(
    joint: &FiniteJointDistribution<T>,
    q1: Option<&ProposalFamily<T>>,
    q2: Option<&ProposalFamily<T>>,
    r: SelectionProbability<T>,
    options: AuditOptions,
) -> Result<VerificationReport> {
    let mut inputs = on_support(joint).with_r(r);
    inputs.q1 = q1;
    inputs.q2 = q2;
    let mut rates = BTreeMap::new();
    for kind in SamplerKind::ALL {
        if (kind.needs_q2() && q2.is_none()) || (kind.needs_q1() && q1.is_none()) {
            continue;
        }
        rates.insert(kind, convergence_rate(kind, &inputs)?.rate.as_f64());
    }
    let c = q2.map(|q| condition_c(joint, q)).transpose()?;
    let c1 = q1.map(|q| condition_c1(joint, q)).transpose()?;

    let mut report = evaluate_arrows(
        &rates,
        c.as_ref().map(|c| c.is_finite()),
        c1.as_ref().map(|c| c.is_finite()),
        options,
    );
    report.claim = "qualitative_audit".into();
    report.inputs = format!("{}, r = {}", describe(joint), r.value());
    report.tolerance = 1.0 - options.geo_threshold;
    for (name, constant) in [("C", &c), ("C1", &c1)] {
        match constant {
            Some(k) if k.is_finite() => report.record(name, k.as_f64()),
            Some(_) => report.note(format!("{name} is infinite")),
            None => {}
        }
    }
    Ok(report)
}

/// Geometric classification of the random-scan samplers does not depend on
/// the selection probability, and `P_r >= min(r / r0, (1-r) / (1-r0)) P_r0`
/// entrywise, with `r0` the first entry of `r_list`.
pub fn selection_robustness<T: Scalar>(
    joint: &FiniteJointDistribution<T>,
    q2: Option<&ProposalFamily<T>>,
    r_list: &[T],
    geo_threshold: f64,
) -> Result<VerificationReport> {
    let selections = r_list
        .iter()
        .map(|&r| SelectionProbability::new(r))
        .collect::<Result<Vec<_>>>()?;
    let Some(&r0) = selections.first() else {
        return Err(Error::DomainError("empty list of selection probabilities".into()));
    };
    let mut kinds = vec![SamplerKind::Rg];
    if q2.is_some() {
        kinds.push(SamplerKind::Rc);
    }
    let mut report = VerificationReport::new(
        "selection_robustness",
        format!("{}, {} values of r", describe(joint), r_list.len()),
        INEQUALITY_SLACK,
    );
    for kind in kinds {
        let base_inputs = |r| {
            let mut inputs = on_support(joint).with_r(r);
            inputs.q2 = q2;
            inputs
        };
        let base_kernel = sampler_kernel(kind, &base_inputs(r0))?;
        let mut classes = Vec::with_capacity(selections.len());
        for &r in &selections {
            let inputs = base_inputs(r);
            let rate = convergence_rate(kind, &inputs)?.rate.as_f64();
            report.record(format!("rho_{}@{}", kind.tag(), r.value()), rate);
            classes.push(rate < geo_threshold);

            let kernel = sampler_kernel(kind, &inputs)?;
            let (rv, r0v) = (r.value(), r0.value());
            let weight = (rv / r0v).min(r.complement() / r0.complement());
            let slack = entrywise_slack(kernel.matrix(), base_kernel.matrix(), weight);
            report.check(
                slack >= -INEQUALITY_SLACK,
                format!(
                    "{kind} at r = {rv} dominates {:.6} x kernel at r0 = {r0v} (slack {slack:.3e})",
                    weight.as_f64()
                ),
            );
        }
        let constant = classes.iter().all(|&g| g == classes[0]);
        report.check(
            constant,
            format!("{kind} classification over r: {classes:?}"),
        );
    }
    Ok(report)
}
