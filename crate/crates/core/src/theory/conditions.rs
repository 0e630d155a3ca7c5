use serde::{Deserialize, Serialize};

use super::{describe, entrywise_slack, VerificationReport};
use crate::error::{Error, Result};
use crate::kernels::{
    conditionals, dc_kernel, dcmm_kernel, marginal_x, marginal_xm, mh_step, rc_kernel,
    rcmm_kernel, rg_kernel,
};
use crate::model::{
    validate_joint, Axis, FiniteJointDistribution, ProposalFamily, SelectionProbability,
};
use crate::scalar::Scalar;
use crate::spectral::INEQUALITY_SLACK;

/// Where a condition constant is attained: the ratio
/// `pi(proposed | conditioning) / q(proposed | current, conditioning)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub proposed: usize,
    pub current: usize,
    pub conditioning: usize,
}

/// Supremum of target-conditional over proposal density for one axis.
/// `value` is `None` when the supremum is infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionConstant {
    pub axis: Axis,
    pub value: Option<f64>,
    pub infinite: bool,
    pub witness: Option<Witness>,
}

impl ConditionConstant {
    pub fn is_finite(&self) -> bool {
        !self.infinite
    }

    /// The constant, with `f64::INFINITY` for the infinite case.
    pub fn as_f64(&self) -> f64 {
        self.value.unwrap_or(f64::INFINITY)
    }
}

/// `C = sup pi(x' | y) / q(x' | x, y)` over states with positive marginal
/// mass. Ratios with `pi(x' | y) = 0` are skipped; a positive target with
/// zero proposal mass makes the constant infinite.
pub fn condition_c<T: Scalar>(
    joint: &FiniteJointDistribution<T>,
    q2: &ProposalFamily<T>,
) -> Result<ConditionConstant> {
    condition_constant(joint, q2, Axis::X)
}

/// `C1 = sup pi(y' | x) / q1(y' | x, y)`, the Y-axis analogue of [`condition_c`].
pub fn condition_c1<T: Scalar>(
    joint: &FiniteJointDistribution<T>,
    q1: &ProposalFamily<T>,
) -> Result<ConditionConstant> {
    condition_constant(joint, q1, Axis::Y)
}

fn condition_constant<T: Scalar>(
    joint: &FiniteJointDistribution<T>,
    q: &ProposalFamily<T>,
    axis: Axis,
) -> Result<ConditionConstant> {
    if q.axis() != axis {
        return Err(Error::AxisMismatch {
            expected: axis,
            found: q.axis(),
        });
    }
    if (q.nx(), q.ny()) != (joint.nx(), joint.ny()) {
        return Err(Error::DimensionMismatch {
            expected: joint.nx() * joint.ny(),
            found: q.nx() * q.ny(),
        });
    }
    let px = joint.marginal_x();
    let py = joint.marginal_y();
    let (updated, conditioning) = match axis {
        Axis::X => (joint.nx(), joint.ny()),
        Axis::Y => (joint.ny(), joint.nx()),
    };
    // (x, y) coordinates of (updated value, conditioning value)
    let coords = |u: usize, c: usize| match axis {
        Axis::X => (u, c),
        Axis::Y => (c, u),
    };
    let mut best: Option<(T, Witness)> = None;
    for c in 0..conditioning {
        let c_mass = match axis {
            Axis::X => py[c],
            Axis::Y => px[c],
        };
        if c_mass <= T::zero() {
            continue;
        }
        for current in 0..updated {
            let u_mass = match axis {
                Axis::X => px[current],
                Axis::Y => py[current],
            };
            if u_mass <= T::zero() {
                continue;
            }
            let (x, y) = coords(current, c);
            for proposed in 0..updated {
                let (px_, py_) = coords(proposed, c);
                let target = joint.prob(px_, py_) / c_mass;
                if target <= T::zero() {
                    continue;
                }
                let witness = Witness {
                    proposed,
                    current,
                    conditioning: c,
                };
                let proposal = q.prob(proposed, x, y);
                if proposal <= T::zero() {
                    return Ok(ConditionConstant {
                        axis,
                        value: None,
                        infinite: true,
                        witness: Some(witness),
                    });
                }
                let ratio = target / proposal;
                if best.is_none_or(|(b, _)| ratio > b) {
                    best = Some((ratio, witness));
                }
            }
        }
    }
    let (value, witness) = best.expect("a valid joint has positive conditional mass");
    Ok(ConditionConstant {
        axis,
        value: Some(value.as_f64()),
        infinite: false,
        witness: Some(witness),
    })
}

/// Uniform 2x2 target with the proposal that always moves X to the other
/// state. Its deterministic-scan CMH chain is periodic while the random-scan
/// one is geometrically ergodic.
pub fn build_counterexample<T: Scalar>() -> (FiniteJointDistribution<T>, ProposalFamily<T>) {
    let quarter = T::lit(0.25);
    let joint = validate_joint(&[vec![quarter; 2], vec![quarter; 2]])
        .expect("uniform table is valid");
    let swap = ProposalFamily::swap(Axis::X, 2, 2).expect("two X states");
    (joint, swap)
}

/// Entrywise minorizations implied by finite condition constants:
/// `Q >= pi_{X|Y} / C`, `P_XM >= P_X / C`, `P_RM >= P_R / C`,
/// `P_RM^4 >= r^2 (1-r)^2 P_DM^2`, and with `q1`
/// `P1 >= pi_{Y|X} / C1`, `P~DC >= P_DM / C1`, `P~RC >= P_RM / C1`.
pub fn verify_minorizations<T: Scalar>(
    joint: &FiniteJointDistribution<T>,
    q1: Option<&ProposalFamily<T>>,
    q2: &ProposalFamily<T>,
    r: SelectionProbability<T>,
) -> Result<VerificationReport> {
    let c = condition_c(joint, q2)?;
    let c_value = c.value.ok_or(Error::InfiniteConditionConstant { axis: Axis::X })?;
    let c1 = q1.map(|q| condition_c1(joint, q)).transpose()?;
    let c1_value = match &c1 {
        Some(c1) => Some(c1.value.ok_or(Error::InfiniteConditionConstant { axis: Axis::Y })?),
        None => None,
    };

    let restriction = joint.restrict_to_support();
    let rj = &restriction.joint;
    let q2 = restriction.restrict_proposal(q2)?;
    let q1 = q1.map(|q| restriction.restrict_proposal(q)).transpose()?;
    let cond = conditionals(rj)?;
    let (nx, ny) = (rj.nx(), rj.ny());

    let mut report = VerificationReport::new(
        "minorizations",
        format!("{}, r = {}", describe(joint), r.value()),
        INEQUALITY_SLACK,
    );
    report.record("C", c_value);
    let inv_c = T::lit(1.0 / c_value);
    let check = |report: &mut VerificationReport, name: &str, slack: f64| {
        report.record(format!("slack_{name}"), slack);
        report.check(
            slack >= -INEQUALITY_SLACK,
            format!("{name}: smallest entry of lhs - rhs = {slack:.3e}"),
        );
    };

    let q_move = mh_step(&cond, Axis::X, &q2)?;
    let mut slack = f64::INFINITY;
    for x in 0..nx {
        for y in 0..ny {
            for next in 0..nx {
                let gap = q_move.prob(next, x, y) - inv_c * cond.prob_x_given_y(next, y);
                slack = slack.min(gap.as_f64());
            }
        }
    }
    check(&mut report, "Q_vs_conditional_x", slack);

    let pxm = marginal_xm(rj, &q2)?;
    let px = marginal_x(rj)?;
    check(
        &mut report,
        "PXM_vs_PX",
        entrywise_slack(pxm.matrix(), px.matrix(), inv_c),
    );
    let prm = rc_kernel(rj, &q2, r)?;
    let pr = rg_kernel(rj, r)?;
    check(
        &mut report,
        "PRM_vs_PR",
        entrywise_slack(prm.matrix(), pr.matrix(), inv_c),
    );
    let pdm = dc_kernel(rj, &q2)?;
    let weight = (r.value() * r.complement()).powi(2);
    check(
        &mut report,
        "PRM4_vs_PDM2",
        entrywise_slack(&prm.power(4), &pdm.power(2), weight),
    );

    if let (Some(q1), Some(c1_value)) = (q1.as_ref(), c1_value) {
        report.record("C1", c1_value);
        let inv_c1 = T::lit(1.0 / c1_value);
        let p1 = mh_step(&cond, Axis::Y, q1)?;
        let mut slack = f64::INFINITY;
        for x in 0..nx {
            for y in 0..ny {
                for next in 0..ny {
                    let gap = p1.prob(next, x, y) - inv_c1 * cond.prob_y_given_x(next, x);
                    slack = slack.min(gap.as_f64());
                }
            }
        }
        check(&mut report, "P1_vs_conditional_y", slack);
        let pdmm = dcmm_kernel(rj, q1, &q2)?;
        check(
            &mut report,
            "PDMM_vs_PDM",
            entrywise_slack(pdmm.matrix(), pdm.matrix(), inv_c1),
        );
        let prmm = rcmm_kernel(rj, q1, &q2, r)?;
        check(
            &mut report,
            "PRMM_vs_PRM",
            entrywise_slack(prmm.matrix(), prm.matrix(), inv_c1),
        );
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::gen_independence_proposal;

    fn example() -> FiniteJointDistribution<f64> {
        validate_joint(&[vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap()
    }

    #[test]
    fn independence_proposal_constant() {
        let joint = example();
        let q = gen_independence_proposal(&joint, Axis::X).unwrap();
        let c = condition_c(&joint, &q).unwrap();
        assert!((c.as_f64() - 1.6).abs() < 1e-14);
        let w = c.witness.unwrap();
        assert_eq!(w.proposed, w.conditioning);
    }

    #[test]
    fn swap_proposal_is_infinite() {
        let (joint, swap) = build_counterexample::<f64>();
        let c = condition_c(&joint, &swap).unwrap();
        assert!(c.infinite);
        assert_eq!(c.value, None);
        let w = c.witness.unwrap();
        assert_eq!(w.proposed, w.current);
        assert_eq!(
            verify_minorizations(&joint, None, &swap, SelectionProbability::new(0.5).unwrap()),
            Err(Error::InfiniteConditionConstant { axis: Axis::X })
        );
    }

    #[test]
    fn exact_proposal_gives_exactly_one() {
        let joint = example();
        let cond = conditionals(&joint).unwrap();
        let q2 = ProposalFamily::exact_conditional(&cond, Axis::X).unwrap();
        let q1 = ProposalFamily::exact_conditional(&cond, Axis::Y).unwrap();
        assert_eq!(condition_c(&joint, &q2).unwrap().value, Some(1.0));
        assert_eq!(condition_c1(&joint, &q1).unwrap().value, Some(1.0));
        let r = SelectionProbability::new(0.5).unwrap();
        let report = verify_minorizations(&joint, Some(&q1), &q2, r).unwrap();
        assert!(report.pass, "{report:?}");
        for (name, value) in &report.computed {
            if name.starts_with("slack_") && name != "slack_PRM4_vs_PDM2" {
                assert!(value.abs() < 1e-14, "{name} = {value}");
            }
        }
    }

    #[test]
    fn minorizations_with_independence_proposals() {
        let joint = example();
        let q1 = gen_independence_proposal(&joint, Axis::Y).unwrap();
        let q2 = gen_independence_proposal(&joint, Axis::X).unwrap();
        let r = SelectionProbability::new(0.5).unwrap();
        let report = verify_minorizations(&joint, Some(&q1), &q2, r).unwrap();
        assert!(report.pass, "{report:?}");
        assert_eq!(report.checks(), 7);
        assert!((report.computed["C"] - 1.6).abs() < 1e-14);
    }

    #[test]
    fn wrong_axis_is_rejected() {
        let joint = example();
        let q = gen_independence_proposal(&joint, Axis::Y).unwrap();
        assert!(matches!(
            condition_c(&joint, &q),
            Err(Error::AxisMismatch { .. })
        ));
    }

    #[test]
    fn counterexample_shape() {
        let (joint, swap) = build_counterexample::<f64>();
        assert_eq!(joint.to_row_major(), vec![0.25; 4]);
        assert_eq!(swap.prob(1, 0, 1), 1.0);
    }
}
