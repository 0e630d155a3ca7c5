use std::path::Path;

use gibbs_spectra::io::{
    decay_csv, figure2_csv, joint_to_json, kernel_to_json, norm_powers_csv, proposal_to_json,
    read_joint, read_proposal, write_string,
};
use gibbs_spectra::kernels::conditionals;
use gibbs_spectra::model::{
    dirichlet_corpus, gen_dirichlet_joint, gen_independence_proposal, Axis, Concentration,
    SelectionProbability, SupportPolicy,
};
use gibbs_spectra::simulate::{decay_trace, gaussian_experiment, generic_point_mass_start, point_mass};
use gibbs_spectra::spectral::{
    convergence_rate, maximal_correlation, norm_power_sequence, sampler_kernel, SamplerInputs,
    SamplerKind,
};
use gibbs_spectra::theory::{
    build_counterexample, condition_c, condition_c1, figure2_rows, lemma4_and_young_bounds,
    qualitative_audit, selection_robustness, verify_compute_time, verify_marginal_identities,
    verify_minorizations, verify_strict_gap, verify_theorem1, AuditOptions, ConditionConstant,
    VerificationReport, DEFAULT_GEO_THRESHOLD,
};
use gibbs_spectra::{Error, Joint64, Proposal64, Result};
use serde_json::{json, Map, Value};

use crate::parallel::map_indexed;
use crate::{
    AnalyzeArgs, CounterexampleArgs, DrawArgs, Figure2Args, GaussArgs, GenArgs, ProposalChoice,
    VerifyArgs,
};

/// Agreement required between the computed and closed-form random-scan
/// rates in the figure output.
const FIGURE2_TOL: f64 = 1e-8;
/// Power range of the marginal-chain identities.
const IDENTITY_POWERS: usize = 5;
const IDENTITY_TOL: f64 = 1e-10;
/// `(t1, t2)` pairs for the compute-time comparison, over a unit horizon.
const UPDATE_COSTS: [(f64, f64); 4] = [(1.0, 1.0), (1.0, 2.0), (2.0, 1.0), (1.0, 10.0)];

impl DrawArgs {
    fn concentration(&self) -> Concentration {
        self.concentration
            .map_or_else(Concentration::default, Concentration::Symmetric)
    }
}

fn selection(r: f64) -> Result<SelectionProbability<f64>> {
    SelectionProbability::new(r)
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            write_string(path, text)?;
            println!("{}", path.display());
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn pretty(value: &Value) -> String {
    serde_json::to_string_pretty(value).expect("json values serialize")
}

fn build_proposal(choice: &ProposalChoice, joint: &Joint64, axis: Axis) -> Result<Proposal64> {
    let q = match choice {
        ProposalChoice::Exact => Proposal64::exact_conditional(&conditionals(joint)?, axis)?,
        ProposalChoice::Independence => gen_independence_proposal(joint, axis)?,
        ProposalChoice::Swap => Proposal64::swap(axis, joint.nx(), joint.ny())?,
        ProposalChoice::File(path) => read_proposal(path)?,
    };
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
    Ok(q)
}

/// `(q1 on Y, q2 on X)`. A file choice for X names one axis only, so the
/// Y proposal then needs its own flag.
fn build_pair(
    joint: &Joint64,
    x: Option<&ProposalChoice>,
    y: Option<&ProposalChoice>,
) -> Result<(Option<Proposal64>, Option<Proposal64>)> {
    let q2 = x.map(|c| build_proposal(c, joint, Axis::X)).transpose()?;
    let y_choice = match (y, x) {
        (Some(c), _) => Some(c),
        (None, Some(ProposalChoice::File(_))) => None,
        (None, other) => other,
    };
    let q1 = y_choice.map(|c| build_proposal(c, joint, Axis::Y)).transpose()?;
    Ok((q1, q2))
}

fn constant_value(c: &ConditionConstant) -> Value {
    match c.value {
        Some(v) if !c.infinite => json!(v),
        _ => json!("infinity"),
    }
}

pub fn gen(args: GenArgs) -> Result<bool> {
    let joint: Joint64 = gen_dirichlet_joint(args.nx, args.ny, &args.draw.concentration(), args.draw.seed)?;
    emit(&joint_to_json(&joint), Some(&args.out))?;
    Ok(true)
}

pub fn analyze(args: AnalyzeArgs) -> Result<bool> {
    let joint = read_joint::<f64>(&args.joint)?;
    let r = selection(args.r)?;
    let (q1, q2) = build_pair(&joint, args.proposal.as_ref(), args.proposal_y.as_ref())?;

    let mut inputs = SamplerInputs::new(&joint)
        .with_r(r)
        .with_support(SupportPolicy::RestrictToSupport);
    if let Some(q) = &q1 {
        inputs = inputs.with_q1(q);
    }
    if let Some(q) = &q2 {
        inputs = inputs.with_q2(q);
    }

    let mut out = Map::new();
    out.insert("r".into(), json!(args.r));
    for kind in SamplerKind::ALL {
        if (kind.needs_q1() && q1.is_none()) || (kind.needs_q2() && q2.is_none()) {
            continue;
        }
        let key = match kind {
            SamplerKind::Dg => "rho_d".to_string(),
            SamplerKind::Rg => "rho_r".to_string(),
            other => format!("rho_{}", other.tag()),
        };
        match convergence_rate(kind, &inputs) {
            Ok(report) => {
                out.insert(key, json!(report.rate));
            }
            Err(e) => {
                out.insert(key.clone(), Value::Null);
                out.insert(format!("{key}_error"), json!(e.to_string()));
            }
        }
    }
    out.insert("maximal_correlation".into(), json!(maximal_correlation(&joint)?));
    if let Some(q) = &q2 {
        out.insert("C".into(), constant_value(&condition_c(&joint, q)?));
    }
    if let Some(q) = &q1 {
        out.insert("C1".into(), constant_value(&condition_c1(&joint, q)?));
    }

    if args.decay_csv.is_some() || args.norm_csv.is_some() || args.kernel_out.is_some() {
        let kernel = sampler_kernel(args.kernel, &inputs)?;
        if let Some(path) = &args.kernel_out {
            write_string(path, &kernel_to_json(&kernel))?;
        }
        let mut decay = Map::new();
        decay.insert("kernel".into(), json!(args.kernel.tag()));
        if let Some(path) = &args.decay_csv {
            let start = match args.start {
                Some(s) if s < kernel.n_states() => s,
                Some(s) => {
                    return Err(Error::DimensionMismatch {
                        expected: kernel.n_states(),
                        found: s + 1,
                    })
                }
                None if kernel.is_reversible() => generic_point_mass_start(&kernel)?.0,
                None => 0,
            };
            let trace = decay_trace(
                &kernel,
                &point_mass(kernel.n_states(), start),
                args.n_max,
                args.window,
                format!("point mass at state {start}"),
            )?;
            write_string(path, &decay_csv(&trace))?;
            decay.insert("start".into(), json!(start));
            decay.insert("fitted_rate".into(), json!(trace.fitted_rate));
            decay.insert("fit".into(), json!(trace.fit));
            decay.insert("dominant_overlap".into(), json!(trace.dominant_overlap));
        }
        if let Some(path) = &args.norm_csv {
            write_string(path, &norm_powers_csv(&norm_power_sequence(&kernel, args.n_max)?))?;
        }
        out.insert("decay".into(), Value::Object(decay));
    }
    emit(&pretty(&Value::Object(out)), args.out.as_deref())?;
    Ok(true)
}

struct Suite<'a> {
    r_list: &'a [f64],
    tol: f64,
    options: AuditOptions,
    x: &'a ProposalChoice,
    y: Option<&'a ProposalChoice>,
}

/// Reports for a verifier that could not run: skipped when its
/// preconditions fail on this input, failed otherwise.
fn unavailable(claim: &str, inputs: String, error: Error) -> VerificationReport {
    let mut report = VerificationReport::new(claim, inputs, 0.0);
    match error {
        Error::InfiniteConditionConstant { .. } | Error::NotStrictlyPositive => {
            report.skip(error.to_string())
        }
        other => report.check(false, other.to_string()),
    }
    report
}

fn collect(reports: &mut Vec<VerificationReport>, claim: &str, inputs: &str, result: Result<VerificationReport>) {
    reports.push(result.unwrap_or_else(|e| unavailable(claim, inputs.to_string(), e)));
}

impl Suite<'_> {
    fn run(&self, joint: &Joint64) -> Result<Vec<VerificationReport>> {
        let (q1, q2) = build_pair(joint, Some(self.x), self.y)?;
        let q2 = q2.expect("an X proposal is always chosen");
        let mut reports = Vec::new();
        let shape = format!("{}x{} joint", joint.nx(), joint.ny());
        for &value in self.r_list {
            let r = selection(value)?;
            let inputs = format!("{shape}, r = {value}");
            collect(&mut reports, "theorem1", &inputs, verify_theorem1(joint, r, self.tol));
            collect(&mut reports, "lemma4_young", &inputs, lemma4_and_young_bounds(joint, r));
            collect(&mut reports, "strict_gap", &inputs, verify_strict_gap(joint, r));
            collect(
                &mut reports,
                "compute_time",
                &inputs,
                verify_compute_time(joint, r, &UPDATE_COSTS, 1.0),
            );
            collect(
                &mut reports,
                "minorizations",
                &inputs,
                verify_minorizations(joint, q1.as_ref(), &q2, r),
            );
            collect(
                &mut reports,
                "qualitative_audit",
                &inputs,
                qualitative_audit(joint, q1.as_ref(), Some(&q2), r, self.options),
            );
        }
        collect(
            &mut reports,
            "marginal_identities",
            &shape,
            verify_marginal_identities(joint, Some(&q2), IDENTITY_POWERS, IDENTITY_TOL),
        );
        collect(
            &mut reports,
            "selection_robustness",
            &shape,
            selection_robustness(joint, Some(&q2), self.r_list, self.options.geo_threshold),
        );
        Ok(reports)
    }
}

#[derive(Default)]
struct Tally {
    pass: usize,
    fail: usize,
    skipped: usize,
}

pub fn verify(args: VerifyArgs) -> Result<bool> {
    let joints: Vec<Joint64> = match (&args.joint, args.corpus) {
        (Some(path), _) => vec![read_joint(path)?],
        (None, Some(count)) if count >= 1 => {
            dirichlet_corpus(count, args.nx, args.ny, &args.draw.concentration(), args.draw.seed)?
        }
        (None, _) => return Err(Error::MissingInput("a joint file or --corpus N with N >= 1")),
    };
    let suite = Suite {
        r_list: &args.r,
        tol: args.tol,
        options: AuditOptions {
            geo_threshold: DEFAULT_GEO_THRESHOLD,
            check_dashed: !args.solid_only,
        },
        x: &args.proposal,
        y: args.proposal_y.as_ref(),
    };
    let results = map_indexed(joints.len(), |i| suite.run(&joints[i]));
    let per_instance = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut claims: Vec<(String, Tally)> = Vec::new();
    let mut failures = Vec::new();
    for (i, reports) in per_instance.iter().enumerate() {
        for report in reports {
            let slot = match claims.iter().position(|(c, _)| *c == report.claim) {
                Some(k) => k,
                None => {
                    claims.push((report.claim.clone(), Tally::default()));
                    claims.len() - 1
                }
            };
            let tally = &mut claims[slot].1;
            if !report.pass {
                tally.fail += 1;
                for detail in report.failures() {
                    failures.push(format!("instance {i}, {} ({}): {detail}", report.claim, report.inputs));
                }
            } else if report.checks() == 0 {
                tally.skipped += 1;
            } else {
                tally.pass += 1;
            }
        }
    }

    println!("{:<22} {:>6} {:>6} {:>6}  outcome", "claim", "pass", "fail", "skip");
    for (claim, t) in &claims {
        let outcome = if t.fail > 0 {
            "FAIL"
        } else if t.pass == 0 {
            "SKIP"
        } else {
            "PASS"
        };
        println!("{claim:<22} {:>6} {:>6} {:>6}  {outcome}", t.pass, t.fail, t.skipped);
    }
    for line in &failures {
        println!("{line}");
    }
    let mut reasons: Vec<(String, usize)> = Vec::new();
    for detail in per_instance.iter().flatten().flat_map(|r| r.details.iter()) {
        let Some(rest) = detail.strip_prefix("skipped: ") else {
            continue;
        };
        let reason = rest.rsplit(": ").next().unwrap_or(rest).to_string();
        match reasons.iter_mut().find(|(r, _)| *r == reason) {
            Some((_, n)) => *n += 1,
            None => reasons.push((reason, 1)),
        }
    }
    for (reason, n) in &reasons {
        println!("skipped {n} checks: {reason}");
    }

    if let Some(path) = &args.out {
        let value: Vec<Value> = per_instance
            .iter()
            .enumerate()
            .flat_map(|(i, reports)| reports.iter().map(move |r| json!({"instance": i, "report": r})))
            .collect();
        write_string(path, &pretty(&Value::Array(value)))?;
    }
    Ok(failures.is_empty())
}

pub fn figure2(args: Figure2Args) -> Result<bool> {
    let joints: Vec<Joint64> = if args.joints.is_empty() {
        if args.count == 0 {
            return Err(Error::DomainError("--count must be at least 1".into()));
        }
        dirichlet_corpus(args.count, args.nx, args.ny, &args.draw.concentration(), args.draw.seed)?
    } else {
        args.joints.iter().map(|p| read_joint(p)).collect::<Result<_>>()?
    };
    let r_list = args.r.iter().map(|&r| selection(r)).collect::<Result<Vec<_>>>()?;
    let rows = map_indexed(joints.len(), |i| figure2_rows(&joints[i], &r_list))
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .concat();
    write_string(&args.out, &figure2_csv(&rows))?;
    let worst = rows
        .iter()
        .map(|row| (row.rho_r_computed - row.rho_r_formula).abs())
        .fold(0.0, f64::max);
    println!("{}", args.out.display());
    println!("{} rows, max |computed - formula| = {worst:.3e}", rows.len());
    Ok(worst < FIGURE2_TOL)
}

pub fn gauss(args: GaussArgs) -> Result<bool> {
    let results = args
        .gamma
        .iter()
        .map(|&g| gaussian_experiment(g, args.r, args.n_steps, args.seed))
        .collect::<Result<Vec<_>>>()?;
    emit(&pretty(&json!(results)), args.out.as_deref())?;
    Ok(true)
}

pub fn counterexample(args: CounterexampleArgs) -> Result<bool> {
    let (joint, swap) = build_counterexample::<f64>();
    emit(&joint_to_json(&joint), Some(&args.out))?;
    if let Some(path) = &args.proposal_out {
        emit(&proposal_to_json(&swap), Some(path))?;
    }
    Ok(true)
}
