//! JSON and CSV formats.
//!
//! Joint: `{"nx", "ny", "p": [row-major]}`. Proposal: `{"axis", "nx", "ny",
//! "q": [[...] per (x, y), row-major]}`. Kernel: `{"states", "P":
//! [row-major], "stationary", "reversible"}`. CSV numbers carry 17
//! significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Axis, FiniteJointDistribution, ProposalFamily, StateLabel, TransitionKernel};
use crate::scalar::Scalar;
use crate::simulate::DecayTrace;
use crate::spectral::NormPower;
use crate::theory::Figure2Row;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct JointFile<T: Scalar> {
    pub nx: usize,
    pub ny: usize,
    pub p: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ProposalFile<T: Scalar> {
    pub axis: Axis,
    pub nx: usize,
    pub ny: usize,
    pub q: Vec<Vec<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct KernelFile<T: Scalar> {
    pub states: Vec<StateLabel>,
    #[serde(rename = "P")]
    pub p: Vec<T>,
    pub stationary: Vec<T>,
    pub reversible: bool,
}

impl<T: Scalar> From<&FiniteJointDistribution<T>> for JointFile<T> {
    fn from(joint: &FiniteJointDistribution<T>) -> Self {
        Self {
            nx: joint.nx(),
            ny: joint.ny(),
            p: joint.to_row_major(),
        }
    }
}

impl<T: Scalar> JointFile<T> {
    pub fn into_joint(self) -> Result<FiniteJointDistribution<T>> {
        FiniteJointDistribution::from_row_major(self.nx, self.ny, &self.p)
    }
}

impl<T: Scalar> From<&ProposalFamily<T>> for ProposalFile<T> {
    fn from(q: &ProposalFamily<T>) -> Self {
        Self {
            axis: q.axis(),
            nx: q.nx(),
            ny: q.ny(),
            q: q.to_vectors(),
        }
    }
}

impl<T: Scalar> ProposalFile<T> {
    pub fn into_proposal(self) -> Result<ProposalFamily<T>> {
        ProposalFamily::from_vectors(self.axis, self.nx, self.ny, &self.q)
    }
}

impl<T: Scalar> From<&TransitionKernel<T>> for KernelFile<T> {
    fn from(kernel: &TransitionKernel<T>) -> Self {
        let n = kernel.n_states();
        Self {
            states: kernel.labels().to_vec(),
            p: (0..n * n).map(|i| kernel.prob(i / n, i % n)).collect(),
            stationary: kernel.stationary().iter().copied().collect(),
            reversible: kernel.is_reversible(),
        }
    }
}

impl<T: Scalar> KernelFile<T> {
    pub fn into_kernel(self) -> Result<TransitionKernel<T>> {
        let n = self.states.len();
        if self.p.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: self.p.len(),
            });
        }
        TransitionKernel::new(
            self.states,
            DMatrix::from_row_slice(n, n, &self.p),
            DVector::from_vec(self.stationary),
            self.reversible,
        )
    }
}

fn parse<D: serde::de::DeserializeOwned>(text: &str) -> Result<D> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn to_pretty<S: Serialize>(value: &S) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

pub fn joint_from_json<T: Scalar>(text: &str) -> Result<FiniteJointDistribution<T>> {
    parse::<JointFile<T>>(text)?.into_joint()
}

pub fn joint_to_json<T: Scalar>(joint: &FiniteJointDistribution<T>) -> String {
    to_pretty(&JointFile::from(joint))
}

pub fn proposal_from_json<T: Scalar>(text: &str) -> Result<ProposalFamily<T>> {
    parse::<ProposalFile<T>>(text)?.into_proposal()
}

pub fn proposal_to_json<T: Scalar>(q: &ProposalFamily<T>) -> String {
    to_pretty(&ProposalFile::from(q))
}

pub fn kernel_from_json<T: Scalar>(text: &str) -> Result<TransitionKernel<T>> {
    parse::<KernelFile<T>>(text)?.into_kernel()
}

pub fn kernel_to_json<T: Scalar>(kernel: &TransitionKernel<T>) -> String {
    to_pretty(&KernelFile::from(kernel))
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn write_string(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn read_joint<T: Scalar>(path: &Path) -> Result<FiniteJointDistribution<T>> {
    joint_from_json(&read_to_string(path)?)
}

pub fn read_proposal<T: Scalar>(path: &Path) -> Result<ProposalFamily<T>> {
    proposal_from_json(&read_to_string(path)?)
}

/// 17 significant digits in scientific notation.
pub fn format_real(value: f64) -> String {
    format!("{value:.16e}")
}

fn csv<I: IntoIterator<Item = Vec<f64>>>(header: &str, rows: I, first_is_count: bool) -> String {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if first_is_count && i == 0 {
                    format!("{}", *v as u64)
                } else {
                    format_real(*v)
                }
            })
            .collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// `n,chi_square,tv`.
pub fn decay_csv(trace: &DecayTrace) -> String {
    csv(
        "n,chi_square,tv",
        trace.points.iter().map(|p| vec![p.n as f64, p.chi_square, p.tv]),
        true,
    )
}

/// `n,norm`.
pub fn norm_powers_csv<T: Scalar>(powers: &[NormPower<T>]) -> String {
    csv(
        "n,norm",
        powers.iter().map(|p| vec![p.n as f64, p.norm.as_f64()]),
        true,
    )
}

/// `r,rho_d,rho_r_computed,rho_r_formula`.
pub fn figure2_csv(rows: &[Figure2Row]) -> String {
    csv(
        "r,rho_d,rho_r_computed,rho_r_formula",
        rows.iter()
            .map(|row| vec![row.r, row.rho_d, row.rho_r_computed, row.rho_r_formula]),
        false,
    )
}

/// Parses a CSV produced by [`figure2_csv`].
pub fn parse_figure2_csv(text: &str) -> Result<Vec<Figure2Row>> {
    let mut lines = text.lines();
    match lines.next() {
        Some("r,rho_d,rho_r_computed,rho_r_formula") => {}
        other => return Err(Error::Parse(format!("unexpected header {other:?}"))),
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            let cells = line
                .split(',')
                .map(|c| c.parse::<f64>().map_err(|e| Error::Parse(format!("{line}: {e}"))))
                .collect::<Result<Vec<f64>>>()?;
            match cells.as_slice() {
                &[r, rho_d, rho_r_computed, rho_r_formula] => Ok(Figure2Row {
                    r,
                    rho_d,
                    rho_r_computed,
                    rho_r_formula,
                }),
                _ => Err(Error::Parse(format!("expected 4 columns: {line}"))),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::rg_kernel;
    use crate::model::{validate_joint, SelectionProbability};

    fn example() -> FiniteJointDistribution<f64> {
        validate_joint(&[vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap()
    }

    #[test]
    fn joint_round_trip() {
        let joint = example();
        let text = joint_to_json(&joint);
        assert_eq!(joint_from_json::<f64>(&text).unwrap(), joint);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["nx"], 2);
        assert_eq!(value["p"][1], 0.1);
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(matches!(
            joint_from_json::<f64>("{\"nx\": 2, \"ny\": "),
            Err(Error::Parse(_))
        ));
        assert!(matches!(
            joint_from_json::<f64>(r#"{"nx": 1, "ny": 2, "p": [0.5, 0.5]}"#),
            Err(Error::AssumptionOneViolated { .. })
        ));
    }

    #[test]
    fn proposal_round_trip() {
        let q = ProposalFamily::<f64>::swap(Axis::X, 2, 2).unwrap();
        let text = proposal_to_json(&q);
        assert!(text.contains("\"axis\": \"X\""));
        assert_eq!(proposal_from_json::<f64>(&text).unwrap(), q);
    }

    #[test]
    fn kernel_round_trip() {
        let kernel = rg_kernel(&example(), SelectionProbability::new(0.5).unwrap()).unwrap();
        let text = kernel_to_json(&kernel);
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["states"][1], serde_json::json!({"x": 0, "y": 1}));
        assert_eq!(value["P"].as_array().unwrap().len(), 16);
        assert_eq!(value["reversible"], true);
        assert_eq!(kernel_from_json::<f64>(&text).unwrap(), kernel);
    }

    #[test]
    fn csv_formats() {
        assert_eq!(format_real(0.36), "3.5999999999999999e-1");
        assert_eq!(format_real(0.36).parse::<f64>().unwrap(), 0.36);
        let rows = vec![Figure2Row {
            r: 0.5,
            rho_d: 0.0,
            rho_r_computed: 0.5,
            rho_r_formula: 0.5,
        }];
        let text = figure2_csv(&rows);
        assert!(text.starts_with("r,rho_d,rho_r_computed,rho_r_formula\n"));
        assert_eq!(parse_figure2_csv(&text).unwrap(), rows);
        let powers = vec![NormPower { n: 1, norm: 0.6f64 }];
        assert_eq!(norm_powers_csv(&powers), "n,norm\n1,5.9999999999999998e-1\n");
    }
}
