//! `gibbs-spectra` command-line front end.

mod commands;
mod parallel;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use gibbs_spectra::spectral::SamplerKind;

/// Exact convergence rates of two-component Gibbs and conditional
/// Metropolis-Hastings samplers on finite state spaces.
#[derive(Debug, Parser)]
#[command(name = "gibbs-spectra", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a random joint pmf from a Dirichlet distribution.
    Gen(GenArgs),
    /// Convergence rates of every sampler on one joint pmf.
    Analyze(AnalyzeArgs),
    /// Run every verifier on a joint file or a random corpus.
    Verify(VerifyArgs),
    /// Points of the rho_D against rho_R scatter, as CSV.
    Figure2(Figure2Args),
    /// Deterministic-scan Gibbs on a bivariate normal.
    Gauss(GaussArgs),
    /// Write the uniform 2x2 target and its swap proposal.
    Counterexample(CounterexampleArgs),
}

/// Where a proposal family comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ProposalChoice {
    Exact,
    Independence,
    Swap,
    File(PathBuf),
}

impl FromStr for ProposalChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Self::Exact),
            "independence" => Ok(Self::Independence),
            "swap" => Ok(Self::Swap),
            _ => match s.strip_prefix("file:") {
                Some(path) if !path.is_empty() => Ok(Self::File(PathBuf::from(path))),
                _ => Err(format!(
                    "unknown proposal {s:?}; expected exact, independence, swap or file:PATH"
                )),
            },
        }
    }
}

fn parse_selection(s: &str) -> Result<f64, String> {
    let r: f64 = s.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
    if r > 0.0 && r < 1.0 {
        Ok(r)
    } else {
        Err(format!("selection probability {r} is not in (0, 1)"))
    }
}

fn parse_kind(s: &str) -> Result<SamplerKind, String> {
    SamplerKind::ALL
        .into_iter()
        .find(|k| k.tag() == s)
        .ok_or_else(|| format!("unknown sampler {s:?}; expected dg, rg, dc, rc, dcmm or rcmm"))
}

fn parse_window(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("window {s:?} should look like 10,30"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    Ok((parse(a)?, parse(b)?))
}

/// Dirichlet draw settings shared by the generating commands.
#[derive(Debug, Args)]
struct DrawArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Symmetric concentration; per-cell values are drawn uniformly on
    /// [0.5, 2] when omitted.
    #[arg(long)]
    concentration: Option<f64>,
}

#[derive(Debug, Args)]
struct GenArgs {
    nx: usize,
    ny: usize,
    #[command(flatten)]
    draw: DrawArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    joint: PathBuf,
    #[arg(long, default_value_t = 0.5, value_parser = parse_selection)]
    r: f64,
    /// Proposal for the X update of the CMH samplers.
    #[arg(long)]
    proposal: Option<ProposalChoice>,
    /// Proposal for the Y update; defaults to the kind given by --proposal.
    #[arg(long)]
    proposal_y: Option<ProposalChoice>,
    /// Sampler used by --decay-csv, --norm-csv and --kernel-out.
    #[arg(long, default_value = "rg", value_parser = parse_kind)]
    kernel: SamplerKind,
    #[arg(long)]
    decay_csv: Option<PathBuf>,
    #[arg(long)]
    norm_csv: Option<PathBuf>,
    #[arg(long)]
    kernel_out: Option<PathBuf>,
    #[arg(long, default_value_t = 30)]
    n_max: usize,
    #[arg(long, default_value = "10,30", value_parser = parse_window)]
    window: (usize, usize),
    /// Product state of the point-mass start; the most generic one by default.
    #[arg(long)]
    start: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Joint file; omit to use --corpus.
    joint: Option<PathBuf>,
    #[arg(long, conflicts_with = "joint")]
    corpus: Option<usize>,
    #[arg(long, default_value_t = 5)]
    nx: usize,
    #[arg(long, default_value_t = 5)]
    ny: usize,
    #[command(flatten)]
    draw: DrawArgs,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.3,0.5,0.7,0.9", value_parser = parse_selection)]
    r: Vec<f64>,
    /// Tolerance on the random-scan closed form.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value = "independence")]
    proposal: ProposalChoice,
    #[arg(long)]
    proposal_y: Option<ProposalChoice>,
    /// Check only the unconditional implications.
    #[arg(long)]
    solid_only: bool,
    /// Full reports as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct Figure2Args {
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 5)]
    nx: usize,
    #[arg(long, default_value_t = 5)]
    ny: usize,
    #[command(flatten)]
    draw: DrawArgs,
    #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,0.75", value_parser = parse_selection)]
    r: Vec<f64>,
    /// Use these joint files instead of random draws.
    #[arg(long = "joint")]
    joints: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct GaussArgs {
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.9", allow_hyphen_values = true)]
    gamma: Vec<f64>,
    #[arg(long, default_value_t = 0.5, value_parser = parse_selection)]
    r: f64,
    #[arg(long, default_value_t = 1_000_000)]
    n_steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CounterexampleArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    proposal_out: Option<PathBuf>,
}

/// Exit statuses.
const VERIFICATION_FAILED: u8 = 1;
const INPUT_ERROR: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => commands::gen(args),
        Command::Analyze(args) => commands::analyze(args),
        Command::Verify(args) => commands::verify(args),
        Command::Figure2(args) => commands::figure2(args),
        Command::Gauss(args) => commands::gauss(args),
        Command::Counterexample(args) => commands::counterexample(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(VERIFICATION_FAILED),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
