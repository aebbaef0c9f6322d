use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tbell_core::bloch::{CanonicalChannelParams, DEFAULT_POSITIVITY_SAMPLES};
use tbell_core::optimizer::{
    BiasMode, ChannelClass, ConstraintMode, DEFAULT_CONVERGENCE_TOL, DEFAULT_MAX_ITERS, DEFAULT_RESTARTS,
};

#[derive(Debug, Parser)]
#[command(name = "tbell", version, about = "Temporal CHSH bounds for qubit channel pipelines")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Correlators, Bell value and channel predicates of a scenario file
    Evaluate(EvaluateArgs),
    /// Multi-start search for the largest |B| over a channel class
    Optimize(OptimizeArgs),
    /// Run verification suites; exit 2 if any check fails
    Verify(VerifyArgs),
    /// Parameter scans
    Scan(ScanArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Scenario JSON file
    pub path: PathBuf,
    /// Also report enumeration-oracle correlators and their deviation
    #[arg(long)]
    pub oracle: bool,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassArg {
    General,
    UnitalB,
    UnitalAEbt,
    Ebt,
    Unitary,
    CanonicalE,
    Indivisible,
    Classical,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long, value_enum)]
    pub class: ClassArg,
    /// Initial-state bias: `free` or a fixed |v| in [0, 1]
    #[arg(long, default_value = "free", value_parser = parse_bias)]
    pub bias: BiasMode,
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    pub restarts: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERS)]
    pub max_iters: usize,
    #[arg(long, default_value_t = DEFAULT_CONVERGENCE_TOL)]
    pub tol: f64,
    #[arg(long, env = "TBELL_SEED", default_value_t = 0)]
    pub seed: u64,
    /// `exact`, `sampled` or `sampled:<directions>`
    #[arg(long, default_value = "exact", value_parser = parse_constraint)]
    pub constraint: ConstraintMode,
    /// Fix θ of the canonical channel (canonical-e only; needs --phi)
    #[arg(long, requires = "phi")]
    pub theta: Option<f64>,
    /// Fix φ of the canonical channel (canonical-e only; needs --theta)
    #[arg(long, requires = "theta")]
    pub phi: Option<f64>,
    /// Write the best scenario found to this file
    #[arg(long)]
    pub emit_scenario: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Table1,
    #[value(name = "appendix-c")]
    CanonicalE,
    Werner,
    EbtBias,
    Hadamard,
    All,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, env = "TBELL_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Restarts per optimization in the table1 and appendix-c suites
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    pub restarts: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanTarget {
    Werner,
    CanonicalE,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, value_enum)]
    pub what: ScanTarget,
    /// Grid start: p for werner; fraction t of the full range for
    /// canonical-e (θ = 2πt, φ = πt)
    #[arg(long)]
    pub from: Option<f64>,
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, env = "TBELL_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Restarts per grid point (canonical-e)
    #[arg(long, default_value_t = DEFAULT_RESTARTS)]
    pub restarts: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

fn parse_bias(s: &str) -> Result<BiasMode, String> {
    if s == "free" {
        return Ok(BiasMode::Free);
    }
    let m: f64 = s.parse().map_err(|_| format!("expected `free` or a number, got `{s}`"))?;
    if !(0.0..=1.0).contains(&m) {
        return Err(format!("bias {m} outside [0, 1]"));
    }
    Ok(BiasMode::Fixed(m))
}

fn parse_constraint(s: &str) -> Result<ConstraintMode, String> {
    match s.split_once(':') {
        None if s == "exact" => Ok(ConstraintMode::ExactCptp),
        None if s == "sampled" => Ok(ConstraintMode::SampledPositivity(DEFAULT_POSITIVITY_SAMPLES)),
        Some(("sampled", n)) => n
            .parse()
            .ok()
            .filter(|&n: &usize| n > 0)
            .map(ConstraintMode::SampledPositivity)
            .ok_or_else(|| format!("invalid direction count `{n}`")),
        _ => Err(format!("expected `exact`, `sampled` or `sampled:<n>`, got `{s}`")),
    }
}

impl OptimizeArgs {
    pub fn channel_class(&self) -> Result<ChannelClass, String> {
        if self.theta.is_some() && self.class != ClassArg::CanonicalE {
            return Err("--theta/--phi only apply to --class canonical-e".into());
        }
        Ok(match self.class {
            ClassArg::General => ChannelClass::GeneralCPTP,
            ClassArg::UnitalB => ChannelClass::UnitalB,
            ClassArg::UnitalAEbt => ChannelClass::UnitalAEbt,
            ClassArg::Ebt => ChannelClass::EbtFree,
            ClassArg::Unitary => ChannelClass::AllUnitary,
            ClassArg::CanonicalE => ChannelClass::CanonicalE(match (self.theta, self.phi) {
                (Some(theta), Some(phi)) => Some(CanonicalChannelParams::new(theta, phi).map_err(|e| e.to_string())?),
                _ => None,
            }),
            ClassArg::Indivisible => ChannelClass::Indivisible,
            ClassArg::Classical => ChannelClass::ClassicalStochastic,
        })
    }
}
