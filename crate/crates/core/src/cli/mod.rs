//! Command-line front end.
//!
//! Exit codes: 0 success, 2 input/schema error, 3 numerical failure,
//! 4 spectrum not stable, 5 size or truncation limit, 6 verification failure.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::model::DEFAULT_TOL_INPUT;
use crate::spectral::{Stability, DEFAULT_MODE_LIMIT, DEFAULT_TOL_MARGINAL};

pub mod commands;
pub mod model_file;
pub mod report;
pub mod verify;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{}", describe(.0))]
    Numerical(#[from] Error),
    #[error("verification failed: {0}")]
    Verification(String),
}

fn describe(e: &Error) -> String {
    match e {
        Error::NotStable(Stability::Marginal) => "marginal spectrum: Lyapunov solution not unique".into(),
        Error::NotStable(Stability::Unstable) => {
            "unstable spectrum: a rapidity has negative real part, no steady state".into()
        }
        other => other.to_string(),
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Verification(_) => 6,
            CliError::Numerical(e) => match e {
                Error::NotStable(_) => 4,
                Error::CutoffTooLarge { .. } | Error::DimensionCap { .. } | Error::TruncationInsufficient { .. } => 5,
                Error::DimensionMismatch { .. }
                | Error::NonFinite(_)
                | Error::HermiticityViolation { .. }
                | Error::SymmetryViolation { .. }
                | Error::NonSymmetricInitial(_)
                | Error::UnsortedTimes => 2,
                _ => 3,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "thirdq", version, about = "Exact spectra, steady states and dynamics of quadratic open bosonic systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Model JSON document.
    #[arg(long)]
    pub model: PathBuf,
    /// Relative tolerance for repairing near-Hermitian H / near-symmetric K.
    #[arg(long, default_value_t = DEFAULT_TOL_INPUT)]
    pub tol: f64,
    /// Rapidities with |Re beta| below this are marginal.
    #[arg(long, default_value_t = DEFAULT_TOL_MARGINAL)]
    pub tol_marginal: f64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Disable the thread pool.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParamMap {
    Identity,
    Sqrt,
    Square,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rapidities, stability, gap and structure diagnostics.
    Analyze {
        #[command(flatten)]
        common: Common,
    },
    /// Steady-state correlators from the Lyapunov equation.
    Ness {
        #[command(flatten)]
        common: Common,
    },
    /// Decay-mode eigenvalues up to a total excitation number.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        max_excitation: usize,
        #[arg(long, default_value_t = DEFAULT_MODE_LIMIT)]
        limit: usize,
        #[arg(long, value_enum, default_value_t = Emit::Csv)]
        emit: Emit,
    },
    /// Moment trajectories from an initial Gaussian state.
    Dynamics {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t0: f64,
        #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
        t1: f64,
        #[arg(long, default_value_t = 101)]
        steps: usize,
        /// `vacuum` or a JSON file with `C` (2n x 2n) and optional `mean` (n).
        #[arg(long, default_value = "vacuum")]
        initial: String,
        #[arg(long, value_enum, default_value_t = Emit::Csv)]
        emit: Emit,
    },
    /// Cross-check against the truncated-Fock oracle.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Fock levels per mode; chosen from the analytic occupations when omitted.
        #[arg(long)]
        cutoff: Option<usize>,
        /// Trajectory horizon; a few relaxation times when omitted.
        #[arg(long)]
        t1: Option<f64>,
        #[arg(long, default_value_t = 21)]
        steps: usize,
    },
    /// Scan one real scalar of the model document.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Dotted path into the model document, e.g. `channels.1.k.0.0`.
        #[arg(long)]
        param: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long, default_value_t = 11)]
        steps: usize,
        /// Transform applied to each grid value before it is written.
        #[arg(long, value_enum, default_value_t = ParamMap::Identity)]
        map: ParamMap,
        #[arg(long, value_enum, default_value_t = Emit::Csv)]
        emit: Emit,
    },
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    commands::dispatch(cli.command)
}
