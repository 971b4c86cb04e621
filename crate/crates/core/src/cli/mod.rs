//! Command-line front end. [`run`] parses arguments, writes to the given
//! streams and returns the process exit code.

mod inputs;
mod solve;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::certify::{lagrangian_frame_check, sylvester_residual};
use crate::eigh::is_positive_definite;
use crate::error::Error;
use crate::presets::{self, SOLVE_PRESETS};
use crate::textio::{format_value, read_matrix_file, write_matrix, write_matrix_file};

pub use inputs::{parse_b_spec, random_start, EpsilonChoice};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "sobflow", version, about = "Eigenpairs of symmetrizable matrices by the S-Oja-Brockett flow")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build and certify a symmetrizer S with A^T S = S A.
    Symmetrize(SymmetrizeArgs),
    /// Integrate the flow and report eigenpairs against the oracle.
    Solve(SolveArgs),
    /// Check a candidate symmetrizer.
    Verify(VerifyArgs),
    /// Named inputs.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum PresetAction {
    List,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// Dense matrix file with paired off-diagonal structure.
    Axisymmetric,
    /// Labelled blocks P, Q, R.
    Saddle,
    /// Labelled 1 x n rows d, a, b for diag(d) + a b^T.
    RankOne,
    /// Dense matrix file plus an eigenbasis given with --basis.
    Eigenbasis,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Fixed,
    Variable,
}

/// Where the matrix and its symmetrizer come from.
#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Input file (layout depends on --family).
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long, value_enum)]
    pub family: Option<Family>,
    /// Shift for the saddle family: a number or `auto` for the window
    /// midpoint.
    #[arg(long, default_value = "auto")]
    pub epsilon: EpsilonChoice,
    /// Eigenbasis file for the eigenbasis family.
    #[arg(long)]
    pub basis: Option<PathBuf>,
    /// Positive weights for the eigenbasis family, e.g. "1,2,3".
    #[arg(long)]
    pub z: Option<String>,
    /// Check family membership before building S.
    #[arg(long)]
    pub validate: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SymmetrizeArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Write S here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Symmetrizer file; the input is then a dense A.
    #[arg(long)]
    pub s: Option<PathBuf>,
    /// Weights: a file or a list such as "3,2,1".
    #[arg(long)]
    pub b: Option<String>,
    /// Initial state file; random from --seed otherwise.
    #[arg(long)]
    pub x0: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub stride: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run fixed and variable steps side by side.
    #[arg(long)]
    pub compare: bool,
    /// Check the line-search cubic against finite differences each step.
    #[arg(long)]
    pub audit: bool,
    /// Prefix for the trajectory and eigenpair CSV files.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    pub a: PathBuf,
    pub s: PathBuf,
}

/// A failure with its exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DivergenceDetected { .. } => EXIT_DIVERGED,
            Error::NotConverged => EXIT_NOT_CONVERGED,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::input(e.to_string())
    }
}

pub type CliResult = std::result::Result<i32, CliError>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

pub fn execute(command: &Command, out: &mut dyn Write) -> CliResult {
    match command {
        Command::Symmetrize(args) => cmd_symmetrize(args, out),
        Command::Solve(args) => solve::cmd_solve(args, out),
        Command::Verify(args) => cmd_verify(args, out),
        Command::Preset {
            action: PresetAction::List,
        } => cmd_preset_list(out),
    }
}

pub fn cmd_symmetrize(args: &SymmetrizeArgs, out: &mut dyn Write) -> CliResult {
    let built = inputs::load_source(&args.source, out)?;
    match &args.output {
        Some(path) => write_matrix_file(path, &built.s)?,
        None => out.write_all(write_matrix(&built.s).as_bytes())?,
    }
    writeln!(out, "{}", built.certificate_line())?;
    if let Some(violation) = &built.violation {
        return Err(CliError::input(violation.clone()));
    }
    Ok(EXIT_OK)
}

pub fn cmd_verify(args: &VerifyArgs, out: &mut dyn Write) -> CliResult {
    let a = read_matrix_file(&args.a)?;
    let s = read_matrix_file(&args.s)?;
    if !a.is_square() || s.shape() != a.shape() {
        return Err(CliError::input(format!(
            "A is {}x{} but S is {}x{}",
            a.rows(),
            a.cols(),
            s.rows(),
            s.cols()
        )));
    }
    let residual = sylvester_residual(&a, &s)?;
    let frame = lagrangian_frame_check(&a, &s)?;
    let sa_asym = (&s * &a).asymmetry();
    let s_asym = s.asymmetry();
    let pd = s_asym <= 1e-12 * s.frobenius_norm().max(1.0) && is_positive_definite(&s.symmetric_part())?;
    writeln!(out, "sylvester_residual={}", format_value(residual))?;
    writeln!(out, "relative_residual={}", format_value(residual / a.frobenius_norm().max(f64::MIN_POSITIVE)))?;
    writeln!(out, "lagrangian_frame={}", format_value(frame))?;
    writeln!(out, "sa_asymmetry={}", format_value(sa_asym))?;
    writeln!(out, "s_asymmetry={}", format_value(s_asym))?;
    writeln!(out, "pd={}", pd)?;
    Ok(EXIT_OK)
}

pub fn cmd_preset_list(out: &mut dyn Write) -> CliResult {
    for name in SOLVE_PRESETS {
        match presets::solve_preset(name) {
            Some(p) => writeln!(out, "{:<26} {}", name, p.description)?,
            None => writeln!(out, "{:<26} {}", name, presets::symmetrize_only_description(name))?,
        }
    }
    Ok(EXIT_OK)
}
