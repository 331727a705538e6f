//! Command-line surface.

use std::path::PathBuf;

use anyhow::{anyhow, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use momt_core::linalg::{c64, DEFAULT_TOL};
use num_complex::Complex64;

use crate::format::parse_lambda_key;

#[derive(Parser, Debug)]
#[command(name = "momt", version, about = "Operator moment problems on the free semigroup")]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
}

#[derive(Subcommand, Debug)]
pub enum Verb {
    /// Run the feasibility test of a problem and write its report.
    Check(RunArgs),
    /// Build a certifying tuple; on an infeasible instance the report is written instead.
    Synthesize(RunArgs),
    /// Recompute a certificate's residuals against its instance.
    Verify(VerifyArgs),
    /// Write a seeded random instance.
    Gen(GenArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Problem {
    Poisson,
    Star,
    Commutative,
    Trig,
    QuotientPoisson,
    QuotientTrig,
}

impl Problem {
    pub fn as_str(self) -> &'static str {
        match self {
            Problem::Poisson => "poisson",
            Problem::Star => "star",
            Problem::Commutative => "commutative",
            Problem::Trig => "trig",
            Problem::QuotientPoisson => "quotient-poisson",
            Problem::QuotientTrig => "quotient-trig",
        }
    }

    /// Problems stated on `Gamma` over multi-indices.
    pub fn is_commutative(self) -> bool {
        matches!(self, Problem::Commutative | Problem::Trig)
    }
}

/// `j.i=re,im` or `j.i=re`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaArg {
    pub j: usize,
    pub i: usize,
    pub value: Complex64,
}

pub fn parse_lambda_arg(s: &str) -> Result<LambdaArg> {
    let (key, value) = s
        .split_once('=')
        .ok_or_else(|| anyhow!("expected j.i=re,im, got {s:?}"))?;
    let (j, i) = parse_lambda_key(key)?;
    let value = match value.split_once(',') {
        Some((re, im)) => c64(re.trim().parse()?, im.trim().parse()?),
        None => c64(value.trim().parse()?, 0.0),
    };
    Ok(LambdaArg { j, i, value })
}

#[derive(Args, Debug)]
pub struct Common {
    #[arg(long, value_enum)]
    pub problem: Problem,

    /// Instance files; with several, --output names a directory.
    #[arg(short, long = "input", required = true)]
    pub inputs: Vec<PathBuf>,

    #[arg(short, long)]
    pub output: Option<PathBuf>,

    #[arg(long, env = "MOMT_TOL", default_value_t = DEFAULT_TOL)]
    pub tol: f64,

    /// Override a commutation coefficient of the instance (commutative and trig).
    #[arg(long = "lambda", value_parser = parse_lambda_arg)]
    pub lambda: Vec<LambdaArg>,

    /// Instance files processed in parallel.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,

    /// Certificate files, one per input.
    #[arg(short, long = "certificate", required = true)]
    pub certificates: Vec<PathBuf>,

    /// Also evaluate the Poisson transform of the certificate tuple at this
    /// truncation depth (poisson only).
    #[arg(long)]
    pub depth: Option<usize>,

    /// Radius of that evaluation; defaults to the minimizer of the error bound.
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub kind: String,

    #[arg(long, default_value_t = 2)]
    pub n: usize,

    /// Matrix size (for lambda-commuting, the size of the diagonal factor).
    #[arg(long, default_value_t = 2)]
    pub dim: usize,

    /// Longest word in the index set.
    #[arg(long, default_value_t = 2)]
    pub depth: usize,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    /// lambda-commuting only: `j.1=re,im` sets the twist q.
    #[arg(long = "lambda", value_parser = parse_lambda_arg)]
    pub lambda: Vec<LambdaArg>,

    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn lambda_argument_forms() {
        let a = parse_lambda_arg("2.1=-1,0.5").unwrap();
        assert_eq!((a.j, a.i, a.value), (2, 1, c64(-1.0, 0.5)));
        assert_eq!(parse_lambda_arg("3.2=2").unwrap().value, c64(2.0, 0.0));
        assert!(parse_lambda_arg("2.1").is_err());
        assert!(parse_lambda_arg("x=1").is_err());
    }
}
