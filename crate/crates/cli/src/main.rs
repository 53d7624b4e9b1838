//! `spw`: reproducible experiments over singular measures.
//!
//! Every verb writes CSV/JSON files into the output directory and exits with
//! 0 when its verdict holds (or the computation succeeded), 2 when the
//! verdict fails and 1 on input errors.

mod output;
mod verbs;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::verbs::Status;

#[derive(Debug, Parser)]
#[command(name = "spw", version, about = "Fourier series, sampling and model-space checks for singular measures")]
struct Cli {
    #[command(flatten)]
    config: ExperimentConfig,
    #[command(subcommand)]
    verb: Verb,
}

/// Settings shared by every verb.
#[derive(Debug, Clone, Args, serde::Serialize)]
pub struct ExperimentConfig {
    /// Measure document (JSON).
    #[arg(long, global = true)]
    pub measure: Option<PathBuf>,
    /// Truncation order, or the order cap for adaptive verbs.
    #[arg(long, global = true, default_value_t = 256, value_parser = clap::value_parser!(u64).range(1..))]
    pub order: u64,
    #[arg(long, global = true, default_value_t = 1e-6, value_parser = positive_f64)]
    pub tol: f64,
    /// Seed for every random choice (test functions, sample points).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, env = "SPW_OUT", default_value = "spw-out")]
    pub out: PathBuf,
    /// Refinement depth used when an IFS measure needs atoms.
    #[arg(long, global = true, default_value_t = 8)]
    pub depth: usize,
}

impl ExperimentConfig {
    pub fn order(&self) -> usize {
        self.order as usize
    }
}

fn positive_f64(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        Ok(x) => Err(format!("{x} is not a positive number")),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Moments μ̂(n) for n = 0..=order.
    Moments,
    /// Coefficients of μ₊, α = 1/μ₊ and b.
    Alpha,
    /// Parseval defect of a test function.
    Parseval(verbs::ParsevalArgs),
    /// Kaczmarz iterates against the partial sums Σ⟨f, gₖ⟩eₖ.
    KaczmarzCompare(verbs::FunctionArgs),
    /// Reconstruction of F(z) from integer samples.
    Reconstruct(verbs::ReconstructArgs),
    /// Normalized Cauchy transform: series against quotient form.
    Vmu(verbs::FunctionArgs),
    /// Model-space membership defect of a candidate.
    Membership(verbs::MembershipArgs),
    /// Finds f with prescribed moments, or reports infeasibility.
    MomentsSolve(verbs::MomentsSolveArgs),
    /// Two-sided model-space conditions for F.
    TwoSided(verbs::TwoSidedArgs),
    /// Imaginary-axis growth of f̂.
    Growth(verbs::GrowthArgs),
    /// IFS moments against an atomic refinement.
    CantorCheck(verbs::CantorArgs),
    /// Long-format plot data from report files.
    Plotdata(verbs::PlotArgs),
}

fn run(cli: Cli) -> anyhow::Result<Status> {
    let config = &cli.config;
    match cli.verb {
        Verb::Moments => verbs::moments(config),
        Verb::Alpha => verbs::alpha(config),
        Verb::Parseval(args) => verbs::parseval(config, &args),
        Verb::KaczmarzCompare(args) => verbs::kaczmarz_compare(config, &args),
        Verb::Reconstruct(args) => verbs::reconstruct(config, &args),
        Verb::Vmu(args) => verbs::vmu(config, &args),
        Verb::Membership(args) => verbs::membership(config, &args),
        Verb::MomentsSolve(args) => verbs::moments_solve(config, &args),
        Verb::TwoSided(args) => verbs::two_sided(config, &args),
        Verb::Growth(args) => verbs::growth(config, &args),
        Verb::CantorCheck(args) => verbs::cantor_check(config, &args),
        Verb::Plotdata(args) => verbs::plotdata(config, &args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(Status::Done) | Ok(Status::Verdict(true)) => ExitCode::SUCCESS,
        Ok(Status::Verdict(false)) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
