//! `cayley`: verification pipelines for 2-ruled Cayley cones.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 usage or spec error.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "cayley", version, about = "Calibration, structure-equation and curve checks for Cayley cones")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Opts {
    /// Tolerance for the command's threshold checks (command-specific default).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Finite-difference step (default 1e-4, Richardson extrapolated).
    #[arg(long, global = true)]
    pub h: Option<f64>,
    /// Sample count: grid size per side, quadrature radial nodes, comass or search starts.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the JSON report to PATH ("-" or no value: standard output).
    #[arg(long, global = true, num_args = 0..=1, default_missing_value = "-", value_name = "PATH")]
    pub json: Option<PathBuf>,
    /// Exact rational arithmetic for form and algebra checks.
    #[arg(long, global = true)]
    pub exact: bool,
    /// Curve/section/search specification (JSON, schema 1).
    #[arg(long, global = true, value_name = "PATH")]
    pub spec: Option<PathBuf>,
    /// Run a single identity of the symbolic suite.
    #[arg(long, global = true, value_name = "NAME")]
    pub identity: Option<String>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Calibration tables: term counts, Phi ∧ Phi, Cayley 4-plane.
    VerifyForms,
    /// spin(7): annihilator of Phi, dimensions, closure, psi-equivariance.
    VerifyAlgebra,
    /// Exact structure-equation suite.
    VerifySymbolic,
    /// Pseudoholomorphicity, fundamental forms, twistor image, minimality.
    CheckCurve,
    /// Cayley residual of the cone (or deformed cone) and the reduction check.
    CheckCone,
    /// Degree of a closed fiber curve by quadrature over the sphere atlas.
    Degree,
    /// Deformations: section check, or the I1-line section when no section is given.
    Deform,
    /// Comass of Phi by multi-start ascent.
    Comass,
    /// Pattern search for pseudoholomorphic orbits.
    SearchOrbit,
}

/// Failure modes of a command run.
#[derive(Debug)]
pub enum RunError {
    /// Bad arguments or specification: exit 2.
    Usage(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let name = match cli.command {
        Command::VerifyForms => "verify-forms",
        Command::VerifyAlgebra => "verify-algebra",
        Command::VerifySymbolic => "verify-symbolic",
        Command::CheckCurve => "check-curve",
        Command::CheckCone => "check-cone",
        Command::Degree => "degree",
        Command::Deform => "deform",
        Command::Comass => "comass",
        Command::SearchOrbit => "search-orbit",
    };
    let o = &cli.opts;
    let result = match cli.command {
        Command::VerifyForms => commands::verify_forms(o),
        Command::VerifyAlgebra => commands::verify_algebra(o),
        Command::VerifySymbolic => commands::verify_symbolic(o),
        Command::CheckCurve => commands::check_curve(o),
        Command::CheckCone => commands::check_cone(o),
        Command::Degree => commands::degree(o),
        Command::Deform => commands::deform(o),
        Command::Comass => commands::comass(o),
        Command::SearchOrbit => commands::search_orbit(o),
    };
    let report = match result {
        Ok(r) => r,
        Err(RunError::Usage(msg)) => {
            eprintln!("cayley {name}: error: {msg}");
            return ExitCode::from(2);
        }
    };
    // keep stdout machine readable when the report goes there
    report.print_summary(o.json.as_deref() == Some(std::path::Path::new("-")));
    if let Some(path) = &o.json {
        if let Err(e) = report.write_json(path) {
            eprintln!("cayley {name}: cannot write {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
