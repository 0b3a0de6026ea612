//! `bergman`: command-line front end to the weighted Bergman toolkit.
//!
//! Exit status: 0 when every check of the invoked command passes, 2 when a
//! check fails, 1 on usage or configuration errors.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use bergman_core::{BergmanError, Precision};
use clap::{Args, Parser, Subcommand};

use crate::config::{Format, PartialConfig};

#[derive(Debug, Parser)]
#[command(name = "bergman", version, about = "Weighted Bergman projections on the unit disc")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON file with any of the run-configuration fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Weight spec, e.g. `alpha=0;M=poly-r2:2,-1`.
    #[arg(long, global = true)]
    weight: Option<String>,
    /// Overrides the exponent of the weight spec.
    #[arg(long, global = true, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long = "n-max", global = true)]
    n_max: Option<usize>,
    /// Radial nodes R of the polar grid.
    #[arg(long, global = true)]
    radial: Option<usize>,
    /// Angular nodes K of the polar grid (power of two).
    #[arg(long, global = true)]
    angular: Option<usize>,
    /// Exponents, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    p: Option<Vec<f64>>,
    /// Tolerance of the command's check.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file; defaults to $BERGMAN_OUTPUT_DIR/<command>.<ext>, else stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// `double` or `extended` accumulation in quadrature sums.
    #[arg(long, global = true)]
    precision: Option<Precision>,
}

impl CommonArgs {
    fn partial(&self) -> PartialConfig {
        PartialConfig {
            weight: self.weight.clone(),
            alpha: self.alpha,
            n_max: self.n_max,
            radial: self.radial,
            angular: self.angular,
            p: self.p.clone(),
            tol: self.tol,
            format: self.format,
            output: self.output.clone(),
            precision: self.precision,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Moment table I_0..I_{n_max} with error estimates.
    Moments,
    /// Bergman coefficients 1/(2π I_n) and the multiplier t_n.
    Coeffs,
    /// Kernel series at (z, w), with the closed form for Jacobi weights.
    Kernel {
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, allow_hyphen_values = true)]
        w: String,
    },
    /// Taylor coefficients of the projection of a registry function.
    Project {
        #[arg(long = "f")]
        f: String,
        #[arg(long = "N")]
        degree: Option<usize>,
    },
    /// Projection computed directly and through the multiplier identity.
    IdentityCheck {
        #[arg(long = "f")]
        f: String,
        #[arg(long = "N")]
        degree: Option<usize>,
    },
    /// Bounded-variation report for t_n.
    Bv,
    /// Convergence of t_n, n²Δt_n, C1C2/A and C3C4/A to their limits.
    Limits {
        #[arg(long, value_delimiter = ',')]
        ns: Option<Vec<usize>>,
    },
    /// Ratios ‖B_μ f‖_p / ‖f‖_p over a battery of functions.
    Opnorm {
        /// Battery members separated by `;`.
        #[arg(long = "f", value_delimiter = ';')]
        f: Option<Vec<String>>,
        #[arg(long = "N")]
        degree: Option<usize>,
    },
    /// Norms of Taylor partial sums S_N f for N = 1, 2, 4, ….
    Sn {
        #[arg(long = "f", default_value = "logsing")]
        f: String,
        #[arg(long = "N")]
        degree: Option<usize>,
    },
    /// Runs the acceptance suite and writes one JSON document.
    Report {
        /// Criterion numbers to run, comma separated (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<u8>>,
    },
}

pub enum Failure {
    Usage(anyhow::Error),
    Check(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<BergmanError>() {
            Some(BergmanError::CrossValidation { .. }) => Failure::Check(e.to_string()),
            _ => Failure::Usage(e),
        }
    }
}

impl From<BergmanError> for Failure {
    fn from(e: BergmanError) -> Self {
        Failure::from(anyhow::Error::new(e))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let partial = match &cli.common.config {
        Some(path) => PartialConfig::load(path).map(|file| cli.common.partial().or(file)),
        None => Ok(cli.common.partial()),
    };
    let result = partial
        .map_err(Failure::Usage)
        .and_then(|p| commands::run(&cli.command, p));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("check failed: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
