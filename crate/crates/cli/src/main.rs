mod commands;
mod config;
mod expr;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

/// Spline collocation for Riesz-Caputo fractional boundary value problems.
#[derive(Debug, Parser)]
#[command(name = "rcfrac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VerifyProblem {
    /// f = 0 with u(0)+u(1)=1, u'(0)+u'(1)=0
    Zero,
    /// f = lambda u + g(x) with exact solution x^2.5
    Linear,
    /// Example 1
    #[value(name = "1")]
    One,
    /// Example 2
    #[value(name = "2")]
    Two,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Error table for a benchmark example over alpha, degree and h.
    Table {
        /// Benchmark example, 1 or 2.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        example: u8,
        /// Spline degrees (2 or 3), comma separated.
        #[arg(long = "degree", value_delimiter = ',', default_values_t = [2usize])]
        degrees: Vec<usize>,
        /// Fractional orders in (1, 2), comma separated.
        #[arg(long = "alpha", value_delimiter = ',', required = true)]
        alphas: Vec<f64>,
        /// Step sizes as fractions, e.g. 1/8,1/16.
        #[arg(long = "h", value_delimiter = ',', required = true)]
        steps: Vec<String>,
        /// Error is measured on grid_size + 1 uniform points.
        #[arg(long, default_value_t = 1000)]
        grid_size: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Solve a problem described by a JSON config file.
    Solve {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long, default_value_t = 1000)]
        grid_size: usize,
    },
    /// Compare collocation with fixed-point iteration of the integral form.
    Verify {
        #[arg(long, value_enum, default_value_t = VerifyProblem::Zero)]
        example: VerifyProblem,
        #[arg(long, default_value_t = 1.75)]
        alpha: f64,
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long, default_value = "1/32")]
        h: String,
        /// Lipschitz constant of the linear test problem.
        #[arg(long, default_value_t = 0.1)]
        lambda: f64,
        /// Largest accepted distance between the two solutions.
        #[arg(long, default_value_t = 5e-3)]
        threshold: f64,
        #[arg(long, default_value_t = 1e-10)]
        picard_tol: f64,
        #[arg(long, default_value_t = 100)]
        picard_max_iter: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Bad arguments, unreadable or malformed input: exit 2.
    Usage(String),
    /// Solver did not converge or a check failed: exit 1.
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Numerical(_) => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Table {
            example,
            degrees,
            alphas,
            steps,
            grid_size,
            out,
            format,
        } => commands::table(&commands::TableArgs {
            example,
            degrees,
            alphas,
            steps,
            grid_size,
            out,
            format,
        }),
        Command::Solve {
            config,
            out,
            format,
            grid_size,
        } => commands::solve(&config, out.as_deref(), format, grid_size),
        Command::Verify {
            example,
            alpha,
            degree,
            h,
            lambda,
            threshold,
            picard_tol,
            picard_max_iter,
            out,
            format,
        } => commands::verify(&commands::VerifyArgs {
            problem: example,
            alpha,
            degree,
            h,
            lambda,
            threshold,
            picard_tol,
            picard_max_iter,
            out,
            format,
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Numerical(m) => eprintln!("failure: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
