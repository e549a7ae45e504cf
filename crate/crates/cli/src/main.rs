use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use tfc_lambert_cli::{
    run_compare, run_polyscan, run_solve, run_sweep, CliError, OutputOptions,
};

/// Collocation-based Lambert solver driver: solves scenario files and runs
/// parameter sweeps, degree-α scans, and solver comparisons, writing CSV
/// and SVG artifacts.
#[derive(Parser)]
#[command(name = "tfc-lambert", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and write solution, diagnostic, and summary CSVs.
    Solve {
        /// Scenario JSON file.
        file: PathBuf,
        /// Also write an SVG plot of the transfer.
        #[arg(long)]
        svg: bool,
        /// Output directory (default: $TFC_LAMBERT_OUT, then the working
        /// directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every point of a sweep file against the solver, the shooting
    /// method, and the Lambert oracle.
    Sweep {
        /// Scenario JSON file with a `sweep` block.
        file: PathBuf,
        /// Worker threads for grid points (default: one per core).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a (degree, α, radius-ratio) convergence scan.
    Polyscan {
        /// Scenario JSON file with a `scan` block.
        file: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one scenario with all three methods and write their pairwise
    /// difference curves.
    Compare {
        /// Scenario JSON file.
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn print_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Solve { file, svg, out } => {
            let outcome = run_solve(&file, &OutputOptions { out_dir: out, svg })?;
            print_warnings(&outcome.warnings);
            println!(
                "{}: {} after {} iterations, residual {:e}, endpoint closure {:e}",
                outcome.name,
                outcome.stop.as_str(),
                outcome.iterations,
                outcome.residual_final,
                outcome.closure_error,
            );
            print_files(&outcome.files);
            Ok(outcome.exit_code())
        }
        Command::Sweep { file, jobs, out } => {
            let outcome = run_sweep(&file, jobs, &OutputOptions { out_dir: out, svg: false })?;
            print_warnings(&outcome.warnings);
            let solved = outcome.rows.iter().filter(|r| r.tfc.converged).count();
            println!(
                "{}: {} of {} grid points converged",
                outcome.name,
                solved,
                outcome.rows.len()
            );
            print_files(&outcome.files);
            Ok(0)
        }
        Command::Polyscan { file, jobs, out } => {
            let outcome = run_polyscan(&file, jobs, &OutputOptions { out_dir: out, svg: false })?;
            print_warnings(&outcome.warnings);
            let solved = outcome.rows.iter().filter(|r| r.converged).count();
            println!(
                "{}: {} of {} cells converged",
                outcome.name,
                solved,
                outcome.rows.len()
            );
            print_files(&outcome.files);
            Ok(0)
        }
        Command::Compare { file, out } => {
            let outcome = run_compare(&file, &OutputOptions { out_dir: out, svg: false })?;
            print_warnings(&outcome.warnings);
            println!("{}: wrote {} comparison samples", outcome.name, outcome.rows.len());
            print_files(&outcome.files);
            Ok(outcome.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
