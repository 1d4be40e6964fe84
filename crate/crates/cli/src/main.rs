//! Convergence-harness CLI: runs a refinement ladder for one of the
//! built-in example problems, prints the convergence table, and optionally
//! writes the CSV report.

use clap::Parser;
use fracbs::harness::{
    convergence_study, emit_report, preset_problem, render_table, Axis, ExperimentConfig,
};
use fracbs::solver::dense_oracle_solve;
use fracbs::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(
    name = "fracbs",
    about = "Two-mesh convergence harness for the variable-exponent subdiffusive \
             Black-Scholes solver"
)]
struct Args {
    /// Example preset to run (1, 2 or 3).
    #[arg(long)]
    example: u8,

    /// Initial fractional order alpha(0).
    #[arg(long, default_value_t = 0.5)]
    alpha0: f64,

    /// Refinement axis: "time" doubles N per level, "space" doubles M.
    #[arg(long, default_value = "time")]
    axis: String,

    /// Coarsest number of time steps.
    #[arg(long = "N", default_value_t = 16)]
    n: usize,

    /// Coarsest number of spatial cells.
    #[arg(long = "M", default_value_t = 32)]
    m: usize,

    /// Number of ladder levels (error rows).
    #[arg(long, default_value_t = 4)]
    levels: usize,

    /// CSV output path; omit to skip the file.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Gauss-Jacobi node count for kernel evaluation.
    #[arg(long = "jacobi-nodes", default_value_t = 32)]
    jacobi_nodes: usize,

    /// Gauss-Legendre node count for the q lag weights.
    #[arg(long = "legendre-nodes", default_value_t = 8)]
    legendre_nodes: usize,

    /// Also cross-check the coarsest grid against the dense brute-force
    /// oracle (small sizes only) and print the maximum deviation.
    #[arg(long)]
    oracle: bool,
}

fn run(args: &Args) -> Result<(), Error> {
    let axis: Axis = args.axis.parse()?;
    let config = ExperimentConfig {
        example: args.example,
        alpha0: args.alpha0,
        n: args.n,
        m: args.m,
        axis,
        levels: args.levels,
        jacobi_nodes: args.jacobi_nodes,
        legendre_nodes: args.legendre_nodes,
    };
    let report = convergence_study(&config)?;
    print!("{}", render_table(&report));
    if let Some(path) = &args.out {
        emit_report(&report, path)?;
        eprintln!("wrote {}", path.display());
    }
    if args.oracle {
        let problem = preset_problem(args.example, args.alpha0)?;
        let fast = fracbs::solver::solve_all(&problem, args.n, args.m)?;
        let oracle = dense_oracle_solve(&problem, args.n, args.m)?;
        let mut worst = 0.0_f64;
        for (a, b) in fast.u.iter().zip(&oracle.u) {
            for (x, y) in a.iter().zip(b) {
                worst = worst.max((x - y).abs());
            }
        }
        println!("oracle cross-check at (N, M) = ({}, {}): max |diff| = {worst:.3e}", args.n, args.m);
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Numerical(_) => ExitCode::from(3),
                Error::Io(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
