//! `pleg`: transforms, identity checks, the 1+1 solver and ε-sweeps from the
//! command line.
//!
//! Exit codes: 0 success, 1 validation error, 2 convergence failure,
//! 3 invariant violation. Failures print one JSON line on stderr.

mod boundary;
mod config;

use std::process::ExitCode;

use clap::Parser;
use pleg_core::duality::verify_report;
use pleg_core::error::{Error, Result};
use pleg_core::estimates::{SweepOptions, epsilon_sweep};
use pleg_core::exec;
use pleg_core::legendre::{partial_transform, write_pair_bundle};
use pleg_core::solver::{SolveOptions, solve_1p1, write_solution_bundle};
use pleg_core::torus_field::{TorusGrid, io};
use serde_json::json;

use config::{Cli, Command, RunConfig};

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ConvergenceFailure { .. } | Error::ConvexityLost { .. } | Error::ResidualTooLarge { .. } => 2,
        Error::InvariantViolation(_) | Error::SliceNotConvex { .. } => 3,
        _ => 1,
    }
}

fn solve_options(cfg: &RunConfig) -> SolveOptions {
    SolveOptions {
        intervals: Some(cfg.nt),
        residual_bound: cfg.residual_bound,
        margin_tolerance: cfg.margin_tolerance,
        boundary_tolerance: cfg.boundary_tolerance,
    }
}

fn run(cfg: &RunConfig) -> Result<()> {
    let grid = TorusGrid::new(&[cfg.nx])?;
    match cfg.command {
        Command::Transform => {
            let u = boundary::parse_potential(&cfg.boundary, &grid)?;
            write_pair_bundle(&cfg.out, &partial_transform(&u)?)
        }
        Command::Solve => {
            let b = boundary::parse_boundary(&cfg.boundary, &grid)?;
            write_solution_bundle(&cfg.out, &solve_1p1(&b, cfg.epsilon, &solve_options(cfg))?)
        }
        Command::Verify => {
            let u = match boundary::parse_strip(&cfg.boundary, cfg.nx, cfg.nt, cfg.epsilon)? {
                Some(strip) => strip,
                None => {
                    let b = boundary::parse_boundary(&cfg.boundary, &grid)?;
                    solve_1p1(&b, cfg.epsilon, &solve_options(cfg))?.u
                }
            };
            std::fs::create_dir_all(&cfg.out)?;
            io::write_atomic(&cfg.out.join("verify.json"), verify_report(&u)?.to_json().as_bytes())
        }
        Command::Sweep => {
            let b = boundary::parse_boundary(&cfg.boundary, &grid)?;
            let opts = SweepOptions {
                n_max: cfg.n_max,
                m_max: cfg.m_max,
                solve: solve_options(cfg),
            };
            epsilon_sweep(&b, &cfg.boundary, &cfg.epsilons, &opts)?.write(&cfg.out)
        }
    }
}

fn fail(e: &Error) -> ExitCode {
    let code = exit_code(e);
    let line = json!({"error": e.kind(), "message": e.to_string(), "exit_code": code});
    eprintln!("{line}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&Error::InvalidArgument(e.to_string().lines().next().unwrap_or("").to_string())),
    };
    if let Some(threads) = std::env::var("PLEG_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        exec::init_thread_pool(threads);
    }
    let result = RunConfig::resolve(cli).and_then(|cfg| run(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
