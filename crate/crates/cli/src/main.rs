mod args;
mod experiments;
mod output;

use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use intensive_core::analysis::Observable;

use args::{Cli, Command};
use experiments::Report;

fn run(cli: &Cli) -> Result<Report> {
    let keep_going = cli.run.keep_going;
    match &cli.command {
        Command::Fidelity(block) => experiments::sweeps(block, vec![Observable::IntensiveFidelity], keep_going),
        Command::Sweep(block) => experiments::sweeps(
            block,
            vec![Observable::IntensiveFidelity, Observable::MutualInformation, Observable::Negativity],
            keep_going,
        ),
        Command::CoreShell { block, layers } => {
            experiments::sweeps(block, experiments::core_shell_observables(&layers.0), keep_going)
        }
        Command::Padded { block, eps, bare } => {
            experiments::sweeps(block, experiments::padded_observables(&eps.0, *bare), keep_going)
        }
        Command::CorrelationLength(lattice) => experiments::correlation_lengths(lattice, keep_going),
        Command::PhaseDiagram { lattice, nb } => experiments::phase(lattice, &nb.0, keep_going),
        Command::OracleCheck { cutoff } => experiments::oracle_check(*cutoff),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    if cli.run.workers == 0 {
        bail!("--workers must be at least 1");
    }
    // Workers parallelize over independent cells; the dense kernels inside
    // each cell stay sequential so results do not depend on the pool size.
    faer::set_global_parallelism(faer::Par::Seq);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.run.workers)
        .build()
        .context("building worker pool")?;
    let report = pool.install(|| run(cli))?;
    output::write_all(&cli.run.out, &report.table, &report.json, &cli.command, &cli.run)?;
    for line in &report.summary {
        println!("{line}");
    }
    println!("wrote {}", cli.run.out.display());
    if let Some(reason) = &report.failed {
        eprintln!("error: {reason}");
        return Ok(false);
    }
    Ok(true)
}
