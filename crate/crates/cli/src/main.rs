//! Command-line runner for the 1D mean field game solver.
//!
//! `mfgsl run` solves one of the reference configurations and writes CSV
//! tables plus a JSON summary; `mfgsl validate` runs a built-in property
//! battery; `mfgsl oracle` cross-checks the transport sweep against the
//! Markov-chain sampler.
//!
//! Exit codes: 0 on success (and convergence), 2 when the fixed point did
//! not converge or an oracle gate failed, 1 on usage or I/O errors.

mod config;
mod output;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mfgsl_core::*;

use config::{ConfigOverlay, EmitFlags};

#[derive(Parser)]
#[command(
    name = "mfgsl",
    version,
    about = "Semi-Lagrangian solver for 1D mean field games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct RunFlags {
    /// Configuration file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Reference configuration: 1 (no diffusion), 2 (constant), 3 (degenerate).
    #[arg(long)]
    test: Option<u8>,
    /// Space step; defaults to the preset of the chosen test.
    #[arg(long)]
    rho: Option<f64>,
    /// Time step; defaults to rho.
    #[arg(long)]
    h: Option<f64>,
    /// Mollification width; defaults to 0.15 (test 1) or 2 sqrt(h).
    #[arg(long)]
    eps: Option<f64>,
    /// Width of the concentration penalty.
    #[arg(long)]
    delta: Option<f64>,
    /// Stopping threshold of the fixed-point loop.
    #[arg(long)]
    tau: Option<f64>,
    /// Iteration cap of the fixed-point loop.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Weight kept on the previous density iterate, in [0, 1).
    #[arg(long)]
    damping: Option<f64>,
    /// Output directory for CSV tables and summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for sampler-based commands.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma list of tables to write: density,value,drift,errors,moments or `all`.
    #[arg(long)]
    emit: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a configuration and write the artifacts.
    Run(RunFlags),
    /// Run the built-in property battery.
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Compare the transport sweep against the Markov-chain sampler.
    Oracle {
        #[command(flatten)]
        flags: RunFlags,
        /// Number of simulated paths.
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        /// Optional gate: exit 2 if any per-step d1 exceeds this.
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn overlay_from_flags(flags: &RunFlags) -> std::result::Result<ConfigOverlay, String> {
    Ok(ConfigOverlay {
        test_id: flags.test,
        rho: flags.rho,
        h: flags.h,
        epsilon: flags.eps,
        delta: flags.delta,
        tau: flags.tau,
        max_iters: flags.max_iters,
        damping: flags.damping,
        out_dir: flags.out.clone(),
        seed: flags.seed,
        emit: flags.emit.as_deref().map(EmitFlags::parse).transpose()?,
    })
}

fn resolve(flags: &RunFlags) -> std::result::Result<config::RunConfig, String> {
    let mut overlay = ConfigOverlay::default();
    if let Some(path) = &flags.config {
        overlay = ConfigOverlay::from_file(path)?;
    }
    overlay.merged_with(overlay_from_flags(flags)?).resolve()
}

fn cmd_run(flags: RunFlags) -> ExitCode {
    let cfg = match resolve(&flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let (problem, grid, epsilon) = match cfg.instantiate() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let fp = FixedPointConfig {
        tau: cfg.tau,
        max_iters: cfg.max_iters,
        damping: cfg.damping,
    };
    eprintln!(
        "solving test {} on {} nodes x {} steps (rho={:.4e}, h={:.4e}, eps={:.4})",
        cfg.test_id,
        grid.num_nodes(),
        grid.num_steps(),
        grid.rho(),
        grid.h(),
        epsilon
    );
    let solution = match solve(&problem, &grid, epsilon, &fp, &MinimizerConfig::default()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    for r in &solution.history {
        eprintln!(
            "  p={:3}  E(v)={:10.3e}  E(m)={:10.3e}",
            r.iteration, r.e_v, r.e_m
        );
    }
    if let Err(e) = output::write_artifacts(&cfg, &grid, epsilon, &solution) {
        eprintln!("error writing artifacts: {e}");
        return ExitCode::from(1);
    }
    eprintln!(
        "{} after {} iterations; artifacts in {}",
        if solution.converged {
            "converged"
        } else {
            "NOT converged"
        },
        solution.iterations,
        cfg.out_dir.display()
    );
    if solution.converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn cmd_validate(seed: u64) -> ExitCode {
    let checks = validate::run_battery(seed);
    let mut all = true;
    for c in &checks {
        println!(
            "{:18} {}  ({})",
            c.name,
            if c.pass { "PASS" } else { "FAIL" },
            c.detail
        );
        all &= c.pass;
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn cmd_oracle(flags: RunFlags, samples: usize, tol: Option<f64>) -> ExitCode {
    let cfg = match resolve(&flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let (problem, grid, epsilon) = match cfg.instantiate() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let fp = FixedPointConfig {
        tau: cfg.tau,
        max_iters: cfg.max_iters,
        damping: cfg.damping,
    };
    let run = || -> mfgsl_core::Result<(Vec<f64>, Grid)> {
        let solution = solve(&problem, &grid, epsilon, &fp, &MinimizerConfig::default())?;
        let m0 = initial_density(problem.initial_density.as_ref(), &grid)?;
        let sigma = problem.sigma_samples(&grid);
        let empirical = simulate_scheme(&m0, &solution.drift, &sigma, &grid, samples, cfg.seed)?;
        let mut distances = Vec::with_capacity(grid.num_steps() + 1);
        for k in 0..=grid.num_steps() {
            distances.push(wasserstein1_1d(
                empirical.slice(k),
                solution.m.slice(k),
                &grid,
            )?);
        }
        Ok((distances, grid.clone()))
    };
    match run() {
        Ok((distances, grid)) => {
            let max = distances.iter().cloned().fold(0.0f64, f64::max);
            if let Err(e) = std::fs::create_dir_all(&cfg.out_dir).and_then(|_| {
                output::write_oracle_table(&cfg.out_dir.join("oracle.csv"), &grid, &distances)
            }) {
                eprintln!("error writing oracle table: {e}");
                return ExitCode::from(1);
            }
            println!(
                "max per-step d1(sampler, sweep) = {max:.3e} over {} slices ({samples} paths, seed {})",
                distances.len(),
                cfg.seed
            );
            match tol {
                Some(t) if max > t => {
                    println!("gate {t:.3e} exceeded");
                    ExitCode::from(2)
                }
                _ => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(flags) => cmd_run(flags),
        Command::Validate { seed } => cmd_validate(seed),
        Command::Oracle {
            flags,
            samples,
            tol,
        } => cmd_oracle(flags, samples, tol),
    }
}
