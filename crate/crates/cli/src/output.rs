//! Artifact writers. All tables are CSV with a header row, floats printed
//! with 17 significant digits so a read-back reproduces the in-memory
//! values bit for bit; identical runs produce byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use mfgsl_core::{second_moment, Grid, MfgSolution};

use crate::config::RunConfig;

fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.17e}")
    } else {
        v.to_string()
    }
}

#[derive(Serialize)]
struct Summary {
    test: u8,
    rho: f64,
    h: f64,
    epsilon: f64,
    delta: f64,
    tau: f64,
    max_iters: usize,
    damping: f64,
    converged: bool,
    iterations: usize,
    final_e_v: f64,
    final_e_m: f64,
    mass_deviation_max: f64,
    density_sup: f64,
    clamped_flows: usize,
    second_moments: Vec<f64>,
}

pub fn write_artifacts(
    config: &RunConfig,
    grid: &Grid,
    epsilon: f64,
    solution: &MfgSolution,
) -> std::io::Result<()> {
    std::fs::create_dir_all(&config.out_dir)?;
    let emit = &config.emit;

    if emit.density {
        let mut out = BufWriter::new(File::create(config.out_dir.join("density.csv"))?);
        writeln!(out, "k,t,i,x,weight,density")?;
        for k in 0..=grid.num_steps() {
            let t = grid.time(k);
            for i in 0..grid.num_nodes() {
                let w = solution.m.at(i, k);
                writeln!(
                    out,
                    "{k},{},{i},{},{},{}",
                    fmt(t),
                    fmt(grid.node(i)),
                    fmt(w),
                    fmt(w / grid.rho())
                )?;
            }
        }
    }
    if emit.value {
        let mut out = BufWriter::new(File::create(config.out_dir.join("value.csv"))?);
        writeln!(out, "k,t,i,x,value")?;
        for k in 0..=grid.num_steps() {
            let t = grid.time(k);
            for i in 0..grid.num_nodes() {
                writeln!(
                    out,
                    "{k},{},{i},{},{}",
                    fmt(t),
                    fmt(grid.node(i)),
                    fmt(solution.v.at(i, k))
                )?;
            }
        }
    }
    if emit.drift {
        let mut out = BufWriter::new(File::create(config.out_dir.join("drift.csv"))?);
        writeln!(out, "k,t,i,x,drift")?;
        for k in 0..=grid.num_steps() {
            let t = grid.time(k);
            for i in 0..grid.num_nodes() {
                writeln!(
                    out,
                    "{k},{},{i},{},{}",
                    fmt(t),
                    fmt(grid.node(i)),
                    fmt(solution.drift.at(i, k))
                )?;
            }
        }
    }
    if emit.errors {
        let mut out = BufWriter::new(File::create(config.out_dir.join("errors.csv"))?);
        writeln!(out, "p,e_v,e_m")?;
        for r in &solution.history {
            writeln!(out, "{},{},{}", r.iteration, fmt(r.e_v), fmt(r.e_m))?;
        }
    }
    if emit.moments {
        let mut out = BufWriter::new(File::create(config.out_dir.join("moments.csv"))?);
        writeln!(out, "k,t,second_moment")?;
        for k in 0..=grid.num_steps() {
            writeln!(
                out,
                "{k},{},{}",
                fmt(grid.time(k)),
                fmt(second_moment(solution.m.slice(k), grid))
            )?;
        }
    }

    let last = solution.history.last();
    let summary = Summary {
        test: config.test_id,
        rho: grid.rho(),
        h: grid.h(),
        epsilon,
        delta: config.delta,
        tau: config.tau,
        max_iters: config.max_iters,
        damping: config.damping,
        converged: solution.converged,
        iterations: solution.iterations,
        final_e_v: last.map(|r| r.e_v).unwrap_or(f64::NAN),
        final_e_m: last.map(|r| r.e_m).unwrap_or(f64::NAN),
        mass_deviation_max: solution.m.max_mass_deviation(),
        density_sup: solution.m.max_cell_density(grid),
        clamped_flows: solution.clamped_flows,
        second_moments: (0..=grid.num_steps())
            .map(|k| second_moment(solution.m.slice(k), grid))
            .collect(),
    };
    let mut out = BufWriter::new(File::create(config.out_dir.join("summary.json"))?);
    // serde_json rejects non-finite floats; the first-iteration value error
    // is infinite by construction, so patch it textually
    let text =
        serde_json::to_string_pretty(&SummaryPatched::from(summary)).expect("summary serializes");
    writeln!(out, "{text}")?;
    Ok(())
}

/// Same shape as [`Summary`] with non-finite floats carried as strings.
#[derive(Serialize)]
struct SummaryPatched {
    test: u8,
    rho: f64,
    h: f64,
    epsilon: f64,
    delta: f64,
    tau: f64,
    max_iters: usize,
    damping: f64,
    converged: bool,
    iterations: usize,
    final_e_v: serde_json::Value,
    final_e_m: serde_json::Value,
    mass_deviation_max: f64,
    density_sup: f64,
    clamped_flows: usize,
    second_moments: Vec<f64>,
}

fn json_float(v: f64) -> serde_json::Value {
    if v.is_finite() {
        serde_json::json!(v)
    } else {
        serde_json::json!(v.to_string())
    }
}

impl From<Summary> for SummaryPatched {
    fn from(s: Summary) -> Self {
        SummaryPatched {
            test: s.test,
            rho: s.rho,
            h: s.h,
            epsilon: s.epsilon,
            delta: s.delta,
            tau: s.tau,
            max_iters: s.max_iters,
            damping: s.damping,
            converged: s.converged,
            iterations: s.iterations,
            final_e_v: json_float(s.final_e_v),
            final_e_m: json_float(s.final_e_m),
            mass_deviation_max: s.mass_deviation_max,
            density_sup: s.density_sup,
            clamped_flows: s.clamped_flows,
            second_moments: s.second_moments,
        }
    }
}

/// Comparison table of the chain sampler against the transport sweep.
pub fn write_oracle_table(path: &Path, grid: &Grid, distances: &[f64]) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "k,t,d1")?;
    for (k, d) in distances.iter().enumerate() {
        writeln!(out, "{k},{},{}", fmt(grid.time(k)), fmt(*d))?;
    }
    Ok(())
}
