//! Coupled solve: Picard iteration of the density map until successive
//! iterates stop moving.
//!
//! Every iteration runs the chain
//! `m^p -> v^p -> Dv^p -> m^{p+1}`: a backward value sweep against the
//! current density, mollified-gradient drift extraction, and a forward
//! transport sweep. The loop stops when both sup-norm changes fall below
//! `tau` or the iteration cap is reached.

use crate::error::{Error, Result};
use crate::fokker_planck::{initial_density, solve_forward, DensityField};
use crate::grid::Grid;
use crate::hjb::{solve_backward_with_costs, MinimizerConfig, ValueField};
use crate::metrics::{sup_norm_diff, ErrorReport};
use crate::mollifier::{build_kernel, drift_field, DriftField};
use crate::problem::{cost_table, InteractionKernel, MfgProblem};

/// Stopping rule of the Picard loop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointConfig {
    /// Threshold on both sup-norm changes.
    pub tau: f64,
    pub max_iters: usize,
    /// Weight kept on the previous density iterate,
    /// `m^{p+1} = (1 - damping) * m_new + damping * m^p`. Zero is the plain
    /// Picard iteration; values toward one damp oscillations of strongly
    /// coupled problems.
    pub damping: f64,
}

impl Default for FixedPointConfig {
    fn default() -> Self {
        FixedPointConfig {
            tau: 1e-3,
            max_iters: 50,
            damping: 0.0,
        }
    }
}

impl FixedPointConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.tau.is_finite() || self.tau <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "tau must be positive, got {}",
                self.tau
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::InvalidConfig(format!(
                "damping must lie in [0, 1), got {}",
                self.damping
            )));
        }
        Ok(())
    }
}

/// Converged (or capped) state of the coupled solve.
#[derive(Debug, Clone)]
pub struct MfgSolution {
    pub v: ValueField,
    pub m: DensityField,
    pub drift: DriftField,
    /// One report per iteration; the first has an infinite value error
    /// because no previous value field exists.
    pub history: Vec<ErrorReport>,
    /// True iff the final iteration had both errors at or below `tau`.
    pub converged: bool,
    pub iterations: usize,
    /// Flow feet projected back into the domain during the final forward
    /// sweep; nonzero counts mean the domain is nearly too small.
    pub clamped_flows: usize,
}

/// Default mollification width `2 sqrt(h)` used when no explicit width is
/// requested.
pub fn default_epsilon(h: f64) -> f64 {
    2.0 * h.sqrt()
}

/// Runs the Picard iteration for `problem` on `grid` with mollification
/// width `eps`. Deterministic: identical inputs produce bit-identical
/// output.
pub fn solve(
    problem: &MfgProblem,
    grid: &Grid,
    eps: f64,
    fp_cfg: &FixedPointConfig,
    min_cfg: &MinimizerConfig,
) -> Result<MfgSolution> {
    fp_cfg.validate()?;
    min_cfg.validate()?;
    let interaction = InteractionKernel::new(problem.interaction_delta, grid)?;
    let smoother = build_kernel(eps, grid)?;
    let sigma = problem.sigma_samples(grid);
    let m0 = initial_density(problem.initial_density.as_ref(), grid)?;

    let mut m_prev = DensityField::constant_in_time(&m0, grid);
    let mut previous: Option<(ValueField, DriftField, usize)> = None;
    let mut history = Vec::new();
    let mut converged = false;

    for iteration in 1..=fp_cfg.max_iters {
        let costs = cost_table(problem, &m_prev, &interaction, grid)?;
        let v = solve_backward_with_costs(&costs, &sigma, grid, min_cfg)?;
        let drift = drift_field(&v, &smoother, grid);
        let (m_raw, clamped) = solve_forward(&m0, &drift, &sigma, grid)?;

        let m_new = if fp_cfg.damping > 0.0 {
            let lambda = fp_cfg.damping;
            let blended = (1.0 - lambda) * m_raw.values() + lambda * m_prev.values();
            DensityField::new(blended)
        } else {
            m_raw
        };

        let e_v = previous
            .as_ref()
            .map(|(pv, _, _)| sup_norm_diff(v.values().view(), pv.values().view()))
            .transpose()?
            .unwrap_or(f64::INFINITY);
        let e_m = sup_norm_diff(m_new.values().view(), m_prev.values().view())?;
        history.push(ErrorReport {
            iteration,
            e_v,
            e_m,
        });

        m_prev = m_new;
        previous = Some((v, drift, clamped));

        if e_v <= fp_cfg.tau && e_m <= fp_cfg.tau {
            converged = true;
            break;
        }
    }

    let (v, drift, clamped_flows) = previous.expect("at least one iteration ran");
    let iterations = history.len();
    Ok(MfgSolution {
        v,
        m: m_prev,
        drift,
        history,
        converged,
        iterations,
        clamped_flows,
    })
}
