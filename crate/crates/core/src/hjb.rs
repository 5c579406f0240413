//! Backward-in-time semi-Lagrangian value iteration for the quadratic
//! Hamiltonian in one space dimension.
//!
//! One application of the scheme operator at node `i`, step `k` is
//!
//! ```text
//! min over a of  [I(v_{k+1})(x_i - h a + sqrt(h) s_k)
//!               + I(v_{k+1})(x_i - h a - sqrt(h) s_k)] / 2
//!               + h a^2 / 2 + h F(x_i, t_k)
//! ```
//!
//! where `I` is the P1 interpolant of the next value slice and `s_k` the
//! diffusion sample. The minimizer is known to lie in a compact interval
//! whose radius is twice the Lipschitz constant of the interpolated slice,
//! so the search runs on a bounded control interval: a coarse scan followed
//! by parabolic refinement of the best bracket.

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fokker_planck::DensityField;
use crate::grid::Grid;
use crate::problem::{cost_table, CostTable, InteractionKernel, MfgProblem};

/// Settings of the inner control search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizerConfig {
    /// Radius of the searched control interval. The backward solver treats
    /// this as a floor and enlarges it per slice to `2 L + 1` where `L` is
    /// the running Lipschitz estimate of the value slice, which keeps the
    /// true minimizer interior.
    pub control_bound: f64,
    /// Number of coarse candidates, odd so that zero is always a candidate.
    pub coarse_count: usize,
    /// Rounds of three-point parabolic refinement around the best bracket.
    pub refine_iters: usize,
}

impl MinimizerConfig {
    /// Configuration sized for a terminal slice of Lipschitz constant `l`.
    pub fn for_terminal_lipschitz(l: f64) -> Self {
        MinimizerConfig {
            control_bound: 2.0 * l + 1.0,
            coarse_count: 65,
            refine_iters: 3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.control_bound.is_finite() || self.control_bound <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "control_bound must be positive, got {}",
                self.control_bound
            )));
        }
        if self.coarse_count < 3 || self.coarse_count % 2 == 0 {
            return Err(Error::InvalidConfig(format!(
                "coarse_count must be odd and >= 3, got {}",
                self.coarse_count
            )));
        }
        Ok(())
    }

    fn with_bound(self, bound: f64) -> Self {
        MinimizerConfig {
            control_bound: bound,
            ..self
        }
    }
}

impl Default for MinimizerConfig {
    fn default() -> Self {
        Self::for_terminal_lipschitz(0.0)
    }
}

/// Value table `v(x_i, t_k)`, `k = 0..=num_steps`, produced by the backward
/// sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueField {
    /// Row `k` is the slice at time `t_k`.
    values: Array2<f64>,
}

impl ValueField {
    pub fn new(values: Array2<f64>) -> Self {
        ValueField { values }
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        self.values.row(k).to_slice().expect("row-major values")
    }

    pub fn at(&self, i: usize, k: usize) -> f64 {
        self.values[[k, i]]
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    /// Largest slope `|v_{i+1,k} - v_{i,k}| / rho` within slice `k`.
    pub fn slice_lipschitz(&self, k: usize, grid: &Grid) -> f64 {
        slice_lipschitz(self.slice(k), grid.rho())
    }
}

pub(crate) fn slice_lipschitz(values: &[f64], rho: f64) -> f64 {
    values
        .windows(2)
        .map(|w| (w[1] - w[0]).abs() / rho)
        .fold(0.0, f64::max)
}

/// One application of the scheme operator to the nodal slice `f` at node
/// `i`: returns the minimal value (running cost `mu_cost = h F` included)
/// and the minimizing control.
pub fn s_hat(
    grid: &Grid,
    f: &[f64],
    i: usize,
    mu_cost: f64,
    sigma_k: f64,
    cfg: &MinimizerConfig,
) -> Result<(f64, f64)> {
    cfg.validate()?;
    if f.len() != grid.num_nodes() {
        return Err(Error::ShapeMismatch(format!(
            "slice of length {} on a {}-node grid",
            f.len(),
            grid.num_nodes()
        )));
    }
    if i >= grid.num_nodes() {
        return Err(Error::InvalidConfig(format!("node index {i} out of range")));
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput("value slice".into()));
    }
    if !mu_cost.is_finite() || !sigma_k.is_finite() {
        return Err(Error::NonFiniteInput("running cost or diffusion".into()));
    }
    let (value, alpha) = minimize(grid, f, i, sigma_k, cfg);
    Ok((value + mu_cost, alpha))
}

/// `J(a)` without the additive running cost, measured relative to `base`
/// (the slice value at the node itself). Working with increments keeps the
/// search path invariant under constant shifts of the slice up to rounding
/// of the inputs.
#[inline]
fn objective(grid: &Grid, f: &[f64], x: f64, base: f64, disp: f64, h: f64, alpha: f64) -> f64 {
    let foot = x - h * alpha;
    0.5 * ((grid.interpolate_unchecked(f, foot + disp) - base)
        + (grid.interpolate_unchecked(f, foot - disp) - base))
        + 0.5 * h * alpha * alpha
}

/// Tie-break: strictly smaller value, then smaller |a|, then smaller a.
#[inline]
fn better(candidate: (f64, f64), best: (f64, f64)) -> bool {
    let (va, aa) = candidate;
    let (vb, ab) = best;
    if va != vb {
        return va < vb;
    }
    if aa.abs() != ab.abs() {
        return aa.abs() < ab.abs();
    }
    aa < ab
}

fn minimize(grid: &Grid, f: &[f64], i: usize, sigma_k: f64, cfg: &MinimizerConfig) -> (f64, f64) {
    let h = grid.h();
    let x = grid.node(i);
    let base = f[i];
    let disp = h.sqrt() * sigma_k;
    let bound = cfg.control_bound;
    let half = (cfg.coarse_count - 1) / 2;
    let step = bound / half as f64;

    let eval = |alpha: f64| objective(grid, f, x, base, disp, h, alpha);

    // coarse scan, symmetric around zero so that a = 0 is exact
    let mut best = (eval(0.0), 0.0);
    for j in 1..=half {
        let a = j as f64 * step;
        for alpha in [-a, a] {
            let c = (eval(alpha), alpha);
            if better(c, best) {
                best = c;
            }
        }
    }

    // parabolic refinement of the bracket around the best candidate
    let mut spacing = step;
    for _ in 0..cfg.refine_iters {
        let (f0, center) = best;
        let lo = (center - spacing).max(-bound);
        let hi = (center + spacing).min(bound);
        let (f_lo, f_hi) = (eval(lo), eval(hi));
        for c in [(f_lo, lo), (f_hi, hi)] {
            if better(c, best) {
                best = c;
            }
        }
        if let Some(vertex) = parabola_vertex((lo, f_lo), (center, f0), (hi, f_hi)) {
            let v = vertex.clamp(-bound, bound);
            let c = (eval(v), v);
            if better(c, best) {
                best = c;
            }
        }
        spacing *= 0.5;
    }
    (best.0 + base, best.1)
}

/// Vertex of the quadratic through three points, `None` when the fit is not
/// strictly convex (degenerate or concave bracket).
fn parabola_vertex(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Option<f64> {
    let (x1, y1) = a;
    let (x2, y2) = b;
    let (x3, y3) = c;
    let denom = y1 * (x2 - x3) + y2 * (x3 - x1) + y3 * (x1 - x2);
    // leading coefficient is -denom / ((x1-x2)(x2-x3)(x3-x1)); require it
    // strictly positive
    let span = (x1 - x2) * (x2 - x3) * (x3 - x1);
    if denom == 0.0 || span == 0.0 || (denom / span) >= 0.0 {
        return None;
    }
    let num = y1 * (x2 * x2 - x3 * x3) + y2 * (x3 * x3 - x1 * x1) + y3 * (x1 * x1 - x2 * x2);
    let vertex = 0.5 * num / denom;
    vertex.is_finite().then_some(vertex)
}

/// Backward sweep against a precomputed cost table: sets the terminal slice
/// and applies the scheme operator slice by slice. Nodes within one slice
/// are independent and evaluated in parallel; identical inputs give
/// bit-identical output regardless of thread count.
pub fn solve_backward_with_costs(
    costs: &CostTable,
    sigma: &[f64],
    grid: &Grid,
    cfg: &MinimizerConfig,
) -> Result<ValueField> {
    cfg.validate()?;
    let n = grid.num_nodes();
    let steps = grid.num_steps();
    if costs.running.dim() != (steps, n) || costs.terminal.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "cost table {:?}/{} on a {} x {} grid",
            costs.running.dim(),
            costs.terminal.len(),
            steps,
            n
        )));
    }
    if sigma.len() != steps {
        return Err(Error::ShapeMismatch(format!(
            "{} diffusion samples for {} steps",
            sigma.len(),
            steps
        )));
    }
    if let Some(i) = costs.terminal.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteCost {
            node: i,
            step: steps,
        });
    }

    let h = grid.h();
    let mut values = Array2::zeros((steps + 1, n));
    values
        .row_mut(steps)
        .assign(&ndarray::ArrayView1::from(&costs.terminal));

    for k in (0..steps).rev() {
        let next: Vec<f64> = values.row(k + 1).to_vec();
        // grow the search radius with the running Lipschitz estimate so the
        // minimizer stays interior
        let lip = slice_lipschitz(&next, grid.rho());
        let eff = cfg.with_bound(cfg.control_bound.max(2.0 * lip + 1.0));
        let sigma_k = sigma[k];
        let row: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                let f_cost = costs.running[[k, i]];
                if !f_cost.is_finite() {
                    return Err(Error::NonFiniteCost { node: i, step: k });
                }
                let (value, _) = minimize(grid, &next, i, sigma_k, &eff);
                Ok(value + h * f_cost)
            })
            .collect::<Result<Vec<f64>>>()?;
        values.row_mut(k).assign(&ndarray::ArrayView1::from(&row));
    }
    Ok(ValueField { values })
}

/// Backward solve of the value function against a fixed density iterate:
/// evaluates `F = f + V_delta(., mu)` and `G(., mu(T))` on the grid, then
/// runs the sweep.
pub fn solve_backward(
    problem: &MfgProblem,
    mu: &DensityField,
    grid: &Grid,
    cfg: &MinimizerConfig,
) -> Result<ValueField> {
    let kernel = InteractionKernel::new(problem.interaction_delta, grid)?;
    let costs = cost_table(problem, mu, &kernel, grid)?;
    let sigma = problem.sigma_samples(grid);
    solve_backward_with_costs(&costs, &sigma, grid, cfg)
}
