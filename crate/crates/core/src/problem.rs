//! Problem data for the coupled system: running cost `F = f + V_delta`,
//! terminal cost `G`, diffusion `sigma(t)`, initial density `m0`, and the
//! three reference configurations used by the CLI and the test suites.
//!
//! The interaction term `V_delta(x, m)` smooths the density twice with a
//! Gaussian of standard deviation `delta`; both passes are precomposed into
//! a single kernel of standard deviation `delta * sqrt(2)`, which is exact
//! for Gaussians.

use std::sync::Arc;

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fokker_planck::DensityField;
use crate::grid::Grid;

pub type SpaceTimeFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type SpaceFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type TimeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// Terminal cost `G(x, m(T))`; the measure argument is the terminal weight
/// vector on the grid nodes.
pub type TerminalCostFn = Arc<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;

/// Data of one mean field game instance on a bounded domain.
#[derive(Clone)]
pub struct MfgProblem {
    /// Running cost `f(x, t)` added to the interaction term.
    pub running_cost: SpaceTimeFn,
    /// Width of the smoothing Gaussian in `V_delta`.
    pub interaction_delta: f64,
    /// Scale on `V_delta`; zero decouples the system.
    pub interaction_weight: f64,
    pub terminal_cost: TerminalCostFn,
    /// Diffusion coefficient `sigma(t)`, continuous on the horizon; may
    /// vanish on part of it (degenerate case).
    pub sigma: TimeFn,
    /// Initial density, nonnegative with its mass inside the domain.
    pub initial_density: SpaceFn,
    pub x_min: f64,
    pub x_max: f64,
    pub t_final: f64,
}

impl std::fmt::Debug for MfgProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MfgProblem")
            .field("interaction_delta", &self.interaction_delta)
            .field("interaction_weight", &self.interaction_weight)
            .field("domain", &(self.x_min, self.x_max))
            .field("t_final", &self.t_final)
            .finish()
    }
}

impl MfgProblem {
    /// Grid with target spacings `rho`, `h` on this problem's domain; counts
    /// are rounded so the lattice lands exactly on the boundary and horizon.
    pub fn grid_with(&self, rho: f64, h: f64) -> Result<Grid> {
        Grid::from_spacing(self.x_min, self.x_max, rho, h, self.t_final)
    }

    /// Diffusion samples `sigma(t_k)` for `k = 0..num_steps`.
    pub fn sigma_samples(&self, grid: &Grid) -> Vec<f64> {
        (0..grid.num_steps())
            .map(|k| (self.sigma)(grid.time(k)))
            .collect()
    }
}

/// Precomposed double-smoothing kernel sampled on grid offsets: a Gaussian
/// of standard deviation `delta * sqrt(2)` with unit discrete mass
/// (`rho * sum = 1`), so `V_delta` is a genuine smoothed density.
#[derive(Debug, Clone)]
pub struct InteractionKernel {
    delta: f64,
    /// `2 * half_width + 1` symmetric samples.
    weights: Vec<f64>,
    half_width: usize,
}

impl InteractionKernel {
    /// Samples the kernel for the given `delta`. The support is cut at
    /// eight standard deviations, far enough that the truncated tail is
    /// below double precision.
    pub fn new(delta: f64, grid: &Grid) -> Result<Self> {
        if !delta.is_finite() || delta <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "interaction delta must be positive, got {delta}"
            )));
        }
        let sigma = delta * std::f64::consts::SQRT_2;
        let rho = grid.rho();
        let half_width = (8.0 * sigma / rho).ceil() as usize;
        let mut half: Vec<f64> = (0..=half_width)
            .map(|j| {
                let x = j as f64 * rho;
                (-x * x / (2.0 * sigma * sigma)).exp()
            })
            .collect();
        let total = rho * (half[0] + 2.0 * half[1..].iter().sum::<f64>());
        half.iter_mut().for_each(|w| *w /= total);
        let mut weights = vec![0.0; 2 * half_width + 1];
        for j in 0..=half_width {
            weights[half_width + j] = half[j];
            weights[half_width - j] = half[j];
        }
        Ok(InteractionKernel {
            delta,
            weights,
            half_width,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn max_weight(&self) -> f64 {
        self.weights[self.half_width]
    }
}

/// `V_delta(x_i, m) = sum_j K(x_i - x_j) m_j` for a probability weight
/// vector `m` on the grid nodes.
pub fn interaction_cost(m: &[f64], kernel: &InteractionKernel) -> Vec<f64> {
    let n = m.len();
    let hw = kernel.half_width as isize;
    (0..n as isize)
        .map(|i| {
            let lo = (i - hw).max(0);
            let hi = (i + hw).min(n as isize - 1);
            let mut acc = 0.0;
            for j in lo..=hi {
                acc +=
                    kernel.weights[(kernel.half_width as isize + i - j) as usize] * m[j as usize];
            }
            acc
        })
        .collect()
}

/// Running and terminal costs evaluated on a grid against a fixed density
/// iterate; the value iteration consumes this table.
#[derive(Debug, Clone)]
pub struct CostTable {
    /// `F(x_i, t_k) = f(x_i, t_k) + weight * V_delta(x_i, m_k)`,
    /// row `k = 0..num_steps`.
    pub running: Array2<f64>,
    /// `G(x_i, m(T))`.
    pub terminal: Vec<f64>,
}

/// Evaluates the cost table for `problem` against the density iterate `mu`.
pub fn cost_table(
    problem: &MfgProblem,
    mu: &DensityField,
    kernel: &InteractionKernel,
    grid: &Grid,
) -> Result<CostTable> {
    let n = grid.num_nodes();
    let steps = grid.num_steps();
    let rows: Vec<Vec<f64>> = (0..steps)
        .into_par_iter()
        .map(|k| {
            let t = grid.time(k);
            let v_delta = interaction_cost(mu.slice(k), kernel);
            (0..n)
                .map(|i| {
                    (problem.running_cost)(grid.node(i), t)
                        + problem.interaction_weight * v_delta[i]
                })
                .collect()
        })
        .collect();
    let mut running = Array2::zeros((steps, n));
    for (k, row) in rows.into_iter().enumerate() {
        for (i, v) in row.into_iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFiniteCost { node: i, step: k });
            }
            running[[k, i]] = v;
        }
    }
    let terminal_weights = mu.slice(steps);
    let terminal: Vec<f64> = (0..n)
        .map(|i| (problem.terminal_cost)(grid.node(i), terminal_weights))
        .collect();
    if let Some(i) = terminal.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteCost {
            node: i,
            step: steps,
        });
    }
    Ok(CostTable { running, terminal })
}

/// The three reference configurations on `[0, 1] x [0, 2]`: a Gaussian bump
/// of initial mass at `x = 0.5`, a running cost pulling the crowd toward the
/// moving point `(1 - sin(2 pi t))/2`, a concentration penalty with
/// `delta = 0.2`, zero terminal cost, and a diffusion that is zero (test 1),
/// constant `0.2` (test 2) or degenerate `max(0, 0.2 - |t - 1|)` (test 3).
pub fn test_problem(id: u8) -> Result<MfgProblem> {
    let sigma: TimeFn = match id {
        1 => Arc::new(|_| 0.0),
        2 => Arc::new(|_| 0.2),
        3 => Arc::new(|t: f64| (0.2 - (t - 1.0).abs()).max(0.0)),
        other => return Err(Error::UnknownTestId(other)),
    };
    // normalizer of exp(-(x-0.5)^2/0.1^2): 0.1 * sqrt(pi), tails outside
    // [0, 1] are ~1e-12 of the mass and discarded by the cell integration
    let norm = 0.1 * std::f64::consts::PI.sqrt();
    let delta = 0.2;
    Ok(MfgProblem {
        running_cost: Arc::new(|x: f64, t: f64| {
            let target = (1.0 - (2.0 * std::f64::consts::PI * t).sin()) / 2.0;
            5.0 * (x - target) * (x - target)
        }),
        interaction_delta: delta,
        // the smoothing bump exp(-x^2/(2 delta^2))/sqrt(2 pi) integrates to
        // delta, so the double smoothing carries a delta^2 prefactor on the
        // unit-mass kernel
        interaction_weight: delta * delta,
        terminal_cost: Arc::new(|_, _| 0.0),
        sigma,
        initial_density: Arc::new(move |x: f64| {
            let d = (x - 0.5) / 0.1;
            (-d * d).exp() / norm
        }),
        x_min: 0.0,
        x_max: 1.0,
        t_final: 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(cells: usize) -> Grid {
        Grid::from_counts(0.0, 1.0, cells, 10, 2.0).unwrap()
    }

    #[test]
    fn preset_formulas_evaluate_exactly() {
        let p1 = test_problem(1).unwrap();
        // 5*(0.25 - (1 - sin(pi/2))/2)^2 = 5*(0.25)^2 = 0.3125
        assert!(((p1.running_cost)(0.25, 0.25) - 0.3125).abs() < 1e-15);
        assert_eq!((p1.sigma)(1.7), 0.0);

        let p2 = test_problem(2).unwrap();
        assert_eq!((p2.sigma)(0.3), 0.2);

        let p3 = test_problem(3).unwrap();
        assert_eq!((p3.sigma)(1.0), 0.2);
        assert_eq!((p3.sigma)(0.5), 0.0);
        assert_eq!((p3.sigma)(1.3), 0.0);

        assert!(test_problem(4).is_err());
    }

    #[test]
    fn sigma_lipschitz_constants_are_0_0_1() {
        let bounds = [0.0, 0.0, 1.0];
        for id in 1..=3u8 {
            let p = test_problem(id).unwrap();
            let l = bounds[id as usize - 1];
            let ts: Vec<f64> = (0..=400).map(|i| i as f64 * 2.0 / 400.0).collect();
            for w in ts.windows(2) {
                let diff = ((p.sigma)(w[1]) - (p.sigma)(w[0])).abs();
                assert!(diff <= l * (w[1] - w[0]) + 1e-15, "test {id}");
            }
        }
    }

    #[test]
    fn kernel_matches_self_convolution_of_single_pass() {
        // the precomposed kernel must equal the discrete self-convolution of
        // the unit-mass sampling of the single smoothing Gaussian
        let g = grid(200);
        let delta = 0.05;
        let kernel = InteractionKernel::new(delta, &g).unwrap();

        let rho = g.rho();
        let hw = (8.0 * delta / rho).ceil() as usize;
        let mut single: Vec<f64> = (-(hw as isize)..=hw as isize)
            .map(|j| {
                let x = j as f64 * rho;
                (-x * x / (2.0 * delta * delta)).exp()
            })
            .collect();
        let total: f64 = rho * single.iter().sum::<f64>();
        single.iter_mut().for_each(|w| *w /= total);

        // conv[k] = rho * sum_j single[j] single[k - j], support 2*hw
        let mut worst: f64 = 0.0;
        for k in -(2 * hw as isize)..=(2 * hw as isize) {
            let mut conv = 0.0;
            for j in -(hw as isize)..=(hw as isize) {
                let l = k - j;
                if l.abs() <= hw as isize {
                    conv += single[(j + hw as isize) as usize] * single[(l + hw as isize) as usize];
                }
            }
            conv *= rho;
            let composed = if k.unsigned_abs() <= kernel.half_width() {
                kernel.weights()[(kernel.half_width() as isize + k) as usize]
            } else {
                0.0
            };
            worst = worst.max((conv - composed).abs());
        }
        assert!(worst <= 1e-12, "kernel identity violated by {worst:.3e}");
    }

    #[test]
    fn interaction_cost_of_spikes_and_uniform() {
        let g = grid(100);
        let n = g.num_nodes();
        let kernel = InteractionKernel::new(0.1, &g).unwrap();

        // a point mass reproduces the kernel profile, peaked at itself
        let j = 50;
        let mut spike = vec![0.0; n];
        spike[j] = 1.0;
        let v = interaction_cost(&spike, &kernel);
        let peak = v
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(peak, j);
        for i in 0..n {
            let expected = if (i as isize - j as isize).unsigned_abs() <= kernel.half_width() {
                kernel.weights()[(kernel.half_width() as isize + i as isize - j as isize) as usize]
            } else {
                0.0
            };
            assert!((v[i] - expected).abs() < 1e-14);
        }
        let max_w = kernel.max_weight();
        assert!(v.iter().all(|&x| x >= 0.0 && x <= max_w + 1e-14));

        // two equal spikes: the field is symmetric about their midpoint
        let mut two = vec![0.0; n];
        two[30] = 0.5;
        two[70] = 0.5;
        let v = interaction_cost(&two, &kernel);
        for off in 0..30 {
            assert!((v[50 - off] - v[50 + off]).abs() < 1e-12);
        }

        // uniform input gives a constant field wherever the kernel window
        // does not touch the boundary; this needs a kernel narrower than
        // the domain
        let g = Grid::from_counts(0.0, 1.0, 400, 10, 2.0).unwrap();
        let n = g.num_nodes();
        let kernel = InteractionKernel::new(0.01, &g).unwrap();
        let uniform = vec![1.0 / n as f64; n];
        let v = interaction_cost(&uniform, &kernel);
        let hw = kernel.half_width();
        assert!(2 * hw < n, "kernel too wide for the flat-interior check");
        let interior = &v[hw..n - hw];
        let lo = interior.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = interior.iter().cloned().fold(0.0f64, f64::max);
        assert!(hi - lo <= 1e-9 * hi, "interior variation {}", hi - lo);
    }

    #[test]
    fn running_cost_slope_is_uniformly_bounded_over_densities() {
        // F(., m) = f + V_delta has a slope bound independent of m: the
        // kernel slope is bounded by machine-checkable sampling.
        let g = grid(80);
        let n = g.num_nodes();
        let kernel = InteractionKernel::new(0.2, &g).unwrap();
        let p = test_problem(1).unwrap();
        let max_kernel_slope = kernel
            .weights()
            .windows(2)
            .map(|w| (w[1] - w[0]).abs() / g.rho())
            .fold(0.0, f64::max);
        // |f'| <= 10 (x - target) <= 10 on [0, 1]
        let bound = 10.0 + max_kernel_slope;

        let mut state = 1u64;
        for _ in 0..25 {
            let mut m: Vec<f64> = (0..n)
                .map(|_| {
                    state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
                    (state >> 11) as f64 / (1u64 << 53) as f64
                })
                .collect();
            let s: f64 = m.iter().sum();
            m.iter_mut().for_each(|x| *x /= s);
            let v = interaction_cost(&m, &kernel);
            for t in [0.0, 0.7, 1.9] {
                let f: Vec<f64> = (0..n)
                    .map(|i| (p.running_cost)(g.node(i), t) + v[i])
                    .collect();
                let slope = f
                    .windows(2)
                    .map(|w| (w[1] - w[0]).abs() / g.rho())
                    .fold(0.0, f64::max);
                assert!(slope <= bound + 1e-9, "slope {slope} above {bound}");
            }
        }
    }
}
