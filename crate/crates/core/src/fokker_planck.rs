//! Forward push-forward scheme for the population density, its continuous
//! reconstruction, and the Markov-chain sampler used to validate it.
//!
//! One step moves the mass of every node `j` along the pair of flows
//! `phi± = x_j - h * drift_j ± sqrt(h) * sigma_k` and scatters each half onto
//! the hat-function weights of its landing point:
//!
//! ```text
//! m_{i,k+1} = sum_j [beta_i(phi+_j) + beta_i(phi-_j)] / 2 * m_{j,k}
//! ```
//!
//! Because each scatter distributes exactly the source mass, the scheme is
//! conservative; flows are projected into the domain, which keeps the mass
//! confined without losing any.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::mollifier::DriftField;

/// Probability weights `m(x_i, t_k)` over nodes and time steps.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    /// Row `k` holds the weight slice at time `t_k`.
    values: Array2<f64>,
}

impl DensityField {
    pub fn new(values: Array2<f64>) -> Self {
        DensityField { values }
    }

    /// Initial fixed-point guess: the time-0 weights replicated on every
    /// step.
    pub fn constant_in_time(weights: &[f64], grid: &Grid) -> Self {
        let mut values = Array2::zeros((grid.num_steps() + 1, weights.len()));
        for k in 0..=grid.num_steps() {
            values
                .row_mut(k)
                .assign(&ndarray::ArrayView1::from(weights));
        }
        DensityField { values }
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        self.values.row(k).to_slice().expect("row-major weights")
    }

    pub fn at(&self, i: usize, k: usize) -> f64 {
        self.values[[k, i]]
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn num_slices(&self) -> usize {
        self.values.nrows()
    }

    /// Worst deviation of any slice total from unit mass.
    pub fn max_mass_deviation(&self) -> f64 {
        (0..self.values.nrows())
            .map(|k| (self.slice(k).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest cell density `m_{i,k} / rho` over the whole table.
    pub fn max_cell_density(&self, grid: &Grid) -> f64 {
        self.values.iter().fold(0.0f64, |a, &b| a.max(b)) / grid.rho()
    }
}

/// Landing points of the two flows started at one node, after projection
/// into the domain. Before projection `plus - minus = 2 sqrt(h) sigma_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowPair {
    pub plus: f64,
    pub minus: f64,
}

/// Flows of a whole slice plus the number of feet that hit the projection.
#[derive(Debug, Clone)]
pub struct FlowSlice {
    pub pairs: Vec<FlowPair>,
    pub clamped: usize,
}

/// Cell integrals of the initial density, renormalized to unit total mass.
pub fn initial_density<F>(m0: F, grid: &Grid) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64,
{
    let mut weights = Vec::with_capacity(grid.num_nodes());
    for i in 0..grid.num_nodes() {
        // extrapolated quadrature can undershoot zero by rounding on
        // near-singular bumps; the weights must stay nonnegative
        weights.push(grid.cell_integral(&m0, i, 16)?.max(0.0));
    }
    let total: f64 = weights.iter().sum();
    if total < 1e-6 {
        return Err(Error::UnsupportedInitialDensity { mass: total });
    }
    weights.iter_mut().for_each(|w| *w /= total);
    Ok(weights)
}

/// Flow pairs of one time step for the given drift slice.
pub fn flows(drift_slice: &[f64], sigma_k: f64, grid: &Grid) -> Result<FlowSlice> {
    if drift_slice.len() != grid.num_nodes() {
        return Err(Error::ShapeMismatch(format!(
            "drift slice of length {} on a {}-node grid",
            drift_slice.len(),
            grid.num_nodes()
        )));
    }
    if drift_slice.iter().any(|d| !d.is_finite()) || !sigma_k.is_finite() {
        return Err(Error::NonFiniteInput("drift or diffusion sample".into()));
    }
    let disp = grid.h().sqrt() * sigma_k;
    let mut clamped = 0;
    let pairs = (0..grid.num_nodes())
        .map(|i| {
            let base = grid.node(i) - grid.h() * drift_slice[i];
            let raw_plus = base + disp;
            let raw_minus = base - disp;
            let plus = grid.clamp(raw_plus);
            let minus = grid.clamp(raw_minus);
            clamped += usize::from(plus != raw_plus) + usize::from(minus != raw_minus);
            FlowPair { plus, minus }
        })
        .collect();
    Ok(FlowSlice { pairs, clamped })
}

/// One conservative transport step: scatters every node's mass onto the hat
/// weights of its two flow feet. Sequential deterministic accumulation.
pub fn push_forward(m: &[f64], flow_slice: &FlowSlice, grid: &Grid) -> Result<Vec<f64>> {
    let n = grid.num_nodes();
    if m.len() != n || flow_slice.pairs.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "weights {} / flows {} on a {}-node grid",
            m.len(),
            flow_slice.pairs.len(),
            n
        )));
    }
    let mut out = vec![0.0; n];
    for (j, pair) in flow_slice.pairs.iter().enumerate() {
        let mass = m[j];
        if mass == 0.0 {
            continue;
        }
        let half = 0.5 * mass;
        for foot in [pair.plus, pair.minus] {
            let w = grid.weights_unchecked(foot);
            out[w.left] += w.w_left * half;
            out[w.left + 1] += w.w_right * half;
        }
    }
    let in_sum: f64 = m.iter().sum();
    let out_sum: f64 = out.iter().sum();
    let drift = (out_sum - in_sum).abs();
    if drift > 1e-9 {
        return Err(Error::MassDrift { drift });
    }
    Ok(out)
}

/// Forward sweep from the initial weights along a drift table; returns the
/// density and the total number of projected flow feet.
pub fn solve_forward(
    initial: &[f64],
    drift: &DriftField,
    sigma: &[f64],
    grid: &Grid,
) -> Result<(DensityField, usize)> {
    let n = grid.num_nodes();
    let steps = grid.num_steps();
    if sigma.len() != steps {
        return Err(Error::ShapeMismatch(format!(
            "{} diffusion samples for {} steps",
            sigma.len(),
            steps
        )));
    }
    let mut values = Array2::zeros((steps + 1, n));
    values
        .row_mut(0)
        .assign(&ndarray::ArrayView1::from(initial));
    let mut clamped = 0;
    let mut current = initial.to_vec();
    for k in 0..steps {
        let slice = flows(drift.slice(k), sigma[k], grid)?;
        clamped += slice.clamped;
        current = push_forward(&current, &slice, grid)?;
        values
            .row_mut(k + 1)
            .assign(&ndarray::ArrayView1::from(&current));
    }
    Ok((DensityField { values }, clamped))
}

/// Sparse row of the per-step transition matrix: at most four destinations
/// (two flows times two hat weights).
#[derive(Debug, Clone)]
pub struct KernelRow {
    entries: Vec<(usize, f64)>,
}

impl KernelRow {
    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }
}

/// Markov-chain view of the scheme: initial law plus one row-stochastic
/// matrix per step; the chain's marginal at step `k` is the scheme density.
#[derive(Debug, Clone)]
pub struct TransitionKernel {
    initial: Vec<f64>,
    steps: Vec<Vec<KernelRow>>,
}

impl TransitionKernel {
    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn num_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn row(&self, k: usize, j: usize) -> &KernelRow {
        &self.steps[k][j]
    }
}

/// Builds the per-step sparse transition rows from a drift table.
pub fn build_transition_kernel(
    initial: &[f64],
    drift: &DriftField,
    sigma: &[f64],
    grid: &Grid,
) -> Result<TransitionKernel> {
    let total: f64 = initial.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::Unnormalized { sum: total });
    }
    let mut steps = Vec::with_capacity(grid.num_steps());
    for k in 0..grid.num_steps() {
        let slice = flows(drift.slice(k), sigma[k], grid)?;
        let mut rows = Vec::with_capacity(grid.num_nodes());
        for (j, pair) in slice.pairs.iter().enumerate() {
            let mut entries: Vec<(usize, f64)> = Vec::with_capacity(4);
            let mut push = |idx: usize, w: f64| {
                if w == 0.0 {
                    return;
                }
                match entries.iter_mut().find(|(i, _)| *i == idx) {
                    Some((_, acc)) => *acc += w,
                    None => entries.push((idx, w)),
                }
            };
            for foot in [pair.plus, pair.minus] {
                let w = grid.weights_unchecked(foot);
                push(w.left, 0.5 * w.w_left);
                push(w.left + 1, 0.5 * w.w_right);
            }
            let sum: f64 = entries.iter().map(|(_, w)| w).sum();
            if (sum - 1.0).abs() > 1e-12 {
                return Err(Error::NonStochasticRow {
                    step: k,
                    row: j,
                    sum,
                });
            }
            rows.push(KernelRow { entries });
        }
        steps.push(rows);
    }
    Ok(TransitionKernel {
        initial: initial.to_vec(),
        steps,
    })
}

/// Samples `num_samples` chain paths and returns the empirical node
/// occupancy per step. Sampling is inverse-CDF within each row with a
/// seeded counter-based generator, so the output is reproducible bit for
/// bit.
pub fn simulate_markov_chain(
    kernel: &TransitionKernel,
    num_samples: usize,
    seed: u64,
) -> Result<DensityField> {
    if num_samples == 0 {
        return Err(Error::InvalidConfig("num_samples must be >= 1".into()));
    }
    let n = kernel.initial.len();
    let steps = kernel.steps.len();
    let mut counts = vec![vec![0u64; n]; steps + 1];
    let mut initial_cdf = Vec::with_capacity(n);
    let mut acc = 0.0;
    for &w in &kernel.initial {
        acc += w;
        initial_cdf.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..num_samples {
        let u: f64 = rng.random();
        let mut node = initial_cdf.partition_point(|&c| c < u * acc);
        node = node.min(n - 1);
        counts[0][node] += 1;
        for (k, rows) in kernel.steps.iter().enumerate() {
            let u: f64 = rng.random();
            let mut cum = 0.0;
            let entries = rows[node].entries();
            let mut next = entries[entries.len() - 1].0;
            for &(idx, w) in entries {
                cum += w;
                if u < cum {
                    next = idx;
                    break;
                }
            }
            node = next;
            counts[k + 1][node] += 1;
        }
    }
    let mut values = Array2::zeros((steps + 1, n));
    for (k, row) in counts.iter().enumerate() {
        for (i, &c) in row.iter().enumerate() {
            values[[k, i]] = c as f64 / num_samples as f64;
        }
    }
    Ok(DensityField { values })
}

/// One-step sampler convenience: builds the kernel and simulates it.
pub fn simulate_scheme(
    initial: &[f64],
    drift: &DriftField,
    sigma: &[f64],
    grid: &Grid,
    num_samples: usize,
    seed: u64,
) -> Result<DensityField> {
    let kernel = build_transition_kernel(initial, drift, sigma, grid)?;
    simulate_markov_chain(&kernel, num_samples, seed)
}

/// Piecewise-constant-in-space, linear-in-time density reconstruction at a
/// fixed query time.
#[derive(Debug, Clone)]
pub struct ContinuousDensity {
    cell_density: Vec<f64>,
    x_min: f64,
    rho: f64,
}

impl ContinuousDensity {
    /// Density value at `x`: `m_i / rho` on cell `E_i`, zero outside the
    /// padded domain.
    pub fn density(&self, x: f64) -> f64 {
        let idx = ((x - self.x_min) / self.rho + 0.5).floor();
        if idx < 0.0 || idx >= self.cell_density.len() as f64 {
            return 0.0;
        }
        self.cell_density[idx as usize]
    }

    pub fn cell_density(&self) -> &[f64] {
        &self.cell_density
    }

    pub fn total_mass(&self) -> f64 {
        self.cell_density.iter().sum::<f64>() * self.rho
    }
}

/// Evaluates the reconstruction of a density table at time `t` in `[0, T]`:
/// the two neighboring slices blended linearly.
pub fn reconstruct_continuous(m: &DensityField, grid: &Grid, t: f64) -> Result<ContinuousDensity> {
    if !(0.0..=grid.t_final()).contains(&t) {
        return Err(Error::TimeOutOfRange {
            t,
            t_final: grid.t_final(),
        });
    }
    let k = ((t / grid.h()).floor() as usize).min(grid.num_steps() - 1);
    let theta = ((t - grid.time(k)) / grid.h()).clamp(0.0, 1.0);
    let (a, b) = (m.slice(k), m.slice(k + 1));
    let cell_density = (0..grid.num_nodes())
        .map(|i| ((1.0 - theta) * a[i] + theta * b[i]) / grid.rho())
        .collect();
    Ok(ContinuousDensity {
        cell_density,
        x_min: grid.x_min(),
        rho: grid.rho(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(cells: usize, steps: usize, t_final: f64) -> Grid {
        Grid::from_counts(0.0, 1.0, cells, steps, t_final).unwrap()
    }

    fn zero_drift(grid: &Grid) -> DriftField {
        DriftField::new(Array2::zeros((grid.num_steps() + 1, grid.num_nodes())))
    }

    #[test]
    fn initial_density_of_aligned_uniform_block() {
        // uniform density on [0.25, 0.65], which is the union of cells 3..=6
        // on this grid: equal weights there, zero elsewhere
        let g = grid(10, 1, 1.0);
        let w = initial_density(|x| f64::from((0.25..0.65).contains(&x)), &g).unwrap();
        for (i, &wi) in w.iter().enumerate() {
            let expected = if (3..=6).contains(&i) { 0.25 } else { 0.0 };
            assert!((wi - expected).abs() < 1e-12, "node {i}: {wi}");
        }
    }

    #[test]
    fn initial_density_of_reference_bump_is_symmetric() {
        let p = crate::problem::test_problem(1).unwrap();
        let g = grid(160, 1, 1.0);
        let w = initial_density(p.initial_density.as_ref(), &g).unwrap();
        let n = g.num_nodes();
        for i in 0..n / 2 {
            assert!(
                (w[i] - w[n - 1 - i]).abs() <= 1e-10,
                "asymmetry at node {i}"
            );
        }
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn initial_density_of_single_cell_spike() {
        let g = grid(10, 1, 1.0);
        let center = g.node(4);
        let w = initial_density(|x| f64::from((x - center).abs() < 0.2 * g.rho()), &g).unwrap();
        assert_eq!(w[4], 1.0);
        assert!(w.iter().sum::<f64>() == 1.0);
    }

    #[test]
    fn initial_density_outside_domain_is_rejected() {
        let g = grid(10, 1, 1.0);
        let err = initial_density(|x| f64::from(x > 5.0), &g).unwrap_err();
        assert!(matches!(err, Error::UnsupportedInitialDensity { .. }));
    }

    #[test]
    fn flows_match_hand_values() {
        // identity flows
        let g = grid(10, 1, 1.0);
        let d = vec![0.0; g.num_nodes()];
        let fs = flows(&d, 0.0, &g).unwrap();
        for (i, p) in fs.pairs.iter().enumerate() {
            assert_eq!(p.plus, g.node(i));
            assert_eq!(p.minus, g.node(i));
        }
        assert_eq!(fs.clamped, 0);

        // sqrt(h) * sigma = 0.1 * 0.2 = 0.02 in the interior
        let g = grid(100, 100, 1.0); // h = 0.01
        let d = vec![0.0; g.num_nodes()];
        let fs = flows(&d, 0.2, &g).unwrap();
        let i = 50;
        assert!((fs.pairs[i].plus - (g.node(i) + 0.02)).abs() < 1e-15);
        assert!((fs.pairs[i].minus - (g.node(i) - 0.02)).abs() < 1e-15);

        // unit drift with h = rho shifts exactly one cell left
        let g = grid(16, 16, 1.0); // rho = h = 1/16, dyadic
        let d = vec![1.0; g.num_nodes()];
        let fs = flows(&d, 0.0, &g).unwrap();
        for i in 1..g.num_nodes() {
            assert_eq!(fs.pairs[i].plus, g.node(i - 1));
            assert_eq!(fs.pairs[i].minus, g.node(i - 1));
        }

        assert!(flows(&vec![f64::NAN; g.num_nodes()], 0.0, &g).is_err());
    }

    #[test]
    fn push_forward_identity_and_half_cell_split() {
        let g = grid(10, 1, 1.0);
        let mut m = vec![0.0; g.num_nodes()];
        m[6] = 1.0;
        let d = vec![0.0; g.num_nodes()];
        let out = push_forward(&m, &flows(&d, 0.0, &g).unwrap(), &g).unwrap();
        assert_eq!(out, m);

        // sqrt(h) sigma = rho / 2 splits a point mass into (1/4, 1/2, 1/4);
        // dyadic spacings keep the arithmetic exact
        let g = grid(8, 4, 1.0); // rho = 0.125, h = 0.25
        let sigma = 0.125; // sqrt(0.25) * 0.125 = rho / 2
        let mut m = vec![0.0; g.num_nodes()];
        m[4] = 1.0;
        let d = vec![0.0; g.num_nodes()];
        let out = push_forward(&m, &flows(&d, sigma, &g).unwrap(), &g).unwrap();
        assert_eq!(out[3], 0.25);
        assert_eq!(out[4], 0.5);
        assert_eq!(out[5], 0.25);
        assert!((out.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn push_forward_matches_dense_kernel_product() {
        // independent oracle: dense transition matrices assembled from the
        // raw hat-function formula, applied by full matrix-vector products
        let g = grid(19, 5, 0.05);
        let n = g.num_nodes();
        let hat = |i: usize, y: f64| -> f64 { (1.0 - (y - g.node(i)).abs() / g.rho()).max(0.0) };

        let mut state = 123456789u64;
        let mut rnd = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut m: Vec<f64> = (0..n).map(|_| rnd() + 0.05).collect();
        let total: f64 = m.iter().sum();
        m.iter_mut().for_each(|w| *w /= total);

        let drift_rows: Vec<Vec<f64>> = (0..=g.num_steps())
            .map(|k| {
                (0..n)
                    .map(|i| (3.0 * g.node(i) + 0.7 * k as f64).sin())
                    .collect()
            })
            .collect();
        let mut drift_arr = Array2::zeros((g.num_steps() + 1, n));
        for (k, row) in drift_rows.iter().enumerate() {
            drift_arr.row_mut(k).assign(&ndarray::ArrayView1::from(row));
        }
        let drift = DriftField::new(drift_arr);
        let sigma = vec![0.3; g.num_steps()];

        let (density, _) = solve_forward(&m, &drift, &sigma, &g).unwrap();

        let mut dense_m = m.clone();
        for k in 0..g.num_steps() {
            let fs = flows(drift.slice(k), sigma[k], &g).unwrap();
            let mut next = vec![0.0; n];
            for i in 0..n {
                for (j, pair) in fs.pairs.iter().enumerate() {
                    let p = 0.5 * (hat(i, pair.plus) + hat(i, pair.minus));
                    next[i] += p * dense_m[j];
                }
            }
            dense_m = next;
            for i in 0..n {
                assert!(
                    (density.at(i, k + 1) - dense_m[i]).abs() <= 1e-13,
                    "mismatch at node {i}, step {}",
                    k + 1
                );
            }
        }
    }

    #[test]
    fn kernel_rows_are_sparse_and_stochastic() {
        let g = grid(25, 8, 0.08);
        let n = g.num_nodes();
        let m0 = initial_density(|x| (-(x - 0.5) * (x - 0.5) / 0.01).exp(), &g).unwrap();
        let drift = DriftField::new(Array2::from_shape_fn((g.num_steps() + 1, n), |(k, i)| {
            (2.0 * g.node(i) - 0.1 * k as f64).cos()
        }));
        let sigma = vec![0.25; g.num_steps()];
        let kernel = build_transition_kernel(&m0, &drift, &sigma, &g).unwrap();
        for k in 0..kernel.num_steps() {
            for j in 0..n {
                let row = kernel.row(k, j);
                assert!(row.entries().len() <= 4);
                let sum: f64 = row.entries().iter().map(|(_, w)| w).sum();
                assert!((sum - 1.0).abs() <= 1e-12);
                assert!(row.entries().iter().all(|&(_, w)| (0.0..=1.0).contains(&w)));
            }
        }
    }

    #[test]
    fn deterministic_chain_stays_put_and_reruns_identically() {
        let g = grid(12, 6, 0.06);
        let n = g.num_nodes();
        let mut m0 = vec![0.0; n];
        m0[7] = 1.0;
        let drift = zero_drift(&g);
        let sigma = vec![0.0; g.num_steps()];
        let emp = simulate_scheme(&m0, &drift, &sigma, &g, 500, 99).unwrap();
        for k in 0..=g.num_steps() {
            assert_eq!(emp.at(7, k), 1.0, "mass moved at step {k}");
        }
        let again = simulate_scheme(&m0, &drift, &sigma, &g, 500, 99).unwrap();
        assert_eq!(emp.values(), again.values());
    }

    #[test]
    fn reconstruction_blends_and_conserves() {
        let g = grid(20, 10, 1.0);
        let n = g.num_nodes();
        let mut values = Array2::zeros((g.num_steps() + 1, n));
        for k in 0..=g.num_steps() {
            // a moving point mass
            values[[k, (k + 3).min(n - 1)]] = 1.0;
        }
        let m = DensityField::new(values);

        // exactly at a step time
        let r = reconstruct_continuous(&m, &g, g.time(4)).unwrap();
        assert_eq!(r.density(g.node(7)), 1.0 / g.rho());

        // halfway between steps: equal blend
        let t = 0.5 * (g.time(4) + g.time(5));
        let r = reconstruct_continuous(&m, &g, t).unwrap();
        assert!((r.density(g.node(7)) - 0.5 / g.rho()).abs() < 1e-12);
        assert!((r.density(g.node(8)) - 0.5 / g.rho()).abs() < 1e-12);

        // unit mass at arbitrary times
        for q in 0..100 {
            let t = q as f64 / 99.0;
            let r = reconstruct_continuous(&m, &g, t).unwrap();
            assert!((r.total_mass() - 1.0).abs() < 1e-12);
        }

        assert!(reconstruct_continuous(&m, &g, -0.1).is_err());
        assert!(reconstruct_continuous(&m, &g, 1.1).is_err());
    }

    #[test]
    fn node_comb_is_close_to_cell_reconstruction() {
        // spreading each node mass uniformly over its cell moves it by at
        // most rho/2 in transport distance
        let g = grid(30, 1, 1.0);
        let n = g.num_nodes();
        let m0 = initial_density(|x| (-(x - 0.4) * (x - 0.4) / 0.02).exp(), &g).unwrap();
        let comb: Vec<(f64, f64)> = (0..n).map(|i| (g.node(i), m0[i])).collect();
        let sub = 16usize;
        let mut cells = Vec::with_capacity(n * sub);
        for i in 0..n {
            for l in 0..sub {
                let x = g.node(i) - 0.5 * g.rho() + (l as f64 + 0.5) * g.rho() / sub as f64;
                cells.push((x, m0[i] / sub as f64));
            }
        }
        let d = crate::metrics::wasserstein1_point_masses(&comb, &cells).unwrap();
        assert!(
            d <= 0.5 * g.rho(),
            "d1 = {d} above rho/2 = {}",
            0.5 * g.rho()
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn transport_conserves_mass_and_nonnegativity(
            seed in 0u64..1000,
            sigma in 0.0f64..0.6,
            scale in -4.0f64..4.0,
        ) {
            let g = grid(21, 7, 0.07);
            let n = g.num_nodes();
            let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
            let mut rnd = move || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64
            };
            let mut m: Vec<f64> = (0..n).map(|_| rnd()).collect();
            let total: f64 = m.iter().sum();
            m.iter_mut().for_each(|w| *w /= total);
            let drift: Vec<f64> = (0..n).map(|i| scale * (5.0 * g.node(i)).sin()).collect();
            let fs = flows(&drift, sigma, &g).unwrap();
            let out = push_forward(&m, &fs, &g).unwrap();
            prop_assert!(out.iter().all(|&w| w >= 0.0));
            prop_assert!((out.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }
}
