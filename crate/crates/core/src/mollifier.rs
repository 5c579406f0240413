//! Space mollification of the discrete value function and extraction of the
//! drift by central finite differences.
//!
//! The kernel is a truncated Gaussian filter with standard deviation
//! `epsilon/2`, cut at four standard deviations and renormalized to unit
//! mass, so convolving a constant returns the constant exactly. The drift
//! fed into the push-forward scheme is the central-difference gradient of
//! the mollified value slices.

use ndarray::Array2;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::hjb::ValueField;

/// Discrete Gaussian filter on grid offsets.
#[derive(Debug, Clone)]
pub struct MollifierKernel {
    epsilon: f64,
    /// `2 * half_width + 1` symmetric nonnegative weights summing to 1.
    weights: Vec<f64>,
    half_width: usize,
}

impl MollifierKernel {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn half_width(&self) -> usize {
        self.half_width
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Second moment of the filter, `sum_j w_j (j rho)^2`; bounds the
    /// smoothing error of C2 inputs by `m2 * max|f''| / 2`.
    pub fn second_moment(&self, rho: f64) -> f64 {
        self.weights
            .iter()
            .enumerate()
            .map(|(idx, &w)| {
                let offset = (idx as isize - self.half_width as isize) as f64 * rho;
                w * offset * offset
            })
            .sum()
    }
}

/// Mollified-gradient table `Dv(x_i, t_k)` driving the push-forward flows.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftField {
    /// Row `k` holds the drift slice at time `t_k`.
    values: Array2<f64>,
}

impl DriftField {
    pub fn new(values: Array2<f64>) -> Self {
        DriftField { values }
    }

    pub fn slice(&self, k: usize) -> &[f64] {
        self.values.row(k).to_slice().expect("row-major drift")
    }

    pub fn at(&self, i: usize, k: usize) -> f64 {
        self.values[[k, i]]
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }
}

/// Builds the Gaussian filter for width `epsilon` on the given grid.
///
/// Requires `epsilon >= 2 rho` so the kernel is resolved by the lattice;
/// `half_width = ceil(4 * (epsilon/2) / rho)`.
pub fn build_kernel(epsilon: f64, grid: &Grid) -> Result<MollifierKernel> {
    let rho = grid.rho();
    if !epsilon.is_finite() || epsilon < 2.0 * rho {
        return Err(Error::MollifierUnderResolved {
            epsilon,
            min: 2.0 * rho,
        });
    }
    let sigma = 0.5 * epsilon;
    let half_width = (4.0 * sigma / rho).ceil() as usize;
    let mut half: Vec<f64> = (0..=half_width)
        .map(|j| {
            let x = j as f64 * rho;
            (-x * x / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total = half[0] + 2.0 * half[1..].iter().sum::<f64>();
    half.iter_mut().for_each(|w| *w /= total);
    // mirror so that w[-j] == w[j] bitwise
    let mut weights = vec![0.0; 2 * half_width + 1];
    for j in 0..=half_width {
        weights[half_width + j] = half[j];
        weights[half_width - j] = half[j];
    }
    Ok(MollifierKernel {
        epsilon,
        weights,
        half_width,
    })
}

/// Discrete convolution of one nodal slice with the filter; the boundary is
/// handled by edge-value extension, which preserves constants.
pub fn mollify_slice(values: &[f64], kernel: &MollifierKernel) -> Vec<f64> {
    let n = values.len();
    let hw = kernel.half_width as isize;
    (0..n as isize)
        .map(|i| {
            let mut acc = 0.0;
            for (idx, &w) in kernel.weights.iter().enumerate() {
                let j = idx as isize - hw;
                let src = (i + j).clamp(0, n as isize - 1) as usize;
                acc += w * values[src];
            }
            acc
        })
        .collect()
}

/// Central-difference gradient: `(v_{i+1} - v_{i-1}) / (2 rho)` in the
/// interior, one-sided differences at the endpoints.
pub fn gradient(values: &[f64], grid: &Grid) -> Vec<f64> {
    let n = values.len();
    let rho = grid.rho();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    out[0] = (values[1] - values[0]) / rho;
    out[n - 1] = (values[n - 1] - values[n - 2]) / rho;
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) / (2.0 * rho);
    }
    out
}

/// Mollifies every time slice of a value field and differentiates it,
/// producing the drift table. Slices are independent and processed in
/// parallel.
pub fn drift_field(v: &ValueField, kernel: &MollifierKernel, grid: &Grid) -> DriftField {
    let n = grid.num_nodes();
    let slices: Vec<Vec<f64>> = (0..=grid.num_steps())
        .into_par_iter()
        .map(|k| gradient(&mollify_slice(v.slice(k), kernel), grid))
        .collect();
    let mut values = Array2::zeros((grid.num_steps() + 1, n));
    for (k, slice) in slices.into_iter().enumerate() {
        values.row_mut(k).assign(&ndarray::ArrayView1::from(&slice));
    }
    DriftField { values }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(cells: usize, x_min: f64, x_max: f64) -> Grid {
        Grid::from_counts(x_min, x_max, cells, 1, 1.0).unwrap()
    }

    #[test]
    fn kernel_construction_contract() {
        let g = grid(40, 0.0, 1.0); // rho = 0.025
        let eps = 2.0 * g.rho();
        let k = build_kernel(eps, &g).unwrap();
        assert_eq!(k.half_width(), 4);
        let sum: f64 = k.weights().iter().sum();
        assert!((sum - 1.0).abs() < 1e-14);
        for j in 0..=k.half_width() {
            assert_eq!(
                k.weights()[k.half_width() + j],
                k.weights()[k.half_width() - j]
            );
        }
        assert!(build_kernel(1.9 * g.rho(), &g).is_err());
    }

    #[test]
    fn constants_and_affine_pass_through() {
        let g = grid(50, 0.0, 1.0);
        let k = build_kernel(0.1, &g).unwrap();
        let constant = vec![5.0; g.num_nodes()];
        let smoothed = mollify_slice(&constant, &k);
        for v in &smoothed {
            assert!((v - 5.0).abs() < 1e-14);
        }

        let ident = g.nodes();
        let smoothed = mollify_slice(&ident, &k);
        for i in k.half_width()..g.num_nodes() - k.half_width() {
            assert!(
                (smoothed[i] - ident[i]).abs() < 1e-12,
                "affine drift at interior node {i}"
            );
        }
    }

    #[test]
    fn kink_smoothing_stays_below_epsilon_and_matches_discrete_identity() {
        // v = |x - x_mid| with the kink on a node: the smoothed value at the
        // kink equals sum_j w_j |j rho| exactly, and the Gaussian first
        // absolute moment is below epsilon.
        let g = grid(200, 0.0, 2.0);
        let eps = 0.2;
        let k = build_kernel(eps, &g).unwrap();
        let mid = g.num_nodes() / 2;
        let x_mid = g.node(mid);
        let v: Vec<f64> = g.nodes().iter().map(|&x| (x - x_mid).abs()).collect();
        let smoothed = mollify_slice(&v, &k);

        let sup: f64 = v
            .iter()
            .zip(&smoothed)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(sup <= eps, "kink smoothing {sup} above epsilon {eps}");

        let discrete_abs_moment: f64 = k
            .weights()
            .iter()
            .enumerate()
            .map(|(idx, &w)| {
                let off = (idx as isize - k.half_width() as isize) as f64 * g.rho();
                w * off.abs()
            })
            .sum();
        assert!((smoothed[mid] - discrete_abs_moment).abs() < 1e-12);
        // continuous first absolute moment of the Gaussian is sigma*sqrt(2/pi)
        let sigma = 0.5 * eps;
        let continuous = sigma * (2.0 / std::f64::consts::PI).sqrt();
        assert!((discrete_abs_moment - continuous).abs() < 1e-3);
    }

    #[test]
    fn smooth_inputs_move_by_at_most_half_the_second_moment() {
        // |(K * f)(x) - f(x)| <= m2/2 * sup|f''| for f = sin, by symmetric
        // Taylor expansion with exact odd cancellation.
        let g = grid(300, 0.0, 3.0);
        let k = build_kernel(0.12, &g).unwrap();
        let v: Vec<f64> = g.nodes().iter().map(|&x| x.sin()).collect();
        let smoothed = mollify_slice(&v, &k);
        let bound = 0.5 * k.second_moment(g.rho()) + 1e-15;
        for i in k.half_width()..g.num_nodes() - k.half_width() {
            assert!((smoothed[i] - v[i]).abs() <= bound);
        }
    }

    #[test]
    fn gradient_exact_for_low_degree() {
        let g = grid(20, -1.0, 1.0);
        let constant = vec![3.0; g.num_nodes()];
        assert!(gradient(&constant, &g).iter().all(|&d| d == 0.0));

        let affine: Vec<f64> = g.nodes().iter().map(|&x| 2.5 * x - 1.0).collect();
        let d = gradient(&affine, &g);
        for i in 0..g.num_nodes() {
            assert!((d[i] - 2.5).abs() < 1e-13, "node {i}");
        }

        // central differences are exact for quadratics in the interior
        let quad: Vec<f64> = g.nodes().iter().map(|&x| x * x).collect();
        let d = gradient(&quad, &g);
        for i in 1..g.num_nodes() - 1 {
            assert!((d[i] - 2.0 * g.node(i)).abs() < 1e-13);
        }
    }

    #[test]
    fn mollified_gradient_never_exceeds_the_lipschitz_bound() {
        // filtering and central differencing cannot increase the discrete
        // Lipschitz constant.
        let g = grid(120, 0.0, 1.0);
        let k = build_kernel(0.08, &g).unwrap();
        let v: Vec<f64> = g
            .nodes()
            .iter()
            .map(|&x| (7.0 * x).sin() + 2.0 * (x - 0.4).abs())
            .collect();
        let lip = v
            .windows(2)
            .map(|w| (w[1] - w[0]).abs() / g.rho())
            .fold(0.0, f64::max);
        let d = gradient(&mollify_slice(&v, &k), &g);
        let max_d = d.iter().map(|x| x.abs()).fold(0.0, f64::max);
        assert!(max_d <= lip * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn second_derivative_scales_like_one_over_epsilon() {
        // on a kinked profile the curvature of the smoothed slice is
        // proportional to 1/epsilon; halving epsilon must leave the fitted
        // constant stable.
        let g = grid(800, 0.0, 2.0);
        let mid = g.num_nodes() / 2;
        let x_mid = g.node(mid);
        let v: Vec<f64> = g.nodes().iter().map(|&x| (x - x_mid).abs()).collect();
        let fitted: Vec<f64> = [0.2, 0.1]
            .iter()
            .map(|&eps| {
                let k = build_kernel(eps, &g).unwrap();
                let s = mollify_slice(&v, &k);
                let max_curv = (1..g.num_nodes() - 1)
                    .map(|i| ((s[i + 1] - 2.0 * s[i] + s[i - 1]) / (g.rho() * g.rho())).abs())
                    .fold(0.0, f64::max);
                max_curv * eps
            })
            .collect();
        let ratio = fitted[0] / fitted[1];
        assert!(
            (0.5..2.0).contains(&ratio),
            "fitted constants {fitted:?} not stable under halving"
        );
    }
}
