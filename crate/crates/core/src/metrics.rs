//! Distances and norms used by the scheme estimates and the fixed-point
//! stopping rule: exact 1D Wasserstein-1, sup norms, second moments.

use ndarray::ArrayView2;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Sup-norm changes of the value and density iterates at one fixed-point
/// iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub iteration: usize,
    /// `max |v^p - v^{p-1}|`; infinite on the first iteration, which has no
    /// predecessor value field.
    pub e_v: f64,
    /// `max |m^p - m^{p-1}|` on the dimensionless weights.
    pub e_m: f64,
}

const MASS_TOL: f64 = 1e-9;

/// Exact Wasserstein-1 distance between two probability vectors supported on
/// the nodes of the same grid: the L1 distance between their CDFs,
/// `rho * sum_i |CDF_mu(i) - CDF_nu(i)|`.
pub fn wasserstein1_1d(mu: &[f64], nu: &[f64], grid: &Grid) -> Result<f64> {
    if mu.len() != grid.num_nodes() || nu.len() != grid.num_nodes() {
        return Err(Error::ShapeMismatch(format!(
            "weights of length {} and {} on a {}-node grid",
            mu.len(),
            nu.len(),
            grid.num_nodes()
        )));
    }
    for m in [mu, nu] {
        let sum: f64 = m.iter().sum();
        if (sum - 1.0).abs() > MASS_TOL {
            return Err(Error::Unnormalized { sum });
        }
    }
    let mut cdf_gap = 0.0;
    let mut acc = 0.0;
    for i in 0..grid.num_nodes() - 1 {
        cdf_gap += mu[i] - nu[i];
        acc += cdf_gap.abs();
    }
    Ok(acc * grid.rho())
}

/// Wasserstein-1 distance between two discrete measures given as
/// `(position, mass)` atoms with equal total mass. Used to compare measures
/// living on different supports, e.g. a node comb against a sub-sampled cell
/// reconstruction.
pub fn wasserstein1_point_masses(mu: &[(f64, f64)], nu: &[(f64, f64)]) -> Result<f64> {
    let total = |m: &[(f64, f64)]| m.iter().map(|&(_, w)| w).sum::<f64>();
    let (tm, tn) = (total(mu), total(nu));
    if (tm - tn).abs() > MASS_TOL {
        return Err(Error::ShapeMismatch(format!(
            "total masses differ: {tm} vs {tn}"
        )));
    }
    // signed atoms sorted by position; the integral of |CDF| between
    // consecutive positions is exact for atomic measures
    let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(mu.len() + nu.len());
    atoms.extend(mu.iter().copied());
    atoms.extend(nu.iter().map(|&(x, w)| (x, -w)));
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut acc = 0.0;
    let mut cdf = 0.0;
    for pair in atoms.windows(2) {
        cdf += pair[0].1;
        acc += cdf.abs() * (pair[1].0 - pair[0].0);
    }
    Ok(acc)
}

/// `max |a - b|` over two equally shaped arrays.
pub fn sup_norm_diff(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::ShapeMismatch(format!(
            "{:?} vs {:?}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Second moment of a node-mass vector: `sum_i m_i * x_i^2`. The
/// cell-average reconstruction would add `rho^2/12` per unit mass; callers
/// comparing against continuous bounds account for that separately.
pub fn second_moment(m: &[f64], grid: &Grid) -> f64 {
    m.iter()
        .enumerate()
        .map(|(i, &w)| {
            let x = grid.node(i);
            w * x * x
        })
        .sum()
}
