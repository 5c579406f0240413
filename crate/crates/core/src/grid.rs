//! Uniform 1D space-time grid with P1 (hat-function) barycentric interpolation
//! and per-cell integrals. Both the value-iteration and the push-forward
//! schemes are built on top of this module.
//!
//! The space grid is `x_i = x_min + i*rho` for `i = 0..num_nodes`, the time
//! grid is `t_k = k*h` for `k = 0..=num_steps` with `num_steps * h = t_final`.
//! Cell `E_i` is the interval `[x_i - rho/2, x_i + rho/2]`.

use crate::error::{Error, Result};

/// Relative slack accepted when checking the lattice identities
/// `x_min + (n-1)*rho = x_max` and `N*h = T` in floating point.
const LATTICE_TOL: f64 = 1e-12;

/// Uniform space-time lattice shared by every scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    rho: f64,
    num_nodes: usize,
    h: f64,
    num_steps: usize,
    t_final: f64,
}

/// Hat-function weights of a query point: the two nodes `left` and `left + 1`
/// carry all the mass, `w_left + w_right = 1` exactly by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarycentricWeights {
    pub left: usize,
    pub w_left: f64,
    pub w_right: f64,
}

impl Grid {
    /// Builds a grid from the number of space cells and time steps.
    ///
    /// `rho = (x_max - x_min) / num_cells`, `h = t_final / num_steps`, so the
    /// lattice identities hold to representable arithmetic.
    pub fn from_counts(
        x_min: f64,
        x_max: f64,
        num_cells: usize,
        num_steps: usize,
        t_final: f64,
    ) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite() && t_final.is_finite()) {
            return Err(Error::InvalidGrid("non-finite bounds".into()));
        }
        if x_max <= x_min {
            return Err(Error::InvalidGrid(format!(
                "x_max = {x_max} must exceed x_min = {x_min}"
            )));
        }
        if num_cells < 2 {
            return Err(Error::InvalidGrid("need at least 2 cells (3 nodes)".into()));
        }
        if num_steps < 1 {
            return Err(Error::InvalidGrid("need at least 1 time step".into()));
        }
        if t_final <= 0.0 {
            return Err(Error::InvalidGrid("horizon must be positive".into()));
        }
        let rho = (x_max - x_min) / num_cells as f64;
        let h = t_final / num_steps as f64;
        let grid = Grid {
            x_min,
            x_max,
            rho,
            num_nodes: num_cells + 1,
            h,
            num_steps,
            t_final,
        };
        grid.check_lattice()?;
        Ok(grid)
    }

    /// Builds a grid from target spacings. The counts are rounded to the
    /// nearest integers and the spacings recomputed, so `rho` and `h` may
    /// differ slightly from the requested values.
    pub fn from_spacing(x_min: f64, x_max: f64, rho: f64, h: f64, t_final: f64) -> Result<Self> {
        if !(rho.is_finite() && h.is_finite()) || rho <= 0.0 || h <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "spacings must be positive, got rho = {rho}, h = {h}"
            )));
        }
        let num_cells = ((x_max - x_min) / rho).round().max(2.0) as usize;
        let num_steps = (t_final / h).round().max(1.0) as usize;
        Self::from_counts(x_min, x_max, num_cells, num_steps, t_final)
    }

    fn check_lattice(&self) -> Result<()> {
        let span = self.x_max - self.x_min;
        let end = self.x_min + (self.num_nodes - 1) as f64 * self.rho;
        if (end - self.x_max).abs() > LATTICE_TOL * span.max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "nodes do not land on x_max: {end} vs {}",
                self.x_max
            )));
        }
        let t_end = self.num_steps as f64 * self.h;
        if (t_end - self.t_final).abs() > LATTICE_TOL * self.t_final.max(1.0) {
            return Err(Error::InvalidGrid(format!(
                "steps do not land on horizon: {t_end} vs {}",
                self.t_final
            )));
        }
        Ok(())
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    /// Coordinate of node `i`.
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.rho
    }

    /// Time of step `k`.
    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.h
    }

    /// All node coordinates.
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.num_nodes).map(|i| self.node(i)).collect()
    }

    /// Projects a point into `[x_min, x_max]`.
    #[inline]
    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.x_min, self.x_max)
    }

    /// Hat-function weights of `x`. Out-of-domain queries are clamped to the
    /// nearest endpoint; together with the flow clamp in the push-forward
    /// scheme this confines mass to the domain. `w_right` is computed as
    /// `(x - x_left)/rho` and `w_left` as its complement, so the pair sums to
    /// 1 exactly.
    #[inline]
    pub fn barycentric_weights(&self, x: f64) -> Result<BarycentricWeights> {
        if x.is_nan() {
            return Err(Error::NonFiniteInput("barycentric query is NaN".into()));
        }
        Ok(self.weights_unchecked(x))
    }

    /// Same as [`Grid::barycentric_weights`] without the NaN check; inner
    /// loops call this after validating their inputs once.
    #[inline]
    pub(crate) fn weights_unchecked(&self, x: f64) -> BarycentricWeights {
        let x = self.clamp(x);
        let offset = (x - self.x_min) / self.rho;
        let left = (offset.floor() as usize).min(self.num_nodes - 2);
        let w_right = ((x - self.node(left)) / self.rho).clamp(0.0, 1.0);
        BarycentricWeights {
            left,
            w_left: 1.0 - w_right,
            w_right,
        }
    }

    /// P1 interpolation of nodal values at `x`: exact at nodes and for affine
    /// data; out-of-domain queries clamp to the boundary value.
    #[inline]
    pub fn interpolate(&self, values: &[f64], x: f64) -> Result<f64> {
        if values.len() != self.num_nodes {
            return Err(Error::ShapeMismatch(format!(
                "{} nodal values on a {}-node grid",
                values.len(),
                self.num_nodes
            )));
        }
        let w = self.barycentric_weights(x)?;
        Ok(self.interpolate_weights(values, &w))
    }

    #[inline]
    pub(crate) fn interpolate_unchecked(&self, values: &[f64], x: f64) -> f64 {
        let w = self.weights_unchecked(x);
        self.interpolate_weights(values, &w)
    }

    #[inline]
    fn interpolate_weights(&self, values: &[f64], w: &BarycentricWeights) -> f64 {
        w.w_left * values[w.left] + w.w_right * values[w.left + 1]
    }

    /// Integral of `g` over cell `E_i = [x_i - rho/2, x_i + rho/2]`.
    ///
    /// Composite midpoint with one Richardson extrapolation step (midpoint at
    /// `quad_points` and `2*quad_points` subintervals), which keeps the
    /// evaluations interior to the cell while upgrading the error to
    /// O((rho/quad_points)^4).
    pub fn cell_integral<F>(&self, g: F, i: usize, quad_points: usize) -> Result<f64>
    where
        F: Fn(f64) -> f64,
    {
        if quad_points == 0 {
            return Err(Error::InvalidConfig("quad_points must be >= 1".into()));
        }
        if i >= self.num_nodes {
            return Err(Error::InvalidConfig(format!(
                "cell index {i} out of range (num_nodes = {})",
                self.num_nodes
            )));
        }
        let left = self.node(i) - 0.5 * self.rho;
        let coarse = midpoint_sum(&g, left, self.rho, quad_points)?;
        let fine = midpoint_sum(&g, left, self.rho, 2 * quad_points)?;
        Ok((4.0 * fine - coarse) / 3.0)
    }
}

fn midpoint_sum<F: Fn(f64) -> f64>(g: &F, left: f64, width: f64, n: usize) -> Result<f64> {
    let dx = width / n as f64;
    let mut acc = 0.0;
    for j in 0..n {
        let x = left + (j as f64 + 0.5) * dx;
        let v = g(x);
        if !v.is_finite() {
            return Err(Error::NonFiniteInput(format!(
                "integrand evaluated to {v} at x = {x}"
            )));
        }
        acc += v;
    }
    Ok(acc * dx)
}
