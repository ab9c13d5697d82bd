//! Uniform periodic grids on `[-π, π)²` and the fields that live on them.
//!
//! Storage is row-major with the x index slow: `values[i * n_y + j]` is the
//! sample at node `(-π + i·h_x, -π + j·h_y)`.

mod interp;
mod spectral;
mod warp;

use std::f64::consts::{PI, TAU};
use std::fmt;

use crate::error::{OitError, Result};

pub use interp::{interp_scalar, Interpolation};
pub use spectral::{gradient_spectral, Spectral2d};
pub use warp::{compose, compose_with, jacobian_det, DiffeoMap};
pub(crate) use warp::sample_displaced;

/// Smallest supported number of nodes per axis.
pub const MIN_NODES: usize = 4;

/// Uniform `n_x × n_y` discretization of the torus `[-π, π)²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PeriodicGrid {
    nx: usize,
    ny: usize,
}

impl PeriodicGrid {
    pub fn new(nx: usize, ny: usize) -> Result<Self> {
        if nx < MIN_NODES || ny < MIN_NODES {
            return Err(OitError::InvalidInput(format!(
                "grid must have at least {MIN_NODES} nodes per axis, got {nx}x{ny}"
            )));
        }
        if nx > u32::MAX as usize || ny > u32::MAX as usize {
            return Err(OitError::InvalidInput(format!("grid {nx}x{ny} too large")));
        }
        Ok(Self { nx, ny })
    }

    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n)
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.nx
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn hx(&self) -> f64 {
        TAU / self.nx as f64
    }

    #[inline]
    pub fn hy(&self) -> f64 {
        TAU / self.ny as f64
    }

    /// Largest of the two spacings.
    #[inline]
    pub fn h(&self) -> f64 {
        self.hx().max(self.hy())
    }

    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.hx() * self.hy()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    /// Coordinates of node `(i, j)`.
    #[inline]
    pub fn node(&self, i: usize, j: usize) -> [f64; 2] {
        [-PI + i as f64 * self.hx(), -PI + j as f64 * self.hy()]
    }

    pub(crate) fn ensure_same(&self, other: &PeriodicGrid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(OitError::GridMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }
}

impl fmt::Display for PeriodicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.nx, self.ny)
    }
}

/// Wraps a coordinate into `[-π, π)`. Values already in range are returned
/// unchanged.
#[inline]
pub fn wrap(x: f64) -> f64 {
    if (-PI..PI).contains(&x) {
        return x;
    }
    let mut r = if (PI..3.0 * PI).contains(&x) {
        x - TAU
    } else if (-3.0 * PI..-PI).contains(&x) {
        x + TAU
    } else {
        (x + PI).rem_euclid(TAU) - PI
    };
    // rounding can land exactly on the excluded right edge
    if r >= PI {
        r -= TAU;
    }
    if r < -PI {
        r = -PI;
    }
    r
}

/// Shortest distance between two points on the torus.
pub fn torus_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = wrap(a[0] - b[0]);
    let dy = wrap(a[1] - b[1]);
    dx.hypot(dy)
}

/// A periodic function sampled at the nodes of a [`PeriodicGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: PeriodicGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: PeriodicGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(OitError::InvalidInput(format!(
                "field has {} values, grid {grid} needs {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(OitError::InvalidInput(format!(
                "non-finite field value {} at index {k}",
                values[k]
            )));
        }
        Ok(Self { grid, values })
    }

    /// Builds a field without the finiteness scan. Callers guarantee the
    /// length matches.
    pub(crate) fn from_vec_unchecked(grid: PeriodicGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: PeriodicGrid, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..grid.nx() {
            for j in 0..grid.ny() {
                let [x, y] = grid.node(i, j);
                values.push(f(x, y));
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    /// Value at `(i, j)` with both indices taken modulo the grid size.
    #[inline]
    pub fn at_wrapped(&self, i: isize, j: isize) -> f64 {
        let i = i.rem_euclid(self.grid.nx() as isize) as usize;
        let j = j.rem_euclid(self.grid.ny() as isize) as usize;
        self.at(i, j)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Riemann sum `Σ value · cell_volume`, equal to the trapezoid rule on a
    /// periodic uniform grid.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// A pair of scalar fields on one grid, e.g. a velocity or a displacement.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    pub(crate) x: ScalarField,
    pub(crate) y: ScalarField,
}

impl VectorField {
    pub fn new(x: ScalarField, y: ScalarField) -> Result<Self> {
        x.grid.ensure_same(&y.grid)?;
        Ok(Self { x, y })
    }

    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self {
            x: ScalarField::zeros(grid),
            y: ScalarField::zeros(grid),
        }
    }

    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let x = ScalarField::from_fn(grid, |a, b| f(a, b)[0]);
        let y = ScalarField::from_fn(grid, |a, b| f(a, b)[1]);
        Self { x, y }
    }

    #[inline]
    pub fn grid(&self) -> &PeriodicGrid {
        self.x.grid()
    }

    #[inline]
    pub fn x(&self) -> &ScalarField {
        &self.x
    }

    #[inline]
    pub fn y(&self) -> &ScalarField {
        &self.y
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> [f64; 2] {
        let k = self.grid().index(i, j);
        [self.x.values[k], self.y.values[k]]
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            x: self.x.map(|v| s * v),
            y: self.y.map(|v| s * v),
        }
    }

    /// Largest Euclidean norm over the nodes.
    pub fn max_norm(&self) -> f64 {
        self.x
            .values
            .iter()
            .zip(&self.y.values)
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }

    pub fn max_abs_diff(&self, other: &VectorField) -> f64 {
        self.x.max_abs_diff(&other.x).max(self.y.max_abs_diff(&other.y))
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_tiny_axes() {
        assert!(PeriodicGrid::new(3, 8).is_err());
        assert!(PeriodicGrid::new(8, 2).is_err());
        assert!(PeriodicGrid::new(4, 4).is_ok());
    }

    #[test]
    fn total_volume_is_four_pi_squared() {
        for (nx, ny) in [(4, 4), (64, 32), (256, 256), (100, 7)] {
            let g = PeriodicGrid::new(nx, ny).unwrap();
            let vol = (nx * ny) as f64 * g.cell_volume();
            let exact = 4.0 * PI * PI;
            assert!(((vol - exact) / exact).abs() <= 1e-12, "{nx}x{ny}: {vol}");
        }
    }

    #[test]
    fn wrap_is_identity_in_range_and_half_open() {
        for x in [-PI, -1.0, 0.0, 0.5, PI - 1e-12] {
            assert_eq!(wrap(x), x);
        }
        assert_eq!(wrap(PI), -PI);
        assert!((wrap(PI / 2.0 + PI) + PI / 2.0).abs() < 1e-15);
        assert!((wrap(7.0 * TAU + 0.25) - 0.25).abs() < 1e-12);
        assert!((wrap(-5.0 * TAU - 0.25) + 0.25).abs() < 1e-12);
        // an input just below -π must not round onto +π
        let w = wrap(-PI - 1e-17);
        assert!((-PI..PI).contains(&w));
    }

    #[test]
    fn non_finite_field_rejected() {
        let g = PeriodicGrid::square(4).unwrap();
        let mut v = vec![0.0; 16];
        v[5] = f64::NAN;
        assert!(ScalarField::new(g, v).is_err());
        assert!(ScalarField::new(g, vec![0.0; 15]).is_err());
    }

    #[test]
    fn torus_distance_uses_shortest_path() {
        let d = torus_distance([-PI + 0.1, 0.0], [PI - 0.1, 0.0]);
        assert!((d - 0.2).abs() < 1e-12);
    }
}
