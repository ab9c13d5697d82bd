use std::f64::consts::PI;

use super::{ScalarField, VectorField};
use crate::error::{OitError, Result};

/// Bilinear weights and the four periodic neighbour indices for a point given
/// in fractional index coordinates.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Stencil {
    k00: usize,
    k01: usize,
    k10: usize,
    k11: usize,
    wx: f64,
    wy: f64,
}

impl Stencil {
    #[inline]
    pub(crate) fn new(nx: usize, ny: usize, fi: f64, fj: f64) -> Self {
        let fl_i = fi.floor();
        let fl_j = fj.floor();
        let wx = fi - fl_i;
        let wy = fj - fl_j;
        let i0 = (fl_i as i64).rem_euclid(nx as i64) as usize;
        let j0 = (fl_j as i64).rem_euclid(ny as i64) as usize;
        let i1 = if i0 + 1 == nx { 0 } else { i0 + 1 };
        let j1 = if j0 + 1 == ny { 0 } else { j0 + 1 };
        Self {
            k00: i0 * ny + j0,
            k01: i0 * ny + j1,
            k10: i1 * ny + j0,
            k11: i1 * ny + j1,
            wx,
            wy,
        }
    }

    #[inline]
    pub(crate) fn apply(&self, v: &[f64]) -> f64 {
        let low = (1.0 - self.wy) * v[self.k00] + self.wy * v[self.k01];
        let high = (1.0 - self.wy) * v[self.k10] + self.wy * v[self.k11];
        (1.0 - self.wx) * low + self.wx * high
    }
}

/// Interpolation order used when a field is read between nodes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Interpolation {
    /// Periodic bilinear; second order, monotone.
    #[default]
    Bilinear,
    /// Periodic Keys cubic convolution (Catmull–Rom, `a = −1/2`); third
    /// order, interpolating, not monotone.
    Cubic,
}

#[inline]
fn keys_weights(t: f64) -> [f64; 4] {
    const A: f64 = -0.5;
    let near = |x: f64| ((A + 2.0) * x - (A + 3.0)) * x * x + 1.0;
    let far = |x: f64| ((A * x - 5.0 * A) * x + 8.0 * A) * x - 4.0 * A;
    [far(1.0 + t), near(t), near(1.0 - t), far(2.0 - t)]
}

/// 4×4 periodic cubic-convolution stencil.
#[derive(Clone, Copy, Debug)]
pub(crate) struct CubicStencil {
    rows: [usize; 4],
    cols: [usize; 4],
    wx: [f64; 4],
    wy: [f64; 4],
}

impl CubicStencil {
    #[inline]
    pub(crate) fn new(nx: usize, ny: usize, fi: f64, fj: f64) -> Self {
        let fl_i = fi.floor();
        let fl_j = fj.floor();
        let i0 = fl_i as i64 - 1;
        let j0 = fl_j as i64 - 1;
        let mut rows = [0; 4];
        let mut cols = [0; 4];
        for m in 0..4 {
            rows[m] = (i0 + m as i64).rem_euclid(nx as i64) as usize * ny;
            cols[m] = (j0 + m as i64).rem_euclid(ny as i64) as usize;
        }
        Self {
            rows,
            cols,
            wx: keys_weights(fi - fl_i),
            wy: keys_weights(fj - fl_j),
        }
    }

    #[inline]
    pub(crate) fn apply(&self, v: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (r, wx) in self.rows.iter().zip(self.wx) {
            let row = self.cols.iter().zip(self.wy).fold(0.0, |s, (c, wy)| s + wy * v[r + c]);
            acc += wx * row;
        }
        acc
    }
}

impl ScalarField {
    /// Interpolation of the requested order at fractional index coordinates.
    #[inline]
    pub fn sample_index_with(&self, fi: f64, fj: f64, order: Interpolation) -> f64 {
        match order {
            Interpolation::Bilinear => self.sample_index(fi, fj),
            Interpolation::Cubic => CubicStencil::new(self.grid.nx(), self.grid.ny(), fi, fj).apply(&self.values),
        }
    }

    /// Periodic bilinear interpolation at fractional index coordinates
    /// `(fi, fj)`. Integer coordinates return the stored node value exactly.
    #[inline]
    pub fn sample_index(&self, fi: f64, fj: f64) -> f64 {
        Stencil::new(self.grid.nx(), self.grid.ny(), fi, fj).apply(&self.values)
    }

    /// Periodic bilinear interpolation at a world point (any real
    /// coordinates; wrapped internally).
    #[inline]
    pub fn sample(&self, p: [f64; 2]) -> f64 {
        let (fi, fj) = world_to_index(self.grid.hx(), self.grid.hy(), p);
        self.sample_index(fi, fj)
    }
}

impl VectorField {
    /// Interpolates both components with a shared stencil.
    #[inline]
    pub fn sample_index(&self, fi: f64, fj: f64) -> [f64; 2] {
        let g = self.grid();
        let s = Stencil::new(g.nx(), g.ny(), fi, fj);
        [s.apply(&self.x.values), s.apply(&self.y.values)]
    }

    #[inline]
    pub fn sample_index_with(&self, fi: f64, fj: f64, order: Interpolation) -> [f64; 2] {
        match order {
            Interpolation::Bilinear => self.sample_index(fi, fj),
            Interpolation::Cubic => {
                let g = self.grid();
                let s = CubicStencil::new(g.nx(), g.ny(), fi, fj);
                [s.apply(&self.x.values), s.apply(&self.y.values)]
            }
        }
    }

    #[inline]
    pub fn sample(&self, p: [f64; 2]) -> [f64; 2] {
        let g = self.grid();
        let (fi, fj) = world_to_index(g.hx(), g.hy(), p);
        self.sample_index(fi, fj)
    }
}

#[inline]
pub(crate) fn world_to_index(hx: f64, hy: f64, p: [f64; 2]) -> (f64, f64) {
    ((p[0] + PI) / hx, (p[1] + PI) / hy)
}

/// Evaluates the periodic bilinear interpolant of `field` at each point.
pub fn interp_scalar(field: &ScalarField, points: &[[f64; 2]]) -> Result<Vec<f64>> {
    if let Some(p) = points.iter().find(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return Err(OitError::InvalidInput(format!(
            "non-finite interpolation point ({}, {})",
            p[0], p[1]
        )));
    }
    Ok(points.iter().map(|&p| field.sample(p)).collect())
}
