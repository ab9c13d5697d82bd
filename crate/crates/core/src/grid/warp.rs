use std::f64::consts::TAU;

use rayon::prelude::*;

use super::interp::{world_to_index, Interpolation};
use super::{torus_distance, wrap, PeriodicGrid, ScalarField, VectorField};
use crate::error::{OitError, Result};

/// A diffeomorphism of the torus stored as `x ↦ wrap(x + d(x))` with a
/// periodic displacement `d`, optionally carrying its inverse in the same
/// form.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffeoMap {
    grid: PeriodicGrid,
    disp: VectorField,
    inv_disp: Option<VectorField>,
}

fn check_displacement(d: &VectorField, what: &str) -> Result<()> {
    for (c, comp) in [d.x(), d.y()].into_iter().enumerate() {
        if let Some(k) = comp.values().iter().position(|v| !v.is_finite() || v.abs() > TAU) {
            return Err(OitError::InvalidInput(format!(
                "{what} component {c} at index {k} is {} (must be finite, |d| <= 2π)",
                comp.values()[k]
            )));
        }
    }
    Ok(())
}

impl DiffeoMap {
    pub fn identity(grid: PeriodicGrid) -> Self {
        Self {
            grid,
            disp: VectorField::zeros(grid),
            inv_disp: Some(VectorField::zeros(grid)),
        }
    }

    pub fn new(disp: VectorField, inv_disp: Option<VectorField>) -> Result<Self> {
        let grid = *disp.grid();
        check_displacement(&disp, "displacement")?;
        if let Some(inv) = &inv_disp {
            grid.ensure_same(inv.grid())?;
            check_displacement(inv, "inverse displacement")?;
        }
        Ok(Self { grid, disp, inv_disp })
    }

    /// Constant translation by `t`, with its exact inverse.
    pub fn translation(grid: PeriodicGrid, t: [f64; 2]) -> Result<Self> {
        let fwd = VectorField::from_fn(grid, |_, _| t);
        let inv = VectorField::from_fn(grid, |_, _| [-t[0], -t[1]]);
        Self::new(fwd, Some(inv))
    }

    pub(crate) fn from_parts_unchecked(disp: VectorField, inv_disp: Option<VectorField>) -> Self {
        Self {
            grid: *disp.grid(),
            disp,
            inv_disp,
        }
    }

    #[inline]
    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    #[inline]
    pub fn displacement(&self) -> &VectorField {
        &self.disp
    }

    #[inline]
    pub fn inverse_displacement(&self) -> Option<&VectorField> {
        self.inv_disp.as_ref()
    }

    /// The inverse as a map of its own, if present.
    pub fn inverse(&self) -> Option<DiffeoMap> {
        self.inv_disp.as_ref().map(|inv| DiffeoMap {
            grid: self.grid,
            disp: inv.clone(),
            inv_disp: Some(self.disp.clone()),
        })
    }

    pub fn without_inverse(mut self) -> Self {
        self.inv_disp = None;
        self
    }

    /// Evaluates the map at any point, result wrapped into `[-π, π)²`.
    #[inline]
    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let (fi, fj) = world_to_index(self.grid.hx(), self.grid.hy(), p);
        let d = self.disp.sample_index(fi, fj);
        [wrap(p[0] + d[0]), wrap(p[1] + d[1])]
    }

    /// Image of node `(i, j)`, unwrapped (node coordinate plus displacement).
    #[inline]
    pub fn node_image(&self, i: usize, j: usize) -> [f64; 2] {
        let [x, y] = self.grid.node(i, j);
        let d = self.disp.at(i, j);
        [x + d[0], y + d[1]]
    }

    /// Largest torus distance `|φ⁻¹(φ(x)) − x|` over the nodes. `None` when no
    /// inverse is stored.
    pub fn roundtrip_error(&self) -> Option<f64> {
        let inv = self.inv_disp.as_ref()?;
        let g = self.grid;
        let (hx, hy) = (g.hx(), g.hy());
        let err = (0..g.len())
            .into_par_iter()
            .map(|k| {
                let (i, j) = (k / g.ny(), k % g.ny());
                let d = self.disp.at(i, j);
                let fi = i as f64 + d[0] / hx;
                let fj = j as f64 + d[1] / hy;
                let e = inv.sample_index(fi, fj);
                let x = g.node(i, j);
                let back = [x[0] + d[0] + e[0], x[1] + d[1] + e[1]];
                torus_distance(back, x)
            })
            .reduce(|| 0.0, f64::max);
        Some(err)
    }

    pub fn is_identity(&self) -> bool {
        self.disp.x().values().iter().all(|&v| v == 0.0)
            && self.disp.y().values().iter().all(|&v| v == 0.0)
    }
}

/// Jacobian determinant of `x ↦ x + d(x)` with `Dd` from periodic centered
/// differences.
pub fn jacobian_det(map: &DiffeoMap) -> ScalarField {
    let g = *map.grid();
    let (nx, ny) = (g.nx(), g.ny());
    let (ix2, iy2) = (0.5 / g.hx(), 0.5 / g.hy());
    let dx = map.disp.x().values();
    let dy = map.disp.y().values();
    let vals: Vec<f64> = (0..g.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / ny, k % ny);
            let ip = if i + 1 == nx { 0 } else { i + 1 };
            let im = if i == 0 { nx - 1 } else { i - 1 };
            let jp = if j + 1 == ny { 0 } else { j + 1 };
            let jm = if j == 0 { ny - 1 } else { j - 1 };
            let a = 1.0 + (dx[ip * ny + j] - dx[im * ny + j]) * ix2;
            let b = (dx[i * ny + jp] - dx[i * ny + jm]) * iy2;
            let c = (dy[ip * ny + j] - dy[im * ny + j]) * ix2;
            let d = 1.0 + (dy[i * ny + jp] - dy[i * ny + jm]) * iy2;
            a * d - b * c
        })
        .collect();
    ScalarField::from_vec_unchecked(g, vals)
}

/// `field(x + w(x))` at every node.
pub(crate) fn sample_displaced(field: &VectorField, w: &VectorField, order: Interpolation) -> VectorField {
    let g = *w.grid();
    let (ny, hx, hy) = (g.ny(), g.hx(), g.hy());
    let (wx, wy) = (w.x().values(), w.y().values());
    let (vx, vy): (Vec<f64>, Vec<f64>) = (0..g.len())
        .into_par_iter()
        .map(|k| {
            let v = field.sample_index_with((k / ny) as f64 + wx[k] / hx, (k % ny) as f64 + wy[k] / hy, order);
            (v[0], v[1])
        })
        .unzip();
    VectorField {
        x: ScalarField::from_vec_unchecked(g, vx),
        y: ScalarField::from_vec_unchecked(g, vy),
    }
}

/// `d(x) = d_inner(x) + d_outer(x + d_inner(x))`, evaluated at every node.
fn composed_displacement(outer: &VectorField, inner: &VectorField, order: Interpolation) -> VectorField {
    let mut d = sample_displaced(outer, inner, order);
    for (a, b) in d.x.values.iter_mut().zip(inner.x().values()) {
        *a += b;
    }
    for (a, b) in d.y.values.iter_mut().zip(inner.y().values()) {
        *a += b;
    }
    d
}

/// Composition `outer ∘ inner` with bilinear interpolation of `outer`.
///
/// When both maps carry inverses the result does too, built as
/// `inner⁻¹ ∘ outer⁻¹`.
pub fn compose(outer: &DiffeoMap, inner: &DiffeoMap) -> Result<DiffeoMap> {
    compose_with(outer, inner, Interpolation::Bilinear)
}

/// [`compose`] with a selectable interpolation order.
pub fn compose_with(outer: &DiffeoMap, inner: &DiffeoMap, order: Interpolation) -> Result<DiffeoMap> {
    outer.grid.ensure_same(&inner.grid)?;
    let disp = composed_displacement(&outer.disp, &inner.disp, order);
    let inv_disp = match (&outer.inv_disp, &inner.inv_disp) {
        (Some(oi), Some(ii)) => Some(composed_displacement(ii, oi, order)),
        _ => None,
    };
    Ok(DiffeoMap::from_parts_unchecked(disp, inv_disp))
}
