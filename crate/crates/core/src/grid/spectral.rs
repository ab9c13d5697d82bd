use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{PeriodicGrid, ScalarField, VectorField};
use crate::error::Result;

/// FFT plans and wavenumber tables for one grid.
///
/// The domain has period 2π on both axes, so wavenumbers are integers. For
/// even sizes the Nyquist index `n/2` carries wavenumber `+n/2`.
#[derive(Clone)]
pub struct Spectral2d {
    grid: PeriodicGrid,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
    kx: Vec<f64>,
    ky: Vec<f64>,
    // derivative multipliers with the Nyquist mode zeroed
    dx: Vec<f64>,
    dy: Vec<f64>,
}

fn wavenumbers(n: usize) -> (Vec<f64>, Vec<f64>) {
    let k: Vec<f64> = (0..n)
        .map(|m| if m <= n / 2 { m as f64 } else { m as f64 - n as f64 })
        .collect();
    let mut d = k.clone();
    if n.is_multiple_of(2) {
        d[n / 2] = 0.0;
    }
    (k, d)
}

impl Spectral2d {
    pub fn new(grid: PeriodicGrid) -> Self {
        let mut planner = FftPlanner::new();
        let (kx, dx) = wavenumbers(grid.nx());
        let (ky, dy) = wavenumbers(grid.ny());
        Self {
            grid,
            fwd_x: planner.plan_fft_forward(grid.nx()),
            inv_x: planner.plan_fft_inverse(grid.nx()),
            fwd_y: planner.plan_fft_forward(grid.ny()),
            inv_y: planner.plan_fft_inverse(grid.ny()),
            kx,
            ky,
            dx,
            dy,
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    /// Integer wavenumber of row `i` (x axis).
    #[inline]
    pub fn kx(&self, i: usize) -> f64 {
        self.kx[i]
    }

    /// Integer wavenumber of column `j` (y axis).
    #[inline]
    pub fn ky(&self, j: usize) -> f64 {
        self.ky[j]
    }

    /// `-|k|²` for mode `(i, j)`.
    #[inline]
    pub fn laplacian_symbol(&self, i: usize, j: usize) -> f64 {
        -(self.kx[i] * self.kx[i] + self.ky[j] * self.ky[j])
    }

    fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
        for r in 0..rows {
            for c in 0..cols {
                dst[c * rows + r] = src[r * cols + c];
            }
        }
    }

    /// In-place unnormalized 2-D forward transform. `scratch` must have the
    /// same length as `data`.
    pub(crate) fn forward(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        self.fwd_y.process(data);
        Self::transpose(data, scratch, nx, ny);
        self.fwd_x.process(scratch);
        Self::transpose(scratch, data, ny, nx);
    }

    /// In-place 2-D inverse transform including the `1/N` normalization.
    pub(crate) fn inverse(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        self.inv_y.process(data);
        Self::transpose(data, scratch, nx, ny);
        self.inv_x.process(scratch);
        Self::transpose(scratch, data, ny, nx);
        let scale = 1.0 / self.grid.len() as f64;
        for z in data.iter_mut() {
            *z *= scale;
        }
    }

    pub(crate) fn load_real(f: &ScalarField, buf: &mut [Complex64]) {
        for (z, &v) in buf.iter_mut().zip(f.values()) {
            *z = Complex64::new(v, 0.0);
        }
    }

    pub(crate) fn real_part(&self, buf: &[Complex64]) -> ScalarField {
        ScalarField::from_vec_unchecked(self.grid, buf.iter().map(|z| z.re).collect())
    }

    fn spectrum(&self, f: &ScalarField) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
        self.grid.ensure_same(f.grid())?;
        let n = self.grid.len();
        let mut buf = vec![Complex64::default(); n];
        let mut scratch = vec![Complex64::default(); n];
        Self::load_real(f, &mut buf);
        self.forward(&mut buf, &mut scratch);
        Ok((buf, scratch))
    }

    fn apply_multiplier(
        &self,
        spec: &[Complex64],
        scratch: &mut [Complex64],
        mult: impl Fn(usize, usize) -> Complex64,
    ) -> ScalarField {
        let ny = self.grid.ny();
        let mut out: Vec<Complex64> = spec
            .iter()
            .enumerate()
            .map(|(k, &z)| z * mult(k / ny, k % ny))
            .collect();
        self.inverse(&mut out, scratch);
        self.real_part(&out)
    }

    /// Spectral gradient `(∂x f, ∂y f)` with Nyquist derivatives zeroed.
    pub fn gradient(&self, f: &ScalarField) -> Result<VectorField> {
        let (spec, mut scratch) = self.spectrum(f)?;
        let gx = self.apply_multiplier(&spec, &mut scratch, |i, _| Complex64::new(0.0, self.dx[i]));
        let gy = self.apply_multiplier(&spec, &mut scratch, |_, j| Complex64::new(0.0, self.dy[j]));
        Ok(VectorField { x: gx, y: gy })
    }

    /// Spectral partial derivative along axis 0 (x) or 1 (y).
    pub fn partial(&self, f: &ScalarField, axis: usize) -> Result<ScalarField> {
        let (spec, mut scratch) = self.spectrum(f)?;
        Ok(if axis == 0 {
            self.apply_multiplier(&spec, &mut scratch, |i, _| Complex64::new(0.0, self.dx[i]))
        } else {
            self.apply_multiplier(&spec, &mut scratch, |_, j| Complex64::new(0.0, self.dy[j]))
        })
    }

    /// Spectral Laplacian with the exact symbol `-|k|²`.
    pub fn laplacian(&self, f: &ScalarField) -> Result<ScalarField> {
        let (spec, mut scratch) = self.spectrum(f)?;
        Ok(self.apply_multiplier(&spec, &mut scratch, |i, j| {
            Complex64::new(self.laplacian_symbol(i, j), 0.0)
        }))
    }

    /// Discrete curl `∂y u_x − ∂x u_y`, computed spectrally.
    pub fn curl(&self, v: &VectorField) -> Result<ScalarField> {
        let a = self.partial(v.x(), 1)?;
        let b = self.partial(v.y(), 0)?;
        a.zip_map(&b, |p, q| p - q)
    }
}

/// Fourier-space gradient of a periodic field.
pub fn gradient_spectral(f: &ScalarField) -> Result<VectorField> {
    if !f.is_finite() {
        return Err(crate::OitError::InvalidInput("non-finite field in gradient".into()));
    }
    Spectral2d::new(*f.grid()).gradient(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g64() -> PeriodicGrid {
        PeriodicGrid::square(64).unwrap()
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        let v = gradient_spectral(&ScalarField::constant(g64(), 2.5)).unwrap();
        assert!(v.max_norm() < 1e-14);
    }

    #[test]
    fn gradient_of_sin_x() {
        let g = g64();
        let v = gradient_spectral(&ScalarField::from_fn(g, |x, _| x.sin())).unwrap();
        let want = ScalarField::from_fn(g, |x, _| x.cos());
        assert!(v.x().max_abs_diff(&want) <= 1e-12);
        assert!(v.y().max_abs() <= 1e-12);
    }

    #[test]
    fn gradient_of_cos_3y() {
        let g = g64();
        let v = gradient_spectral(&ScalarField::from_fn(g, |_, y| (3.0 * y).cos())).unwrap();
        let want = ScalarField::from_fn(g, |_, y| -3.0 * (3.0 * y).sin());
        assert!(v.x().max_abs() <= 1e-12);
        assert!(v.y().max_abs_diff(&want) <= 1e-12);
    }

    #[test]
    fn nyquist_derivative_is_zero() {
        // cos(n/2 · x) is the Nyquist mode on an n-point axis
        let g = PeriodicGrid::new(16, 8).unwrap();
        let f = ScalarField::from_fn(g, |x, y| (8.0 * x).cos() + (4.0 * y).cos());
        let v = gradient_spectral(&f).unwrap();
        assert!(v.max_norm() < 1e-12);
    }

    #[test]
    fn laplacian_of_eigenfunction() {
        let g = PeriodicGrid::new(32, 16).unwrap();
        let s = Spectral2d::new(g);
        let f = ScalarField::from_fn(g, |x, y| (2.0 * x).sin() * (3.0 * y).cos());
        let lap = s.laplacian(&f).unwrap();
        let want = f.map(|v| -13.0 * v);
        assert!(lap.max_abs_diff(&want) < 1e-11);
    }

    #[test]
    fn non_square_grid_roundtrip() {
        let g = PeriodicGrid::new(12, 20).unwrap();
        let s = Spectral2d::new(g);
        let f = ScalarField::from_fn(g, |x, y| (x + 2.0 * y).sin() + 0.3 * (5.0 * x).cos());
        let mut buf = vec![Complex64::default(); g.len()];
        let mut scratch = buf.clone();
        Spectral2d::load_real(&f, &mut buf);
        s.forward(&mut buf, &mut scratch);
        s.inverse(&mut buf, &mut scratch);
        assert!(s.real_part(&buf).max_abs_diff(&f) < 1e-13);
    }
}
