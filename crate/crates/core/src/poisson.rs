//! Spectral Poisson solver on the flat torus.

use rustfft::num_complex::Complex64;

use crate::error::{OitError, Result};
use crate::grid::{PeriodicGrid, ScalarField, Spectral2d};

/// Output of one Poisson solve.
#[derive(Clone, Debug)]
pub struct PoissonSolution {
    /// Zero-mean potential `f` with `Δf = s − mean(s)`.
    pub potential: ScalarField,
    /// Mean of the source that was projected out before solving.
    pub source_mean: f64,
}

/// Reusable FFT plans, inverse Laplacian symbol and scratch buffers for one
/// grid. Scratch space makes a workspace single-owner; clone it per thread.
#[derive(Clone)]
pub struct PoissonWorkspace {
    spectral: Spectral2d,
    inv_symbol: Vec<f64>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl PoissonWorkspace {
    pub fn new(grid: PeriodicGrid) -> Self {
        let spectral = Spectral2d::new(grid);
        let ny = grid.ny();
        let inv_symbol = (0..grid.len())
            .map(|k| {
                let s = spectral.laplacian_symbol(k / ny, k % ny);
                if s == 0.0 {
                    0.0
                } else {
                    1.0 / s
                }
            })
            .collect();
        Self {
            spectral,
            inv_symbol,
            buf: vec![Complex64::default(); grid.len()],
            scratch: vec![Complex64::default(); grid.len()],
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        self.spectral.grid()
    }

    pub fn spectral(&self) -> &Spectral2d {
        &self.spectral
    }

    /// `-1/|k|²` per mode in storage order, zero at `k = 0`.
    pub fn inverse_symbol(&self) -> &[f64] {
        &self.inv_symbol
    }

    /// Solves `Δf = s − mean(s)` for the zero-mean `f`.
    pub fn solve(&mut self, s: &ScalarField) -> Result<PoissonSolution> {
        self.grid().ensure_same(s.grid())?;
        if !s.is_finite() {
            return Err(OitError::InvalidInput("non-finite Poisson source".into()));
        }
        Spectral2d::load_real(s, &mut self.buf);
        self.spectral.forward(&mut self.buf, &mut self.scratch);
        let source_mean = self.buf[0].re / s.grid().len() as f64;
        for (z, &w) in self.buf.iter_mut().zip(&self.inv_symbol) {
            *z *= w;
        }
        self.spectral.inverse(&mut self.buf, &mut self.scratch);
        if source_mean.abs() > 0.0 {
            log::trace!("poisson: projected out source mean {source_mean:.3e}");
        }
        Ok(PoissonSolution {
            potential: self.spectral.real_part(&self.buf),
            source_mean,
        })
    }
}

/// One-shot convenience wrapper around [`PoissonWorkspace::solve`].
pub fn solve_poisson(ws: &mut PoissonWorkspace, s: &ScalarField) -> Result<ScalarField> {
    ws.solve(s).map(|sol| sol.potential)
}
