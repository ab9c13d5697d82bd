//! Analytic target densities used by the CLI registry and the test suites.

use crate::grid::{PeriodicGrid, ScalarField};

/// Unnormalized two-bump density on `[-π, π)²`:
/// `w₁·exp(−x² − 10(y − x²/2 + 1)²) + w₂·exp(−(x+1)² − y²) + floor`.
///
/// The reference configuration is `w₁ = 3, w₂ = 2, floor = 1/10`; swapping
/// the weights gives a visibly different law used as a negative control.
pub fn two_bump_raw(grid: PeriodicGrid, w1: f64, w2: f64, floor: f64) -> ScalarField {
    ScalarField::from_fn(grid, |x, y| {
        let banana = -x * x - 10.0 * (y - x * x / 2.0 + 1.0).powi(2);
        let round = -(x + 1.0).powi(2) - y * y;
        w1 * banana.exp() + w2 * round.exp() + floor
    })
}

/// Reference two-bump field (`w₁ = 3`, `w₂ = 2`, `floor = 0.1`).
pub fn two_bump(grid: PeriodicGrid) -> ScalarField {
    two_bump_raw(grid, 3.0, 2.0, 0.1)
}

/// Isotropic Gaussian bump centred at `center` with width `sigma` over a unit
/// floor. Not periodic-smooth unless `sigma` is well below π.
pub fn gaussian_bump(grid: PeriodicGrid, center: [f64; 2], sigma: f64, height: f64) -> ScalarField {
    ScalarField::from_fn(grid, |x, y| {
        let r2 = (x - center[0]).powi(2) + (y - center[1]).powi(2);
        1.0 + height * (-r2 / (2.0 * sigma * sigma)).exp()
    })
}

/// `1 + s·sin(x)`, strictly positive for `|s| < 1`.
pub fn sine_perturbation(grid: PeriodicGrid, s: f64) -> ScalarField {
    ScalarField::from_fn(grid, |x, _| 1.0 + s * x.sin())
}
