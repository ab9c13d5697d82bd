//! Probability densities on the torus and the Fisher–Rao geodesic between
//! two of them.
//!
//! Densities are stored with respect to Lebesgue measure on `[-π, π)²`, so
//! the uniform density is the constant `1/(4π²)`. Along the geodesic
//!
//! ```text
//! μ(t) = a(t)² μ₀,   a(t) = [sin((1−t)θ) + sin(tθ) r] / sin θ,   r = √(μ₁/μ₀)
//! ```
//!
//! with `cos θ = ∫ r μ₀`. Differentiating in `t` gives
//! `μ̇(t) = 2 a(t) ȧ(t) μ₀` with `ȧ(t) = θ [cos(tθ) r − cos((1−t)θ)] / sin θ`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{OitError, Result};
use crate::grid::{PeriodicGrid, ScalarField};

/// Value of the uniform probability density on `[-π, π)²`.
pub const UNIFORM_DENSITY: f64 = 1.0 / (4.0 * PI * PI);

/// Smallest admissible density value.
pub const POSITIVITY_FLOOR: f64 = 1e-12;

/// Below this angle the geodesic switches to its `θ → 0` limit.
pub const SMALL_THETA: f64 = 1e-8;

/// A strictly positive, unit-mass density sampled on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Density {
    field: ScalarField,
    mass: f64,
}

impl Density {
    /// The uniform density `μ₀`.
    pub fn uniform(grid: PeriodicGrid) -> Self {
        let field = ScalarField::constant(grid, UNIFORM_DENSITY);
        let mass = field.integral();
        Self { field, mass }
    }

    /// Wraps values that are already a probability density, checking the
    /// positivity floor and unit mass (to 1e−10).
    pub fn from_normalized(field: ScalarField) -> Result<Self> {
        check_positive(&field, POSITIVITY_FLOOR)?;
        let mass = field.integral();
        if (mass - 1.0).abs() > 1e-10 {
            return Err(OitError::InvalidInput(format!("density has mass {mass}, expected 1")));
        }
        Ok(Self { field, mass })
    }

    pub(crate) fn from_parts_unchecked(field: ScalarField) -> Self {
        let mass = field.integral();
        Self { field, mass }
    }

    #[inline]
    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    #[inline]
    pub fn grid(&self) -> &PeriodicGrid {
        self.field.grid()
    }

    #[inline]
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn values(&self) -> &[f64] {
        self.field.values()
    }

    /// True when every node carries the same value.
    pub fn is_constant(&self) -> bool {
        let v = self.field.values();
        v.iter().all(|&x| x == v[0])
    }
}

#[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail the check
fn check_positive(field: &ScalarField, floor: f64) -> Result<()> {
    match field.values().iter().position(|&v| !(v >= floor)) {
        Some(index) => Err(OitError::NonPositive {
            index,
            value: field.values()[index],
        }),
        None => Ok(()),
    }
}

/// Scales a strictly positive field to unit mass.
///
/// A constant input maps to exactly [`UNIFORM_DENSITY`] at every node.
pub fn normalize(raw: &ScalarField) -> Result<Density> {
    if raw.values().iter().all(|&v| v == 0.0) {
        return Err(OitError::Degenerate("all-zero density field".into()));
    }
    check_positive(raw, f64::MIN_POSITIVE)?;
    let grid = *raw.grid();
    let first = raw.values()[0];
    if raw.values().iter().all(|&v| v == first) {
        return Ok(Density::uniform(grid));
    }
    let mass = raw.integral();
    let field = raw.map(|v| v / mass);
    check_positive(&field, POSITIVITY_FLOOR)?;
    Ok(Density::from_parts_unchecked(field))
}

/// Adds the constant `β = (max − ratio·min)/(ratio − 1)` so that the shifted
/// field has `max/min = ratio` exactly (up to rounding). Works in both
/// directions: widening or narrowing the dynamic range.
pub fn set_dynamic_range(raw: &ScalarField, ratio: f64) -> Result<ScalarField> {
    if !(ratio.is_finite() && ratio > 1.0) {
        return Err(OitError::InvalidInput(format!("dynamic range ratio must be > 1, got {ratio}")));
    }
    let (lo, hi) = (raw.min(), raw.max());
    if lo < 0.0 {
        return Err(OitError::InvalidInput(format!("field minimum {lo} is negative")));
    }
    if hi == lo {
        return Err(OitError::Degenerate("cannot set the dynamic range of a constant field".into()));
    }
    let beta = (hi - ratio * lo) / (ratio - 1.0);
    Ok(raw.map(|v| v + beta))
}

/// Fisher–Rao angle `θ = arccos ∫ √(μ₁/μ₀) μ₀`, in `[0, π/2)`.
pub fn theta(mu0: &Density, mu1: &Density) -> Result<f64> {
    mu0.grid().ensure_same(mu1.grid())?;
    let r = sqrt_ratio(mu0, mu1);
    Ok(theta_from_ratio(mu0, &r))
}

fn sqrt_ratio(mu0: &Density, mu1: &Density) -> ScalarField {
    // same grid checked by callers
    mu1.field.zip_map(&mu0.field, |a, b| (a / b).sqrt()).expect("grids checked")
}

fn theta_from_ratio(mu0: &Density, r: &ScalarField) -> f64 {
    // Dividing by the discrete mass of μ₀ makes μ₁ = μ₀ give cos θ = 1 exactly.
    let (num, den) = r
        .values()
        .iter()
        .zip(mu0.values())
        .fold((0.0, 0.0), |(n, d), (&ri, &w)| (n + ri * w, d + w));
    let c = (num / den).clamp(0.0, 1.0);
    let th = c.acos();
    // cos θ > 0 for positive densities; keep the open upper bound honest
    th.min(FRAC_PI_2 - f64::EPSILON)
}

/// Geodesic `t ↦ μ(t)` from `mu0` to `mu1` under the Fisher–Rao metric.
#[derive(Clone, Debug)]
pub struct GeodesicPath {
    mu0: Density,
    mu1: Density,
    theta: f64,
    sqrt_ratio: ScalarField,
}

/// Density and time derivative at one point of the geodesic.
#[derive(Clone, Debug)]
pub struct GeodesicPoint {
    pub density: Density,
    pub rate: ScalarField,
}

impl GeodesicPath {
    pub fn new(mu0: Density, mu1: Density) -> Result<Self> {
        mu0.grid().ensure_same(mu1.grid())?;
        let sqrt_ratio = sqrt_ratio(&mu0, &mu1);
        let theta = theta_from_ratio(&mu0, &sqrt_ratio);
        Ok(Self {
            mu0,
            mu1,
            theta,
            sqrt_ratio,
        })
    }

    /// Geodesic from the uniform density to `target`.
    pub fn from_uniform(target: Density) -> Result<Self> {
        Self::new(Density::uniform(*target.grid()), target)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn start(&self) -> &Density {
        &self.mu0
    }

    pub fn end(&self) -> &Density {
        &self.mu1
    }

    pub fn sqrt_ratio(&self) -> &ScalarField {
        &self.sqrt_ratio
    }

    /// `(p, q, dp, dq)` with `a(t) = p + q·r` and `ȧ(t) = dp + dq·r`.
    fn coefficients(&self, t: f64) -> (f64, f64, f64, f64) {
        let th = self.theta;
        if th < SMALL_THETA {
            // a = (1−t) + t r,  ȧ = r − 1
            (1.0 - t, t, -1.0, 1.0)
        } else {
            let s = th.sin();
            (
                ((1.0 - t) * th).sin() / s,
                (t * th).sin() / s,
                -th * ((1.0 - t) * th).cos() / s,
                th * (t * th).cos() / s,
            )
        }
    }

    /// Evaluates `μ(t)` and `μ̇(t)`.
    pub fn eval(&self, t: f64) -> Result<GeodesicPoint> {
        if !(0.0..=1.0).contains(&t) {
            return Err(OitError::InvalidInput(format!("geodesic time {t} outside [0, 1]")));
        }
        if t == 0.0 {
            let rate = self.rate_field(t);
            return Ok(GeodesicPoint {
                density: self.mu0.clone(),
                rate,
            });
        }
        if t == 1.0 {
            let rate = self.rate_field(t);
            return Ok(GeodesicPoint {
                density: self.mu1.clone(),
                rate,
            });
        }
        let (p, q, dp, dq) = self.coefficients(t);
        let grid = *self.mu0.grid();
        let mut dens = Vec::with_capacity(grid.len());
        let mut rate = Vec::with_capacity(grid.len());
        for (&r, &m0) in self.sqrt_ratio.values().iter().zip(self.mu0.values()) {
            let a = p + q * r;
            let da = dp + dq * r;
            dens.push(a * a * m0);
            rate.push(2.0 * a * da * m0);
        }
        Ok(GeodesicPoint {
            density: Density::from_parts_unchecked(ScalarField::from_vec_unchecked(grid, dens)),
            rate: ScalarField::from_vec_unchecked(grid, rate),
        })
    }

    fn rate_field(&self, t: f64) -> ScalarField {
        let (p, q, dp, dq) = self.coefficients(t);
        let v = self
            .sqrt_ratio
            .values()
            .iter()
            .zip(self.mu0.values())
            .map(|(&r, &m0)| 2.0 * (p + q * r) * (dp + dq * r) * m0)
            .collect();
        ScalarField::from_vec_unchecked(*self.mu0.grid(), v)
    }

    /// Nodal ratio `μ̇(t)/μ(t)`, the source that drives the transport step.
    pub fn log_rate(&self, t: f64) -> Result<ScalarField> {
        let pt = self.eval(t)?;
        pt.rate.zip_map(pt.density.field(), |a, b| a / b)
    }
}

/// Free-function form of [`GeodesicPath::eval`].
pub fn geodesic_eval(path: &GeodesicPath, t: f64) -> Result<(Density, ScalarField)> {
    path.eval(t).map(|p| (p.density, p.rate))
}
