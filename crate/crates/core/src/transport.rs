//! Optimal information transport: lifting the Fisher–Rao geodesic from the
//! uniform density to a target into a diffeomorphism of the torus.
//!
//! With `ε = 1/K` and `t_k = k/K`, each step
//!
//! 1. forms the nodal ratio `μ̇(t_k)/μ(t_k)` and composes it with `φ_k`;
//! 2. solves `Δf_k = s_k` spectrally and takes `v_k = ∇f_k`;
//! 3. updates `φ_{k+1} = φ_k ∘ (id − ε v_k)` and
//!    `φ⁻¹_{k+1} = φ⁻¹_k + ε v_k ∘ φ⁻¹_k`.
//!
//! The final `φ_K` satisfies `det Dφ · μ∘φ ≈ μ₀`, so `φ_K(X)` follows the
//! target when `X` is uniform.
//!
//! [`StepScheme::Euler`] with [`Interpolation::Bilinear`] is exactly the
//! loop above. The default replaces the step `id − ε v_k` by a midpoint
//! (second-order) approximation of the flow and composes with cubic
//! interpolation; at `256²`, `K = 100` this cuts the pushforward residual
//! about sixfold.

use rayon::prelude::*;

use crate::error::{OitError, Result};
use crate::geodesic::{Density, GeodesicPath, UNIFORM_DENSITY};
use crate::grid::{
    compose_with, jacobian_det, sample_displaced, DiffeoMap, Interpolation, ScalarField, Spectral2d, VectorField,
};
use crate::poisson::PoissonWorkspace;

/// How one step approximates the flow `exp(−ε v)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum StepScheme {
    /// `ψ = id − ε v_k`, inverse `id + ε v_k`.
    Euler,
    /// Velocity re-evaluated at `t_k + ε/2` on `φ_k ∘ (id − ε/2 v_k)`;
    /// `ψ(x) = x − ε v_mid(x − ε/2 v_k(x))`, inverse
    /// `x + ε v_mid(x + ε/2 v_k(x))`. Two Poisson solves per step.
    #[default]
    Midpoint,
}

/// Parameters of the time-stepping loop. The grid comes from the target.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportConfig {
    /// Number of time steps `K`; the step size is `1/K`.
    pub steps: usize,
    pub scheme: StepScheme,
    /// Interpolation used to compose the accumulated map and to pull the
    /// geodesic ratio back through it.
    pub interpolation: Interpolation,
    /// Warn when `max|ε v_k|` exceeds this fraction of the grid spacing.
    pub cfl_warn_threshold: f64,
    /// Flag the result when the final pushforward residual exceeds this.
    pub residual_tolerance: f64,
    /// Keep the per-step velocity fields (memory heavy; for diagnostics).
    pub record_velocities: bool,
}

impl Default for TransportConfig {
    fn default() -> Self {
        Self {
            steps: 100,
            scheme: StepScheme::Midpoint,
            interpolation: Interpolation::Cubic,
            cfl_warn_threshold: 0.5,
            residual_tolerance: 0.05,
            record_velocities: false,
        }
    }
}

impl TransportConfig {
    pub fn with_steps(steps: usize) -> Self {
        Self {
            steps,
            ..Self::default()
        }
    }

    /// Forward Euler with bilinear composition: the unmodified loop.
    pub fn euler_bilinear(steps: usize) -> Self {
        Self {
            steps,
            scheme: StepScheme::Euler,
            interpolation: Interpolation::Bilinear,
            ..Self::default()
        }
    }
}

/// Per-step diagnostics, each of length `K`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepDiagnostics {
    /// `max|ε v_k| / h`.
    pub cfl: Vec<f64>,
    /// Mean of `s_k` projected out by the Poisson solve.
    pub poisson_mean: Vec<f64>,
    /// Minimum Jacobian determinant of `φ_{k+1}`.
    pub min_jacobian: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct TransportResult {
    /// `φ_K` with the inverse populated.
    pub map: DiffeoMap,
    pub theta: f64,
    pub steps: usize,
    pub diagnostics: StepDiagnostics,
    /// Relative L1 pushforward residual of `map` against the target.
    pub residual: f64,
    /// Human-readable warnings (CFL exceedance summary, residual above
    /// tolerance).
    pub warnings: Vec<String>,
    /// Set when the residual exceeded `residual_tolerance`.
    pub residual_warning: bool,
    /// Velocity fields `v_k` at `t_k` (before any midpoint correction), only
    /// when `record_velocities` was set.
    pub velocities: Vec<VectorField>,
}

/// `s(x) = ratio(φ(x))` at every node, interpolating the nodal ratio field.
fn compose_scalar(ratio: &ScalarField, map: &DiffeoMap, order: Interpolation) -> ScalarField {
    let g = *map.grid();
    let (hx, hy, ny) = (g.hx(), g.hy(), g.ny());
    let d = map.displacement();
    let (dx, dy) = (d.x().values(), d.y().values());
    let vals: Vec<f64> = (0..g.len())
        .into_par_iter()
        .map(|k| {
            let fi = (k / ny) as f64 + dx[k] / hx;
            let fj = (k % ny) as f64 + dy[k] / hy;
            ratio.sample_index_with(fi, fj, order)
        })
        .collect();
    ScalarField::new(g, vals).expect("interpolation of finite data is finite")
}

/// Runs the OIT loop towards `target` and returns `φ_K`.
pub fn build_transport_map(target: &Density, cfg: &TransportConfig) -> Result<TransportResult> {
    if cfg.steps == 0 {
        return Err(OitError::InvalidInput("number of time steps must be at least 1".into()));
    }
    let grid = *target.grid();
    let path = GeodesicPath::from_uniform(target.clone())?;
    let eps = 1.0 / cfg.steps as f64;
    let h = grid.hx().min(grid.hy());

    let mut ws = PoissonWorkspace::new(grid);
    let spectral: Spectral2d = ws.spectral().clone();
    let mut phi = DiffeoMap::identity(grid);
    let mut diag = StepDiagnostics::default();
    let mut warnings = Vec::new();
    let mut velocities = Vec::new();

    log::debug!("transport: grid {grid}, K = {}, theta = {:.6}", cfg.steps, path.theta());

    let mut velocity = |t: f64, phi: &DiffeoMap| -> Result<(VectorField, f64)> {
        let ratio = path.log_rate(t)?;
        let source = compose_scalar(&ratio, phi, cfg.interpolation);
        let sol = ws.solve(&source)?;
        Ok((spectral.gradient(&sol.potential)?, sol.source_mean))
    };

    for k in 0..cfg.steps {
        let t = k as f64 * eps;
        let (v, source_mean) = velocity(t, &phi)?;
        if !v.is_finite() {
            return Err(OitError::NumericalBlowup {
                step: k,
                what: "non-finite velocity field".into(),
            });
        }

        let cfl = v.max_norm() * eps / h;
        if cfl > cfg.cfl_warn_threshold {
            log::debug!("step {k}: max|eps v|/h = {cfl:.3}");
        }

        let psi = match cfg.scheme {
            StepScheme::Euler => {
                let step = v.scaled(eps);
                DiffeoMap::from_parts_unchecked(step.scaled(-1.0), Some(step))
            }
            StepScheme::Midpoint => {
                let half = v.scaled(-0.5 * eps);
                let half_map = DiffeoMap::from_parts_unchecked(half.clone(), None);
                let phi_mid = compose_with(&phi, &half_map, cfg.interpolation)?;
                let (v_mid, _) = velocity(t + 0.5 * eps, &phi_mid)?;
                if !v_mid.is_finite() {
                    return Err(OitError::NumericalBlowup {
                        step: k,
                        what: "non-finite midpoint velocity field".into(),
                    });
                }
                let fwd = sample_displaced(&v_mid, &half, cfg.interpolation).scaled(-eps);
                let inv = sample_displaced(&v_mid, &half.scaled(-1.0), cfg.interpolation).scaled(eps);
                DiffeoMap::from_parts_unchecked(fwd, Some(inv))
            }
        };
        phi = compose_with(&phi, &psi, cfg.interpolation)?;

        let disp = phi.displacement();
        if !disp.is_finite() || disp.x().max_abs() > std::f64::consts::TAU || disp.y().max_abs() > std::f64::consts::TAU
        {
            return Err(OitError::NumericalBlowup {
                step: k,
                what: "displacement left the admissible range".into(),
            });
        }
        let min_det = jacobian_det(&phi).min();
        #[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN counts as orientation loss
        if !(min_det > 0.0) {
            return Err(OitError::OrientationLoss { step: k, min_det });
        }

        diag.cfl.push(cfl);
        diag.poisson_mean.push(source_mean);
        diag.min_jacobian.push(min_det);
        if cfg.record_velocities {
            velocities.push(v);
        }
    }

    let over: Vec<f64> = diag.cfl.iter().copied().filter(|&c| c > cfg.cfl_warn_threshold).collect();
    if !over.is_empty() {
        let peak = over.iter().copied().fold(0.0, f64::max);
        let msg = format!(
            "{} of {} steps had max|eps v|/h above {} (peak {peak:.3}); consider more time steps",
            over.len(),
            cfg.steps,
            cfg.cfl_warn_threshold
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }

    let residual = pushforward_residual(&phi, target);
    let residual_warning = residual > cfg.residual_tolerance;
    if residual_warning {
        let msg = format!(
            "pushforward residual {residual:.4} exceeds tolerance {}",
            cfg.residual_tolerance
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }

    Ok(TransportResult {
        map: phi,
        theta: path.theta(),
        steps: cfg.steps,
        diagnostics: diag,
        residual,
        warnings,
        residual_warning,
        velocities,
    })
}

/// Relative L1 error of the change-of-variables identity
/// `det Dφ(x) · μ(φ(x)) = μ₀(x)`, averaged over the nodes.
pub fn pushforward_residual(map: &DiffeoMap, target: &Density) -> f64 {
    let det = jacobian_det(map);
    let pulled = compose_scalar(target.field(), map, Interpolation::Bilinear);
    let n = det.values().len() as f64;
    det.values()
        .iter()
        .zip(pulled.values())
        .map(|(&j, &m)| (j * m - UNIFORM_DENSITY).abs() / UNIFORM_DENSITY)
        .sum::<f64>()
        / n
}
