//! Random sampling from nonuniform densities on the flat torus
//! `[-π, π)²` by optimal information transport.
//!
//! The pipeline has three stages:
//!
//! 1. Ingest a target density ([`geodesic::Density`]) and form the
//!    Fisher–Rao geodesic from the uniform density to it
//!    ([`geodesic::GeodesicPath`]).
//! 2. Lift that geodesic to a diffeomorphism by time stepping a sequence of
//!    Poisson solves ([`transport::build_transport_map`]). The result is a
//!    [`grid::DiffeoMap`] `φ` with `φ(X) ~ μ` whenever `X` is uniform.
//! 3. Draw uniform points with a counter-based generator and push them
//!    through the map ([`sampler::sample_target`]). Once the map exists,
//!    extra samples cost one bilinear interpolation each.
//!
//! [`validate`] holds the independent statistical checks (rejection
//! sampling oracle and Pearson χ² tests) used to confirm stage 3 really
//! produces draws from `μ`.

pub mod error;
pub mod geodesic;
pub mod grid;
pub mod io;
pub mod poisson;
pub mod sampler;
pub mod targets;
pub mod transport;
pub mod validate;

pub use error::{OitError, Result};
pub use geodesic::{Density, GeodesicPath};
pub use grid::{DiffeoMap, Interpolation, PeriodicGrid, ScalarField, VectorField};
pub use poisson::PoissonWorkspace;
pub use sampler::SampleBatch;
pub use transport::{build_transport_map, pushforward_residual, StepScheme, TransportConfig, TransportResult};
