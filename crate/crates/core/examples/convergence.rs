//! Pushforward residual of the two-bump map across grid/step refinements.
//!
//! `cargo run --release -p oit-core --example convergence`

use std::time::Instant;

use oit_core::geodesic::{normalize, set_dynamic_range};
use oit_core::{build_transport_map, targets, PeriodicGrid, TransportConfig};

fn main() -> oit_core::Result<()> {
    for (n, k) in [(64, 25), (128, 50), (256, 100), (256, 200)] {
        let grid = PeriodicGrid::square(n)?;
        let target = normalize(&set_dynamic_range(&targets::two_bump(grid), 100.0)?)?;
        let start = Instant::now();
        let res = build_transport_map(&target, &TransportConfig::with_steps(k))?;
        let min_det = res.diagnostics.min_jacobian.iter().copied().fold(f64::INFINITY, f64::min);
        let max_cfl = res.diagnostics.cfl.iter().copied().fold(0.0, f64::max);
        println!(
            "n={n:4} K={k:4} residual={:.5} theta={:.5} min_det={min_det:.4} max_cfl={max_cfl:.3} roundtrip/h={:.3} time={:.2}s",
            res.residual,
            res.theta,
            res.map.roundtrip_error().unwrap_or(f64::NAN) / grid.h(),
            start.elapsed().as_secs_f64()
        );
    }
    Ok(())
}
