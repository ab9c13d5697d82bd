use std::f64::consts::{PI, TAU};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geodesic::Density;
use crate::grid::wrap;
use crate::sampler::{unit_f64, SampleBatch};

// keeps oracle draws independent of the sampler stream for the same seed
const ORACLE_STREAM: u64 = 0x6f72_6163_6c65;

/// Samples from the rejection oracle plus its proposal count.
#[derive(Clone, Debug)]
pub struct OracleBatch {
    pub batch: SampleBatch,
    pub proposals: u64,
}

impl OracleBatch {
    pub fn acceptance_rate(&self) -> f64 {
        self.batch.len() as f64 / self.proposals.max(1) as f64
    }
}

/// Exact i.i.d. draws from the bilinear interpolant of `target` by rejection
/// from the uniform envelope `max μ`.
///
/// The expected acceptance rate is `1 / (4π² max μ)`.
pub fn rejection_sample_oracle(target: &Density, n: usize, seed: u64) -> OracleBatch {
    let field = target.field();
    let envelope = field.max();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(ORACLE_STREAM);
    let mut points = Vec::with_capacity(n);
    let mut proposals = 0u64;
    while points.len() < n {
        proposals += 1;
        let p = [
            wrap(-PI + TAU * unit_f64(rng.next_u64())),
            wrap(-PI + TAU * unit_f64(rng.next_u64())),
        ];
        let u = unit_f64(rng.next_u64());
        if u * envelope < field.sample(p) {
            points.push(p);
        }
    }
    if n > 0 {
        log::debug!(
            "rejection oracle: {n} samples from {proposals} proposals (rate {:.4})",
            n as f64 / proposals as f64
        );
    }
    OracleBatch {
        batch: SampleBatch { points, seed },
        proposals,
    }
}
