//! Seeded uniform draws on the torus and their image under a transport map.
//!
//! Point `n` of a batch is a pure function of `(seed, n)`: it reads words
//! `4n..4n+4` of the ChaCha8 keystream for `seed`. Chunked parallel
//! generation therefore reproduces serial generation exactly.

use std::f64::consts::{PI, TAU};

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::grid::{wrap, DiffeoMap};

const CHUNK: usize = 1 << 14;
const WORDS_PER_POINT: u128 = 4;

/// An ordered list of points in `[-π, π)²` together with the seed that
/// generated the underlying uniform draws.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub points: Vec<[f64; 2]>,
    pub seed: u64,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Per-axis sample means.
    pub fn mean(&self) -> [f64; 2] {
        let n = self.points.len().max(1) as f64;
        let (sx, sy) = self
            .points
            .iter()
            .fold((0.0, 0.0), |(a, b), p| (a + p[0], b + p[1]));
        [sx / n, sy / n]
    }
}

/// Maps 53 random bits to `[0, 1)`.
#[inline]
pub(crate) fn unit_f64(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
fn coordinate(bits: u64) -> f64 {
    wrap(-PI + TAU * unit_f64(bits))
}

/// Fills `out` with uniform points `start, start+1, ...` of the stream for
/// `seed`.
fn fill_uniform(seed: u64, start: usize, out: &mut [[f64; 2]]) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(start as u128 * WORDS_PER_POINT);
    for p in out.iter_mut() {
        let a = rng.next_u64();
        let b = rng.next_u64();
        *p = [coordinate(a), coordinate(b)];
    }
}

/// `n` i.i.d. uniform points on `[-π, π)²`, fully determined by `seed`.
pub fn draw_uniform(n: usize, seed: u64) -> SampleBatch {
    let mut points = vec![[0.0; 2]; n];
    points
        .par_chunks_mut(CHUNK)
        .enumerate()
        .for_each(|(c, chunk)| fill_uniform(seed, c * CHUNK, chunk));
    SampleBatch { points, seed }
}

/// Uniform points `start..start+len` of the stream for `seed`. Concatenating
/// ranges reproduces [`draw_uniform`].
pub fn draw_uniform_range(seed: u64, start: usize, len: usize) -> Vec<[f64; 2]> {
    let mut out = vec![[0.0; 2]; len];
    fill_uniform(seed, start, &mut out);
    out
}

/// Pushes every point through the forward map. Order is preserved.
pub fn transform_samples(map: &DiffeoMap, batch: &SampleBatch) -> SampleBatch {
    let mut points = batch.points.clone();
    points
        .par_chunks_mut(CHUNK)
        .for_each(|chunk| chunk.iter_mut().for_each(|p| *p = map.apply(*p)));
    SampleBatch {
        points,
        seed: batch.seed,
    }
}

/// Draws `n` samples from the law `φ(X)`, `X` uniform.
pub fn sample_target(map: &DiffeoMap, n: usize, seed: u64) -> SampleBatch {
    let mut points = vec![[0.0; 2]; n];
    points.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
        fill_uniform(seed, c * CHUNK, chunk);
        chunk.iter_mut().for_each(|p| *p = map.apply(*p));
    });
    SampleBatch { points, seed }
}
