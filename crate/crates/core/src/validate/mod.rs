//! Statistical checks that transported samples follow the target law.
//!
//! Ground truth comes from two independent routes: per-bin quadrature of the
//! target density, and an exact rejection sampler. Both treat the target as
//! its periodic bilinear interpolant, the same law the transport map is
//! compared against.

mod gamma;
mod oracle;

use std::f64::consts::{PI, TAU};

use crate::error::{OitError, Result};
use crate::geodesic::Density;
use crate::sampler::SampleBatch;

pub use gamma::{chi_squared_sf, ln_gamma, regularized_gamma_p, regularized_gamma_q};
pub use oracle::{rejection_sample_oracle, OracleBatch};

/// Minimum expected count per bin before merging kicks in.
pub const MIN_EXPECTED: f64 = 5.0;

/// Counts of points in a `b_x × b_y` partition of `[-π, π)²` (x index slow).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinnedHistogram {
    pub bx: usize,
    pub by: usize,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl BinnedHistogram {
    pub fn from_counts(bx: usize, by: usize, counts: Vec<u64>) -> Result<Self> {
        if bx == 0 || by == 0 || counts.len() != bx * by {
            return Err(OitError::InvalidInput(format!(
                "{} counts do not fit {bx}x{by} bins",
                counts.len()
            )));
        }
        let total = counts.iter().sum();
        Ok(Self { bx, by, counts, total })
    }

    #[inline]
    pub fn bin_of(bx: usize, by: usize, p: [f64; 2]) -> (usize, usize) {
        let bi = (((p[0] + PI) / TAU) * bx as f64).floor() as usize;
        let bj = (((p[1] + PI) / TAU) * by as f64).floor() as usize;
        (bi.min(bx - 1), bj.min(by - 1))
    }

    /// Empirical bin masses `count / total`.
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.total.max(1) as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

/// Bins a batch with equal-width, right-open bins.
pub fn histogram(batch: &SampleBatch, bx: usize, by: usize) -> Result<BinnedHistogram> {
    if bx == 0 || by == 0 {
        return Err(OitError::InvalidInput("bin counts must be positive".into()));
    }
    let mut counts = vec![0u64; bx * by];
    for &p in &batch.points {
        let (bi, bj) = BinnedHistogram::bin_of(bx, by, p);
        counts[bi * by + bj] += 1;
    }
    BinnedHistogram::from_counts(bx, by, counts)
}

/// Mass of each bin under the bilinear interpolant of `target`.
///
/// Bins must align with grid cells; each cell contributes the mean of its
/// four corner values times the cell volume.
pub fn expected_bin_mass(target: &Density, bx: usize, by: usize) -> Result<Vec<f64>> {
    let g = *target.grid();
    if bx == 0 || by == 0 || !g.nx().is_multiple_of(bx) || !g.ny().is_multiple_of(by) {
        return Err(OitError::InvalidInput(format!(
            "grid {g} is not an integer multiple of {bx}x{by} bins"
        )));
    }
    let (mx, my) = (g.nx() / bx, g.ny() / by);
    let f = target.field();
    let w = 0.25 * g.cell_volume();
    let mut mass = vec![0.0; bx * by];
    for i in 0..g.nx() {
        for j in 0..g.ny() {
            let (i1, j1) = (i as isize + 1, j as isize + 1);
            let cell = f.at(i, j) + f.at_wrapped(i1, j as isize) + f.at_wrapped(i as isize, j1) + f.at_wrapped(i1, j1);
            mass[(i / mx) * by + j / my] += w * cell;
        }
    }
    Ok(mass)
}

/// Result of a Pearson χ² test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquared {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Groups bins so that every group's weight reaches `threshold`.
///
/// Bins are visited in row-major order; an under-weight group is absorbed
/// into the 4-neighbouring (periodic) group with the largest weight, ties
/// going to the lowest root index. Returns the group label of each bin and
/// the number of groups.
pub fn merge_bins(weights: &[f64], bx: usize, by: usize, threshold: f64) -> Result<(Vec<usize>, usize)> {
    let n = bx * by;
    if weights.len() != n {
        return Err(OitError::InvalidInput("weights do not match the binning".into()));
    }
    let mut root: Vec<usize> = (0..n).collect();
    let mut members: Vec<Vec<usize>> = (0..n).map(|k| vec![k]).collect();
    let mut weight = weights.to_vec();
    let mut groups = n;

    let neighbours = |k: usize| {
        let (i, j) = (k / by, k % by);
        [
            ((i + bx - 1) % bx) * by + j,
            ((i + 1) % bx) * by + j,
            i * by + (j + by - 1) % by,
            i * by + (j + 1) % by,
        ]
    };

    let mut changed = true;
    while changed && groups > 1 {
        changed = false;
        for k in 0..n {
            let r = root[k];
            if weight[r] >= threshold || groups == 1 {
                continue;
            }
            let mut best: Option<usize> = None;
            for &m in &members[r] {
                for nb in neighbours(m) {
                    let rn = root[nb];
                    if rn == r {
                        continue;
                    }
                    best = match best {
                        Some(b) if weight[b] > weight[rn] || (weight[b] == weight[rn] && b < rn) => Some(b),
                        _ => Some(rn),
                    };
                }
            }
            let Some(b) = best else { continue };
            let moved = std::mem::take(&mut members[r]);
            for &m in &moved {
                root[m] = b;
            }
            members[b].extend(moved);
            weight[b] += weight[r];
            weight[r] = 0.0;
            groups -= 1;
            changed = true;
        }
    }
    if groups < 2 {
        return Err(OitError::Degenerate("all bins merged into a single group".into()));
    }
    // relabel roots densely in order of first appearance
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut out = vec![0; n];
    for k in 0..n {
        let r = root[k];
        if label[r] == usize::MAX {
            label[r] = next;
            next += 1;
        }
        out[k] = label[r];
    }
    Ok((out, groups))
}

fn aggregate(values: &[f64], labels: &[usize], groups: usize) -> Vec<f64> {
    let mut out = vec![0.0; groups];
    for (&v, &l) in values.iter().zip(labels) {
        out[l] += v;
    }
    out
}

/// Pearson goodness-of-fit of `hist` against per-bin probabilities.
pub fn chi_squared_gof(hist: &BinnedHistogram, expected_mass: &[f64]) -> Result<ChiSquared> {
    if expected_mass.len() != hist.counts.len() {
        return Err(OitError::InvalidInput(format!(
            "{} expected masses for {} bins",
            expected_mass.len(),
            hist.counts.len()
        )));
    }
    if expected_mass.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
        return Err(OitError::InvalidInput("expected masses must be finite and non-negative".into()));
    }
    let n = hist.total as f64;
    let expected: Vec<f64> = expected_mass.iter().map(|m| n * m).collect();
    let (labels, groups) = merge_bins(&expected, hist.bx, hist.by, MIN_EXPECTED)?;
    let observed: Vec<f64> = hist.counts.iter().map(|&c| c as f64).collect();
    let o = aggregate(&observed, &labels, groups);
    let e = aggregate(&expected, &labels, groups);
    let statistic = o.iter().zip(&e).map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = groups - 1;
    Ok(ChiSquared {
        statistic,
        dof,
        p_value: chi_squared_sf(statistic, dof as f64),
    })
}

/// Two-sample Pearson test with pooled expectations.
pub fn two_sample_chi_squared(a: &BinnedHistogram, b: &BinnedHistogram) -> Result<ChiSquared> {
    if a.bx != b.bx || a.by != b.by {
        return Err(OitError::InvalidInput(format!(
            "binning mismatch: {}x{} vs {}x{}",
            a.bx, a.by, b.bx, b.by
        )));
    }
    let (na, nb) = (a.total as f64, b.total as f64);
    if na == 0.0 || nb == 0.0 {
        return Err(OitError::Degenerate("two-sample test needs two non-empty samples".into()));
    }
    let pooled: Vec<f64> = a.counts.iter().zip(&b.counts).map(|(&x, &y)| (x + y) as f64).collect();
    let smaller = na.min(nb);
    let weights: Vec<f64> = pooled.iter().map(|c| smaller * c / (na + nb)).collect();
    let (labels, groups) = merge_bins(&weights, a.bx, a.by, MIN_EXPECTED)?;
    let ca = aggregate(&a.counts.iter().map(|&c| c as f64).collect::<Vec<_>>(), &labels, groups);
    let cb = aggregate(&b.counts.iter().map(|&c| c as f64).collect::<Vec<_>>(), &labels, groups);
    let mut statistic = 0.0;
    for (&x, &y) in ca.iter().zip(&cb) {
        let c = x + y;
        let ea = na * c / (na + nb);
        let eb = nb * c / (na + nb);
        statistic += (x - ea) * (x - ea) / ea + (y - eb) * (y - eb) / eb;
    }
    let dof = groups - 1;
    Ok(ChiSquared {
        statistic,
        dof,
        p_value: chi_squared_sf(statistic, dof as f64),
    })
}
