use std::f64::consts::{PI, TAU};

use oit_core::geodesic::normalize;
use oit_core::sampler::{draw_uniform, draw_uniform_range};
use oit_core::validate::{
    chi_squared_gof, chi_squared_sf, expected_bin_mass, histogram, rejection_sample_oracle, two_sample_chi_squared,
    BinnedHistogram,
};
use oit_core::{Density, PeriodicGrid, SampleBatch, ScalarField};
use proptest::prelude::*;

// scipy.stats.chi2.sf reference values
const CHI2_SF_REFERENCE: [(f64, f64, f64); 11] = [
    (1.0, 1.0, 0.31731050786291115),
    (3.84, 1.0, 0.05004352124870519),
    (10.0, 5.0, 0.07523524614651217),
    (1023.0, 1023.0, 0.494120089867273),
    (1100.0, 1023.0, 0.04686632821748806),
    (950.0, 1023.0, 0.9494054966816917),
    (300.0, 255.0, 0.02772752205390483),
    (0.5, 2.0, 0.7788007830714049),
    (50.0, 20.0, 0.0002214766382487835),
    (0.001, 3.0, 0.9999915920809419),
    (2000.0, 1023.0, 1.0894177425511856e-65),
];

fn smooth_density(n: usize) -> Density {
    let g = PeriodicGrid::square(n).unwrap();
    normalize(&ScalarField::from_fn(g, |x, y| 1.0 + 0.5 * x.sin() * y.cos() + 0.3 * (2.0 * y).sin())).unwrap()
}

#[test]
fn survival_function_matches_reference() {
    for (stat, dof, want) in CHI2_SF_REFERENCE {
        let got = chi_squared_sf(stat, dof);
        let tol = if want < 1e-10 { 1e-9 * want } else { 1e-10 };
        assert!((got - want).abs() <= tol, "sf({stat}, {dof}) = {got:e}, want {want:e}");
    }
}

#[test]
fn uniform_sample_mean_within_clt_bound() {
    let n = 1_000_000;
    let bound = 3.0 * (TAU / 12f64.sqrt()) / (n as f64).sqrt();
    for seed in [0, 1, 0xdead_beef] {
        let m = draw_uniform(n, seed).mean();
        assert!(m[0].abs() <= bound && m[1].abs() <= bound, "seed {seed}: {m:?} vs {bound}");
    }
}

#[test]
fn uniform_histogram_within_five_sigma() {
    let n = 1_000_000u64;
    let h = histogram(&draw_uniform(n as usize, 11), 16, 16).unwrap();
    let p = 1.0 / 256.0;
    let sigma = (n as f64 * p * (1.0 - p)).sqrt();
    for &c in &h.counts {
        assert!((c as f64 - n as f64 * p).abs() <= 5.0 * sigma, "count {c}");
    }
    assert_eq!(h.total, n);
}

#[test]
fn chunked_generation_matches_any_window() {
    let full = draw_uniform(50_000, 42);
    let mid = draw_uniform_range(42, 17_000, 20_000);
    assert_eq!(&full.points[17_000..37_000], &mid[..]);
}

#[test]
fn histogram_edge_cases() {
    let edge = SampleBatch {
        points: vec![[-PI, -PI]],
        seed: 0,
    };
    let h = histogram(&edge, 4, 4).unwrap();
    assert_eq!(h.counts[0], 1);
    let origin = SampleBatch {
        points: vec![[0.0, 0.0]; 9],
        seed: 0,
    };
    let h = histogram(&origin, 4, 4).unwrap();
    assert_eq!(h.counts[2 * 4 + 2], 9);
}

#[test]
fn bin_mass_of_tilted_sine_matches_line_quadrature() {
    // the bilinear mass carries an O(h²) edge error of about h²/12 · 0.9/π
    let g = PeriodicGrid::new(2048, 4).unwrap();
    let mu = normalize(&ScalarField::from_fn(g, |x, _| 1.0 + 0.9 * x.sin())).unwrap();
    let mass = expected_bin_mass(&mu, 2, 1).unwrap();
    // trapezoid rule of the normalized profile over each half, 2^16 panels
    let m = 1 << 16;
    let half = |a: f64| {
        let h = PI / m as f64;
        let f = |x: f64| (1.0 + 0.9 * x.sin()) / TAU;
        (0..m).map(|k| 0.5 * h * (f(a + k as f64 * h) + f(a + (k + 1) as f64 * h))).sum::<f64>()
    };
    let (left, right) = (half(-PI), half(0.0));
    assert!((mass[0] - left).abs() <= 1e-6, "{} vs {left}", mass[0]);
    assert!((mass[1] - right).abs() <= 1e-6, "{} vs {right}", mass[1]);
    assert!((mass[0] + mass[1] - 1.0).abs() <= 1e-10);
    assert!((left - (0.5 - 0.9 / PI)).abs() <= 1e-9);
}

#[test]
fn bin_mass_is_refinement_invariant() {
    let coarse = expected_bin_mass(&smooth_density(256), 16, 16).unwrap();
    let fine = expected_bin_mass(&smooth_density(512), 16, 16).unwrap();
    let gap = coarse.iter().zip(&fine).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(gap <= 1e-6, "{gap:e}");
    assert!((coarse.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
}

#[test]
fn bin_mass_rejects_misaligned_bins() {
    assert!(expected_bin_mass(&smooth_density(64), 24, 16).is_err());
}

#[test]
fn gof_is_calibrated_on_uniform_samples() {
    let g = PeriodicGrid::square(32).unwrap();
    let mass = expected_bin_mass(&Density::uniform(g), 16, 16).unwrap();
    let passes = (0..100u64)
        .filter(|&seed| {
            let h = histogram(&draw_uniform(100_000, 1_000 + seed), 16, 16).unwrap();
            chi_squared_gof(&h, &mass).unwrap().p_value > 0.01
        })
        .count();
    assert!(passes >= 99, "{passes}/100");
}

#[test]
fn two_sample_test_is_calibrated_on_oracle_batches() {
    let mu = smooth_density(64);
    let passes = (0..100u64)
        .filter(|&k| {
            let a = rejection_sample_oracle(&mu, 20_000, 2 * k);
            let b = rejection_sample_oracle(&mu, 20_000, 2 * k + 1);
            let ha = histogram(&a.batch, 16, 16).unwrap();
            let hb = histogram(&b.batch, 16, 16).unwrap();
            two_sample_chi_squared(&ha, &hb).unwrap().p_value > 0.01
        })
        .count();
    assert!(passes >= 99, "{passes}/100");
}

#[test]
fn oracle_acceptance_rate_within_three_sigma() {
    let mu = smooth_density(64);
    let want = 1.0 / (4.0 * PI * PI * mu.field().max());
    // about 10⁶ proposals
    let out = rejection_sample_oracle(&mu, (1e6 * want) as usize, 99);
    let p = out.proposals as f64;
    let sigma = (want * (1.0 - want) / p).sqrt();
    assert!((out.acceptance_rate() - want).abs() <= 3.0 * sigma, "{} vs {want}", out.acceptance_rate());
    assert!((p - 1e6).abs() < 1e4);
}

#[test]
fn oracle_on_uniform_accepts_everything() {
    let u = Density::uniform(PeriodicGrid::square(16).unwrap());
    let out = rejection_sample_oracle(&u, 1000, 5);
    assert_eq!(out.proposals, 1000);
}

#[test]
fn oracle_frequencies_converge_at_root_n() {
    let mu = smooth_density(64);
    let mass = expected_bin_mass(&mu, 8, 8).unwrap();
    let dev = |n: usize| {
        // average over seeds to tame the max-statistic noise
        (0..4u64)
            .map(|s| {
                let h = histogram(&rejection_sample_oracle(&mu, n, 500 + s).batch, 8, 8).unwrap();
                h.frequencies().iter().zip(&mass).map(|(f, m)| (f - m).abs()).fold(0.0, f64::max)
            })
            .sum::<f64>()
            / 4.0
    };
    let (d4, d5, d6) = (dev(10_000), dev(100_000), dev(1_000_000));
    let r10 = 10f64.sqrt();
    for ratio in [d4 / d5, d5 / d6] {
        assert!(ratio >= r10 / 2.0 && ratio <= r10 * 2.0, "{d4:e} {d5:e} {d6:e}");
    }
}

#[test]
fn gof_zero_iff_exact() {
    let h = BinnedHistogram::from_counts(2, 2, vec![10, 20, 30, 40]).unwrap();
    let exact = chi_squared_gof(&h, &[0.1, 0.2, 0.3, 0.4]).unwrap();
    assert_eq!(exact.statistic, 0.0);
    assert_eq!(exact.p_value, 1.0);
    let off = chi_squared_gof(&h, &[0.1, 0.2, 0.4, 0.3]).unwrap();
    assert!(off.statistic > 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn histogram_conserves_count(
        pts in prop::collection::vec((-PI..PI, -PI..PI), 0..300),
        bx in 1usize..12,
        by in 1usize..12,
    ) {
        let mut points: Vec<[f64; 2]> = pts.into_iter().map(|(x, y)| [x, y]).collect();
        points.push([-PI, -PI]);
        points.push([PI - 1e-15, PI - 1e-15]);
        let n = points.len() as u64;
        let h = histogram(&SampleBatch { points, seed: 0 }, bx, by).unwrap();
        prop_assert_eq!(h.counts.iter().sum::<u64>(), n);
        prop_assert_eq!(h.total, n);
    }

    #[test]
    fn two_sample_of_identical_histograms_is_zero(counts in prop::collection::vec(20u64..200, 16)) {
        let h = BinnedHistogram::from_counts(4, 4, counts).unwrap();
        prop_assert_eq!(two_sample_chi_squared(&h, &h).unwrap().statistic, 0.0);
    }
}
