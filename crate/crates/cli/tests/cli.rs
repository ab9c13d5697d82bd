use std::path::Path;
use std::process::{Command, Output};

fn oit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oit")).args(args).output().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn build_small(dir: &Path, density: &str) -> std::path::PathBuf {
    let map = dir.join(format!("{}.oitm", density.replace(['(', ')', ','], "_")));
    let out = oit(&["build", "--density", density, "--grid", "32", "--steps", "12", "--out", p(&map)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    map
}

#[test]
fn zero_steps_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = oit(&["build", "--steps", "0", "--out", p(&dir.path().join("m"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn negative_sample_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let map = build_small(dir.path(), "uniform");
    let out = oit(&["sample", "--map", p(&map), "--n", "-5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unknown_flag_exits_one() {
    assert_eq!(oit(&["build", "--frobnicate"]).status.code(), Some(1));
}

#[test]
fn sample_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let map = build_small(dir.path(), "two-bump");
    let a = oit(&["sample", "--map", p(&map), "--n", "5", "--seed", "11"]);
    let b = oit(&["sample", "--map", p(&map), "--n", "5", "--seed", "11"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert_eq!(text.lines().count(), 6);
    for line in text.lines().skip(1) {
        for v in line.split(',') {
            let v: f64 = v.parse().unwrap();
            assert!((-std::f64::consts::PI..std::f64::consts::PI).contains(&v));
        }
    }
    let c = oit(&["sample", "--map", p(&map), "--n", "5", "--seed", "12"]);
    assert_ne!(text.as_bytes(), &c.stdout[..]);
}

#[test]
fn truncated_map_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let map = build_small(dir.path(), "two-bump");
    let bytes = std::fs::read(&map).unwrap();
    std::fs::write(&map, &bytes[..bytes.len() / 2]).unwrap();
    let out = oit(&["sample", "--map", p(&map), "--n", "5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn missing_map_is_a_file_error() {
    let out = oit(&["sample", "--map", "/nonexistent/map.oitm", "--n", "5"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn uniform_build_is_the_identity() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("u.oitm");
    let out = oit(&["build", "--density", "uniform", "--grid", "32", "--steps", "10", "--out", p(&map)]);
    assert!(out.status.success());
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.contains("residual: 0.000000e0"), "{summary}");
    assert!(summary.contains("min_jacobian: 1.000000"), "{summary}");

    // each seed is a 1% test, so allow one chance rejection out of five
    let report = dir.path().join("report.txt");
    let passes = (0..5)
        .filter(|seed| {
            let v = oit(&[
                "validate", "--map", p(&map), "--density", "uniform", "--grid", "32", "--n", "20000", "--bins", "8",
                "--seed", &seed.to_string(), "--out", p(&report),
            ]);
            let text = std::fs::read_to_string(&report).unwrap();
            assert_eq!(v.status.success(), text.ends_with("result: pass\n"));
            v.status.success()
        })
        .count();
    assert!(passes >= 4, "{passes}/5 seeds passed");
}

#[test]
fn wrong_density_fails_validation_with_exit_three() {
    let dir = tempfile::tempdir().unwrap();
    let map = build_small(dir.path(), "uniform");
    let v = oit(&[
        "validate", "--map", p(&map), "--density", "two-bump", "--grid", "32", "--n", "20000", "--bins", "8",
    ]);
    assert_eq!(v.status.code(), Some(3));
    assert!(String::from_utf8(v.stdout).unwrap().ends_with("result: fail\n"));
}

#[test]
fn grid_mismatch_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let map = build_small(dir.path(), "uniform");
    let v = oit(&["validate", "--map", p(&map), "--grid", "64", "--n", "100", "--bins", "8"]);
    assert_eq!(v.status.code(), Some(1));
}

#[test]
fn uniform_heatmap_is_flat() {
    let out = oit(&["export", "heatmap", "--density", "uniform", "--grid", "16"]);
    assert!(out.status.success());
    let header = b"P5\n16 16\n255\n";
    assert_eq!(&out.stdout[..header.len()], header);
    assert!(out.stdout[header.len()..].iter().all(|&b| b == 0));
    assert_eq!(out.stdout.len(), header.len() + 256);
}

#[test]
fn mesh_export_closes_each_line() {
    let dir = tempfile::tempdir().unwrap();
    let map = build_small(dir.path(), "two-bump");
    let out = oit(&["export", "mesh", "--map", p(&map)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').skip(3).map(|v| v.parse().unwrap()).collect())
        .collect();
    // 32 nodes, stride 4: 8 lines per family, 33 points each
    assert_eq!(rows.len(), 2 * 8 * 33);
    for (k, line) in rows.chunks(33).enumerate() {
        let (first, last) = (&line[0], &line[32]);
        let (dx, dy) = (last[0] - first[0], last[1] - first[1]);
        let want = if k < 8 { (0.0, std::f64::consts::TAU) } else { (std::f64::consts::TAU, 0.0) };
        assert!((dx - want.0).abs() < 1e-9 && (dy - want.1).abs() < 1e-9);
    }
}

#[test]
fn scatter_subsamples_a_sample_file() {
    let dir = tempfile::tempdir().unwrap();
    let map = build_small(dir.path(), "two-bump");
    let csv = dir.path().join("s.csv");
    assert!(oit(&["sample", "--map", p(&map), "--n", "100", "--out", p(&csv)]).status.success());
    let out = oit(&["export", "scatter", "--samples", p(&csv), "--n", "10"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 11);
}

#[test]
fn config_file_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = oit(&["config", "--density", "two-bump(4,1)", "--grid", "128", "--seed", "9", "--scheme", "euler"]);
    assert!(first.status.success());
    let file = dir.path().join("run.conf");
    std::fs::write(&file, &first.stdout).unwrap();
    let second = oit(&["config", "--config", p(&file)]);
    assert!(second.status.success());
    assert_eq!(first.stdout, second.stdout);

    let text = String::from_utf8(first.stdout).unwrap();
    assert!(text.contains("grid = 128"), "{text}");
    let over = oit(&["config", "--config", p(&file), "--grid", "64"]);
    assert!(String::from_utf8(over.stdout).unwrap().contains("grid = 64"));
}

#[test]
fn bad_config_line_is_reported_with_its_number() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.conf");
    std::fs::write(&file, "# comment\ngrid = 64\nsteps = lots\n").unwrap();
    let out = oit(&["config", "--config", p(&file)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains('3'));
}
