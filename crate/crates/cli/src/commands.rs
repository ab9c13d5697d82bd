use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use oit_core::grid::jacobian_det;
use oit_core::io::{read_samples_csv, write_samples_csv, MapFile};
use oit_core::sampler::sample_target;
use oit_core::validate::{
    chi_squared_gof, expected_bin_mass, histogram, rejection_sample_oracle, two_sample_chi_squared, ChiSquared,
};
use oit_core::{build_transport_map, OitError, PeriodicGrid};

use crate::config::RunConfig;
use crate::error::{CliError, Result};

/// Significance level of both validation tests.
pub const SIGNIFICANCE: f64 = 0.01;

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::file(path, e))
}

/// Writes to `path`, or stdout when no path is given.
fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = create(p)?;
            f(&mut w)?;
            w.flush().map_err(|e| CliError::file(p, e))
        }
        None => {
            let mut w = io::stdout().lock();
            f(&mut w)?;
            w.flush().map_err(|e| CliError::Core(e.into()))
        }
    }
}

fn read_map(path: &Path) -> Result<MapFile> {
    MapFile::read(path).map_err(|e| match e {
        OitError::Io(source) => CliError::file(path, source),
        other => CliError::Usage(format!("{}: {other}", path.display())),
    })
}

#[derive(Clone, Debug)]
pub struct BuildSummary {
    pub grid: PeriodicGrid,
    pub steps: usize,
    pub theta: f64,
    pub residual: f64,
    pub min_jacobian: f64,
    pub seconds: f64,
    pub residual_warning: bool,
}

impl BuildSummary {
    pub fn to_text(&self) -> String {
        format!(
            "grid: {}\nsteps: {}\ntheta: {:.9}\nresidual: {:.6e}\nmin_jacobian: {:.6}\nwall_time_s: {:.3}\n",
            self.grid, self.steps, self.theta, self.residual, self.min_jacobian, self.seconds
        )
    }
}

/// Builds the transport map for the configured density and writes it to
/// `out`.
pub fn build(cfg: &RunConfig) -> Result<BuildSummary> {
    let out = cfg.require_out()?;
    let grid = cfg.periodic_grid()?;
    let tcfg = cfg.transport()?;
    let target = cfg.density.density(grid, cfg.effective_ratio())?;
    let start = Instant::now();
    let result = build_transport_map(&target, &tcfg)?;
    let seconds = start.elapsed().as_secs_f64();
    let min_jacobian = jacobian_det(&result.map).min();
    let file = MapFile::from_result(&result, cfg.density_id());
    let bytes = file.encode()?;
    std::fs::write(out, bytes).map_err(|e| CliError::file(out, e))?;
    Ok(BuildSummary {
        grid,
        steps: result.steps,
        theta: result.theta,
        residual: result.residual,
        min_jacobian,
        seconds,
        residual_warning: result.residual_warning,
    })
}

#[derive(Clone, Copy, Debug)]
pub struct SampleSummary {
    pub n: usize,
    /// Time spent drawing and transforming, excluding CSV output.
    pub seconds: f64,
}

/// Draws `n` samples through the stored map and writes them as CSV.
pub fn sample(cfg: &RunConfig) -> Result<SampleSummary> {
    let file = read_map(cfg.require_map()?)?;
    let start = Instant::now();
    let batch = sample_target(&file.map, cfg.n, cfg.seed);
    let seconds = start.elapsed().as_secs_f64();
    log::info!(
        "sampled {} points in {seconds:.3} s ({:.3e} samples/s)",
        cfg.n,
        cfg.n as f64 / seconds.max(f64::MIN_POSITIVE)
    );
    with_output(cfg.out.as_deref(), |w| Ok(write_samples_csv(w, &batch.points)?))?;
    Ok(SampleSummary { n: cfg.n, seconds })
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub density_id: String,
    pub map_density_id: String,
    pub grid: PeriodicGrid,
    pub n: usize,
    pub seed: u64,
    pub bins: usize,
    pub gof: ChiSquared,
    pub two_sample: ChiSquared,
    pub oracle_acceptance: f64,
    /// Per bin: observed, expected, oracle count (x index slow).
    pub per_bin: Vec<(u64, f64, u64)>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.gof.p_value > SIGNIFICANCE && self.two_sample.p_value > SIGNIFICANCE
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let verdict = |p: f64| if p > SIGNIFICANCE { "pass" } else { "fail" };
        let _ = writeln!(s, "density: {}", self.density_id);
        let _ = writeln!(s, "map_density: {}", self.map_density_id);
        let _ = writeln!(s, "grid: {}", self.grid);
        let _ = writeln!(s, "n: {}", self.n);
        let _ = writeln!(s, "seed: {}", self.seed);
        let _ = writeln!(s, "bins: {}x{}", self.bins, self.bins);
        let _ = writeln!(s, "significance: {SIGNIFICANCE}");
        let _ = writeln!(s, "gof_statistic: {:.6}", self.gof.statistic);
        let _ = writeln!(s, "gof_dof: {}", self.gof.dof);
        let _ = writeln!(s, "gof_p_value: {:.6e}", self.gof.p_value);
        let _ = writeln!(s, "gof_result: {}", verdict(self.gof.p_value));
        let _ = writeln!(s, "two_sample_statistic: {:.6}", self.two_sample.statistic);
        let _ = writeln!(s, "two_sample_dof: {}", self.two_sample.dof);
        let _ = writeln!(s, "two_sample_p_value: {:.6e}", self.two_sample.p_value);
        let _ = writeln!(s, "two_sample_result: {}", verdict(self.two_sample.p_value));
        let _ = writeln!(s, "oracle_acceptance: {:.6}", self.oracle_acceptance);
        let _ = writeln!(s, "result: {}", if self.passed() { "pass" } else { "fail" });
        s
    }

    pub fn write_bins_csv(&self, w: &mut dyn Write) -> io::Result<()> {
        writeln!(w, "bin_x,bin_y,observed,expected,oracle")?;
        for (k, (o, e, r)) in self.per_bin.iter().enumerate() {
            writeln!(w, "{},{},{o},{e},{r}", k / self.bins, k % self.bins)?;
        }
        Ok(())
    }
}

/// Checks map samples against bin quadrature and against the rejection
/// oracle. Writing the report is left to the caller.
pub fn validate(cfg: &RunConfig) -> Result<ValidationReport> {
    let file = read_map(cfg.require_map()?)?;
    let grid = cfg.periodic_grid()?;
    if *file.map.grid() != grid {
        return Err(OitError::GridMismatch {
            left: format!("map {}", file.map.grid()),
            right: format!("density {grid}"),
        }
        .into());
    }
    cfg.check_bins(grid)?;
    if cfg.n == 0 {
        return Err(CliError::Usage("`n` must be positive for validation".into()));
    }
    let target = cfg.density.density(grid, cfg.effective_ratio())?;
    let b = cfg.bins;

    let samples = sample_target(&file.map, cfg.n, cfg.seed);
    let observed = histogram(&samples, b, b)?;
    let mass = expected_bin_mass(&target, b, b)?;
    let gof = chi_squared_gof(&observed, &mass)?;

    let oracle = rejection_sample_oracle(&target, cfg.n, cfg.seed);
    let reference = histogram(&oracle.batch, b, b)?;
    let two_sample = two_sample_chi_squared(&observed, &reference)?;
    log::info!("oracle acceptance rate {:.4}", oracle.acceptance_rate());

    let n = cfg.n as f64;
    let per_bin = observed
        .counts
        .iter()
        .zip(&mass)
        .zip(&reference.counts)
        .map(|((&o, &m), &r)| (o, m * n, r))
        .collect();
    Ok(ValidationReport {
        density_id: cfg.density_id(),
        map_density_id: file.density_id,
        grid,
        n: cfg.n,
        seed: cfg.seed,
        bins: b,
        gof,
        two_sample,
        oracle_acceptance: oracle.acceptance_rate(),
        per_bin,
    })
}

/// Runs [`validate`], writes the report (and per-bin CSV when requested)
/// and turns a failed test into [`CliError::ValidationFailed`].
pub fn validate_and_report(cfg: &RunConfig) -> Result<ValidationReport> {
    let report = validate(cfg)?;
    with_output(cfg.out.as_deref(), |w| {
        w.write_all(report.to_text().as_bytes()).map_err(|e| CliError::Core(e.into()))
    })?;
    if let Some(path) = &cfg.bins_csv {
        let mut w = create(path)?;
        report
            .write_bins_csv(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| CliError::file(path, e))?;
    }
    if !report.passed() {
        return Err(CliError::ValidationFailed(format!(
            "gof p = {:.3e}, two-sample p = {:.3e} (need > {SIGNIFICANCE})",
            report.gof.p_value, report.two_sample.p_value
        )));
    }
    Ok(report)
}

/// Reads a sample CSV given by `samples`.
pub(crate) fn read_sample_file(cfg: &RunConfig) -> Result<Vec<[f64; 2]>> {
    let path = cfg
        .samples
        .as_deref()
        .ok_or_else(|| CliError::Usage("a sample CSV is required (--samples)".into()))?;
    let f = File::open(path).map_err(|e| CliError::file(path, e))?;
    read_samples_csv(f).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

pub(crate) fn load_map(cfg: &RunConfig) -> Result<MapFile> {
    read_map(cfg.require_map()?)
}

pub(crate) fn output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    with_output(path, f)
}
