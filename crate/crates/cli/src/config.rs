//! Run configuration: a plain `key = value` file overlaid with command-line
//! flags.
//!
//! ```text
//! # lines starting with '#' are comments
//! density = two-bump(2,3)
//! ratio = 100
//! grid = 256
//! steps = 100
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use oit_core::grid::MIN_NODES;
use oit_core::{Interpolation, PeriodicGrid, StepScheme, TransportConfig};

use crate::density::DensitySpec;
use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub density: DensitySpec,
    /// Explicit dynamic-range ratio; `None` falls back to the density's
    /// default.
    pub ratio: Option<f64>,
    pub grid: usize,
    pub steps: usize,
    pub seed: u64,
    pub n: usize,
    pub bins: usize,
    pub scheme: StepScheme,
    pub interpolation: Interpolation,
    pub map: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub samples: Option<PathBuf>,
    pub bins_csv: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            density: DensitySpec::TwoBump { w1: 3.0, w2: 2.0 },
            ratio: None,
            grid: 256,
            steps: 100,
            seed: 0,
            n: 100_000,
            bins: 32,
            scheme: StepScheme::Midpoint,
            interpolation: Interpolation::Cubic,
            map: None,
            out: None,
            samples: None,
            bins_csv: None,
        }
    }
}

/// Keys accepted in config files and as `--key value` flags, in
/// serialization order.
pub const KEYS: [&str; 13] = [
    "density",
    "ratio",
    "grid",
    "steps",
    "seed",
    "n",
    "bins",
    "scheme",
    "interpolation",
    "map",
    "out",
    "samples",
    "bins-csv",
];

fn parse_int<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("`{key}` must be a non-negative integer, got `{value}`")))
}

fn scheme_name(s: StepScheme) -> &'static str {
    match s {
        StepScheme::Euler => "euler",
        StepScheme::Midpoint => "midpoint",
    }
}

fn interpolation_name(i: Interpolation) -> &'static str {
    match i {
        Interpolation::Bilinear => "bilinear",
        Interpolation::Cubic => "cubic",
    }
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let path = || (!value.is_empty()).then(|| PathBuf::from(value));
        match key {
            "density" => self.density = value.parse()?,
            "ratio" => {
                self.ratio = match value {
                    "" | "none" => None,
                    v => Some(v.parse::<f64>().ok().filter(|r| r.is_finite() && *r > 1.0).ok_or_else(|| {
                        CliError::Usage(format!("`ratio` must be a number > 1 or `none`, got `{v}`"))
                    })?),
                }
            }
            "grid" => self.grid = parse_int(key, value)?,
            "steps" => self.steps = parse_int(key, value)?,
            "seed" => self.seed = parse_int(key, value)?,
            "n" => self.n = parse_int(key, value)?,
            "bins" => self.bins = parse_int(key, value)?,
            "scheme" => {
                self.scheme = match value {
                    "euler" => StepScheme::Euler,
                    "midpoint" => StepScheme::Midpoint,
                    v => return Err(CliError::Usage(format!("`scheme` must be euler or midpoint, got `{v}`"))),
                }
            }
            "interpolation" => {
                self.interpolation = match value {
                    "bilinear" => Interpolation::Bilinear,
                    "cubic" => Interpolation::Cubic,
                    v => {
                        return Err(CliError::Usage(format!(
                            "`interpolation` must be bilinear or cubic, got `{v}`"
                        )))
                    }
                }
            }
            "map" => self.map = path(),
            "out" => self.out = path(),
            "samples" => self.samples = path(),
            "bins-csv" | "bins_csv" => self.bins_csv = path(),
            other => return Err(CliError::Usage(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of a config file on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| CliError::ConfigLine {
                line: idx + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            self.set(k.trim(), v).map_err(|e| CliError::ConfigLine {
                line: idx + 1,
                message: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::file(path, e))?;
        self.apply_text(&text)
    }

    /// Canonical `key = value` form; parsing it back yields `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let ratio = self.ratio.map_or_else(|| "none".to_string(), |r| r.to_string());
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        for key in KEYS {
            let v = match key {
                "density" => self.density.to_string(),
                "ratio" => ratio.clone(),
                "grid" => self.grid.to_string(),
                "steps" => self.steps.to_string(),
                "seed" => self.seed.to_string(),
                "n" => self.n.to_string(),
                "bins" => self.bins.to_string(),
                "scheme" => scheme_name(self.scheme).into(),
                "interpolation" => interpolation_name(self.interpolation).into(),
                "map" => path(&self.map),
                "out" => path(&self.out),
                "samples" => path(&self.samples),
                "bins-csv" => path(&self.bins_csv),
                _ => unreachable!(),
            };
            let _ = writeln!(s, "{key} = {v}");
        }
        s
    }

    /// Ratio used for the target: explicit, else the density's default.
    pub fn effective_ratio(&self) -> Option<f64> {
        self.ratio.or_else(|| self.density.default_ratio())
    }

    /// Identifier stored in map files.
    pub fn density_id(&self) -> String {
        match self.effective_ratio() {
            Some(r) => format!("{} ratio={r}", self.density),
            None => self.density.to_string(),
        }
    }

    pub fn periodic_grid(&self) -> Result<PeriodicGrid> {
        if self.grid < MIN_NODES {
            return Err(CliError::Usage(format!("`grid` must be at least {MIN_NODES}, got {}", self.grid)));
        }
        Ok(PeriodicGrid::square(self.grid)?)
    }

    pub fn transport(&self) -> Result<TransportConfig> {
        if self.steps == 0 {
            return Err(CliError::Usage("`steps` must be at least 1".into()));
        }
        Ok(TransportConfig {
            steps: self.steps,
            scheme: self.scheme,
            interpolation: self.interpolation,
            ..TransportConfig::default()
        })
    }

    pub fn require_map(&self) -> Result<&Path> {
        self.map.as_deref().ok_or_else(|| CliError::Usage("a map file is required (--map)".into()))
    }

    pub fn require_out(&self) -> Result<&Path> {
        self.out.as_deref().ok_or_else(|| CliError::Usage("an output path is required (--out)".into()))
    }

    /// Bins per axis must be positive and divide the grid.
    pub fn check_bins(&self, grid: PeriodicGrid) -> Result<()> {
        if self.bins == 0 || !grid.nx().is_multiple_of(self.bins) || !grid.ny().is_multiple_of(self.bins) {
            return Err(CliError::Usage(format!(
                "`bins` = {} must be positive and divide the grid {grid}",
                self.bins
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let text = RunConfig::default().to_text();
        let back = RunConfig::from_text(&text).unwrap();
        assert_eq!(back, RunConfig::default());
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn custom_round_trips() {
        let mut cfg = RunConfig::default();
        for (k, v) in [
            ("density", "two-bump(2,3)"),
            ("ratio", "50.5"),
            ("grid", "64"),
            ("steps", "25"),
            ("seed", "18446744073709551615"),
            ("scheme", "euler"),
            ("interpolation", "bilinear"),
            ("map", "out/map.oitm"),
            ("bins-csv", "bins.csv"),
        ] {
            cfg.set(k, v).unwrap();
        }
        let text = cfg.to_text();
        let back = RunConfig::from_text(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn comments_blank_lines_and_later_lines_win() {
        let cfg = RunConfig::from_text("# c\n\n grid = 64 \nsteps=5\nsteps = 7\n").unwrap();
        assert_eq!((cfg.grid, cfg.steps), (64, 7));
    }

    #[test]
    fn errors_name_the_line() {
        let e = RunConfig::from_text("grid = 64\nsteps 5\n").unwrap_err();
        assert!(matches!(e, CliError::ConfigLine { line: 2, .. }), "{e}");
        let e = RunConfig::from_text("colour = red\n").unwrap_err();
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn rejects_invalid_values() {
        let mut cfg = RunConfig::default();
        assert!(cfg.set("n", "-5").is_err());
        assert!(cfg.set("ratio", "1").is_err());
        assert!(cfg.set("scheme", "rk4").is_err());
        cfg.set("steps", "0").unwrap();
        assert!(cfg.transport().is_err());
        cfg.set("grid", "3").unwrap();
        assert!(cfg.periodic_grid().is_err());
    }

    #[test]
    fn two_bump_gets_its_default_ratio() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.effective_ratio(), Some(100.0));
        assert_eq!(cfg.density_id(), "two-bump ratio=100");
        let mut u = RunConfig::default();
        u.set("density", "uniform").unwrap();
        assert_eq!(u.effective_ratio(), None);
    }
}
