//! Built-in target densities and their textual specs.
//!
//! A spec is a name with optional parenthesized numeric arguments, e.g.
//! `two-bump`, `two-bump(2,3)`, `sine-perturbation(0.5)`, or
//! `file:path/to/field.oitf`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use oit_core::geodesic::{normalize, set_dynamic_range};
use oit_core::io::read_scalar_field;
use oit_core::{targets, Density, OitError, PeriodicGrid, ScalarField};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum DensitySpec {
    Uniform,
    /// `w1·exp(−x² − 10(y − x²/2 + 1)²) + w2·exp(−(x+1)² − y²) + 1/10`.
    TwoBump { w1: f64, w2: f64 },
    /// `1 + height·exp(−|p − center|²/2σ²)`.
    GaussianBump { center: [f64; 2], sigma: f64, height: f64 },
    /// `1 + s·sin x`, requires `|s| < 1`.
    SinePerturbation { s: f64 },
    /// Raw field from an OITF file; must match the run grid.
    File(PathBuf),
}

const TWO_BUMP_WEIGHTS: (f64, f64) = (3.0, 2.0);
const TWO_BUMP_RATIO: f64 = 100.0;
const GAUSSIAN_DEFAULT: ([f64; 2], f64, f64) = ([0.0, 0.0], 0.5, 4.0);
const SINE_DEFAULT: f64 = 0.5;

impl DensitySpec {
    /// Dynamic-range ratio applied when the config does not set one.
    pub fn default_ratio(&self) -> Option<f64> {
        match self {
            DensitySpec::TwoBump { .. } => Some(TWO_BUMP_RATIO),
            _ => None,
        }
    }

    pub fn raw_field(&self, grid: PeriodicGrid) -> Result<ScalarField> {
        Ok(match self {
            DensitySpec::Uniform => ScalarField::constant(grid, 1.0),
            DensitySpec::TwoBump { w1, w2 } => targets::two_bump_raw(grid, *w1, *w2, 0.1),
            DensitySpec::GaussianBump { center, sigma, height } => targets::gaussian_bump(grid, *center, *sigma, *height),
            DensitySpec::SinePerturbation { s } => targets::sine_perturbation(grid, *s),
            DensitySpec::File(path) => {
                let f = read_scalar_field(path)?;
                if *f.grid() != grid {
                    return Err(OitError::GridMismatch {
                        left: format!("{} in {}", f.grid(), path.display()),
                        right: grid.to_string(),
                    }
                    .into());
                }
                f
            }
        })
    }

    /// Raw field, optional dynamic-range shift, then normalization.
    pub fn density(&self, grid: PeriodicGrid, ratio: Option<f64>) -> Result<Density> {
        let raw = self.raw_field(grid)?;
        let shaped = match ratio {
            Some(r) => set_dynamic_range(&raw, r)?,
            None => raw,
        };
        Ok(normalize(&shaped)?)
    }
}

fn parse_args(name: &str, args: Option<&str>, arity: usize) -> Result<Option<Vec<f64>>> {
    let Some(args) = args else { return Ok(None) };
    let vals: std::result::Result<Vec<f64>, _> = args.split(',').map(|a| a.trim().parse::<f64>()).collect();
    match vals {
        Ok(v) if v.len() == arity && v.iter().all(|x| x.is_finite()) => Ok(Some(v)),
        _ => Err(CliError::Usage(format!(
            "density `{name}` takes {arity} numeric argument(s), got `({args})`"
        ))),
    }
}

impl FromStr for DensitySpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(path) = s.strip_prefix("file:") {
            if path.is_empty() {
                return Err(CliError::Usage("density `file:` needs a path".into()));
            }
            return Ok(DensitySpec::File(PathBuf::from(path)));
        }
        let (name, args) = match s.split_once('(') {
            Some((n, rest)) => {
                let inner = rest
                    .strip_suffix(')')
                    .ok_or_else(|| CliError::Usage(format!("unbalanced parentheses in density `{s}`")))?;
                (n.trim(), Some(inner))
            }
            None => (s, None),
        };
        let spec = match name {
            "uniform" => {
                if args.is_some() {
                    return Err(CliError::Usage("density `uniform` takes no arguments".into()));
                }
                DensitySpec::Uniform
            }
            "two-bump" => {
                let (w1, w2) = match parse_args(name, args, 2)? {
                    Some(v) => (v[0], v[1]),
                    None => TWO_BUMP_WEIGHTS,
                };
                if !(w1 >= 0.0 && w2 >= 0.0) {
                    return Err(CliError::Usage("two-bump weights must be non-negative".into()));
                }
                DensitySpec::TwoBump { w1, w2 }
            }
            "one-gaussian-bump" => {
                let (center, sigma, height) = match parse_args(name, args, 4)? {
                    Some(v) => ([v[0], v[1]], v[2], v[3]),
                    None => GAUSSIAN_DEFAULT,
                };
                if !(sigma > 0.0 && height > -1.0) {
                    return Err(CliError::Usage("gaussian bump needs sigma > 0 and height > -1".into()));
                }
                DensitySpec::GaussianBump { center, sigma, height }
            }
            "sine-perturbation" => {
                let s = parse_args(name, args, 1)?.map_or(SINE_DEFAULT, |v| v[0]);
                if s.abs() >= 1.0 {
                    return Err(CliError::Usage(format!(
                        "sine-perturbation strength must satisfy |s| < 1, got {s}"
                    )));
                }
                DensitySpec::SinePerturbation { s }
            }
            other => {
                return Err(CliError::Usage(format!(
                    "unknown density `{other}` (expected uniform, two-bump, one-gaussian-bump, sine-perturbation or file:PATH)"
                )))
            }
        };
        Ok(spec)
    }
}

impl fmt::Display for DensitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensitySpec::Uniform => write!(f, "uniform"),
            DensitySpec::TwoBump { w1, w2 } if (*w1, *w2) == TWO_BUMP_WEIGHTS => write!(f, "two-bump"),
            DensitySpec::TwoBump { w1, w2 } => write!(f, "two-bump({w1},{w2})"),
            DensitySpec::GaussianBump { center, sigma, height } => {
                if (*center, *sigma, *height) == GAUSSIAN_DEFAULT {
                    write!(f, "one-gaussian-bump")
                } else {
                    write!(f, "one-gaussian-bump({},{},{sigma},{height})", center[0], center[1])
                }
            }
            DensitySpec::SinePerturbation { s } if *s == SINE_DEFAULT => write!(f, "sine-perturbation"),
            DensitySpec::SinePerturbation { s } => write!(f, "sine-perturbation({s})"),
            DensitySpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}
