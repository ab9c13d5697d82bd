//! Figure artifacts: density heatmaps (PGM), warp meshes and scatter
//! subsamples (CSV).

use std::f64::consts::TAU;
use std::io::{self, Write};

use oit_core::io::write_samples_csv;
use oit_core::{DiffeoMap, ScalarField};

use crate::commands::{load_map, output, read_sample_file};
use crate::config::RunConfig;
use crate::error::{CliError, Result};

/// Every `MESH_STRIDE`-th grid line is drawn.
pub const MESH_STRIDE: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportKind {
    Heatmap,
    Mesh,
    Scatter,
}

/// Binary PGM (P5). Columns follow x, rows follow y with larger y on top;
/// values map linearly from `[min, max]` to `[0, 255]`, a constant field is
/// all zeros.
pub fn write_pgm(field: &ScalarField, w: &mut dyn Write) -> io::Result<()> {
    let g = field.grid();
    let (lo, hi) = (field.min(), field.max());
    let scale = if hi > lo { 255.0 / (hi - lo) } else { 0.0 };
    write!(w, "P5\n{} {}\n255\n", g.nx(), g.ny())?;
    let mut row = vec![0u8; g.nx()];
    for j in (0..g.ny()).rev() {
        for (i, px) in row.iter_mut().enumerate() {
            *px = ((field.at(i, j) - lo) * scale).round().clamp(0.0, 255.0) as u8;
        }
        w.write_all(&row)?;
    }
    Ok(())
}

/// Images of every `MESH_STRIDE`-th grid line under `map`, unwrapped so each
/// polyline is continuous. Rows: `family,line,point,x,y`, where family `x`
/// holds lines of constant x index and `y` lines of constant y index. Each
/// polyline ends with a closing point, its first point shifted by one period.
pub fn write_mesh_csv(map: &DiffeoMap, w: &mut dyn Write) -> io::Result<()> {
    let g = *map.grid();
    writeln!(w, "family,line,point,x,y")?;
    for i in (0..g.nx()).step_by(MESH_STRIDE) {
        for j in 0..=g.ny() {
            let p = map.node_image(i, j % g.ny());
            let shift = if j == g.ny() { TAU } else { 0.0 };
            writeln!(w, "x,{i},{j},{},{}", p[0], p[1] + shift)?;
        }
    }
    for j in (0..g.ny()).step_by(MESH_STRIDE) {
        for i in 0..=g.nx() {
            let p = map.node_image(i % g.nx(), j);
            let shift = if i == g.nx() { TAU } else { 0.0 };
            writeln!(w, "y,{j},{i},{},{}", p[0] + shift, p[1])?;
        }
    }
    Ok(())
}

/// At most `n` points taken with an even stride, preserving order.
pub fn subsample(points: &[[f64; 2]], n: usize) -> Vec<[f64; 2]> {
    if points.len() <= n {
        return points.to_vec();
    }
    (0..n).map(|k| points[k * points.len() / n]).collect()
}

pub fn export(kind: ExportKind, cfg: &RunConfig) -> Result<()> {
    let io_err = |e: io::Error| CliError::Core(e.into());
    match kind {
        ExportKind::Heatmap => {
            let grid = cfg.periodic_grid()?;
            let density = cfg.density.density(grid, cfg.effective_ratio())?;
            output(cfg.out.as_deref(), |w| write_pgm(density.field(), w).map_err(io_err))
        }
        ExportKind::Mesh => {
            let file = load_map(cfg)?;
            output(cfg.out.as_deref(), |w| write_mesh_csv(&file.map, w).map_err(io_err))
        }
        ExportKind::Scatter => {
            let points = read_sample_file(cfg)?;
            let picked = subsample(&points, cfg.n);
            output(cfg.out.as_deref(), |w| Ok(write_samples_csv(w, &picked)?))
        }
    }
}
