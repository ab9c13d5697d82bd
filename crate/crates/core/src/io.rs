//! On-disk formats.
//!
//! **OITF** (fields): magic `OITF1\n`, `u32` n_x, `u32` n_y, `u8` component
//! count, then each component as row-major little-endian `f64`.
//!
//! **OITM** (transport maps): magic `OITM1\n`, `u32` n_x, `u32` n_y, `u32` K,
//! `f64` θ, `f64` residual, `u32` id length, id bytes (UTF-8), then three
//! `f64` diagnostic arrays of length K (CFL number, Poisson source mean,
//! min Jacobian), then four fields of n_x·n_y `f64`: forward d_x, d_y and
//! inverse d_x, d_y. All integers and floats little-endian.
//!
//! **CSV** (samples): header `x,y`, one point per line, shortest round-trip
//! decimal formatting.

use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{OitError, Result};
use crate::grid::{DiffeoMap, PeriodicGrid, ScalarField, VectorField};
use crate::sampler::SampleBatch;
use crate::transport::{StepDiagnostics, TransportResult};

pub const FIELD_MAGIC: &[u8; 6] = b"OITF1\n";
pub const MAP_MAGIC: &[u8; 6] = b"OITM1\n";

fn put_f64s(out: &mut Vec<u8>, vals: &[f64]) {
    out.reserve(vals.len() * 8);
    for v in vals {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| OitError::Format(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(n.checked_mul(8).ok_or_else(|| OitError::Format("length overflow".into()))?)?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn finish(&self) -> Result<()> {
        if self.pos == self.buf.len() {
            Ok(())
        } else {
            Err(OitError::Format(format!(
                "{} trailing bytes",
                self.buf.len() - self.pos
            )))
        }
    }
}

fn read_grid(c: &mut Cursor<'_>) -> Result<PeriodicGrid> {
    let nx = c.u32()? as usize;
    let ny = c.u32()? as usize;
    PeriodicGrid::new(nx, ny).map_err(|e| OitError::Format(e.to_string()))
}

fn check_magic(c: &mut Cursor<'_>, magic: &[u8; 6]) -> Result<()> {
    if c.take(6).map_err(|_| OitError::Format("file too short for header".into()))? != magic {
        return Err(OitError::Format(format!(
            "bad magic, expected {:?}",
            String::from_utf8_lossy(&magic[..5])
        )));
    }
    Ok(())
}

/// Encodes one or more same-grid components as an OITF byte string.
pub fn encode_field(components: &[&ScalarField]) -> Result<Vec<u8>> {
    let first = components
        .first()
        .ok_or_else(|| OitError::InvalidInput("no components to encode".into()))?;
    let grid = *first.grid();
    if components.len() > u8::MAX as usize {
        return Err(OitError::InvalidInput("too many components".into()));
    }
    let mut out = Vec::with_capacity(15 + components.len() * grid.len() * 8);
    out.extend_from_slice(FIELD_MAGIC);
    out.extend_from_slice(&(grid.nx() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.ny() as u32).to_le_bytes());
    out.push(components.len() as u8);
    for c in components {
        grid.ensure_same(c.grid())?;
        put_f64s(&mut out, c.values());
    }
    Ok(out)
}

/// Decodes an OITF byte string into its components.
pub fn decode_field(bytes: &[u8]) -> Result<Vec<ScalarField>> {
    let mut c = Cursor::new(bytes);
    check_magic(&mut c, FIELD_MAGIC)?;
    let grid = read_grid(&mut c)?;
    let count = c.u8()? as usize;
    if count == 0 {
        return Err(OitError::Format("zero components".into()));
    }
    let comps = (0..count)
        .map(|_| {
            let vals = c.f64s(grid.len())?;
            ScalarField::new(grid, vals).map_err(|e| OitError::Format(e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    c.finish()?;
    Ok(comps)
}

pub fn write_scalar_field(path: &Path, f: &ScalarField) -> Result<()> {
    fs::write(path, encode_field(&[f])?)?;
    Ok(())
}

pub fn read_scalar_field(path: &Path) -> Result<ScalarField> {
    let mut comps = decode_field(&fs::read(path)?)?;
    if comps.len() != 1 {
        return Err(OitError::Format(format!(
            "expected a scalar field, found {} components",
            comps.len()
        )));
    }
    Ok(comps.remove(0))
}

pub fn write_vector_field(path: &Path, v: &VectorField) -> Result<()> {
    fs::write(path, encode_field(&[v.x(), v.y()])?)?;
    Ok(())
}

/// A transport map as stored on disk.
#[derive(Clone, Debug, PartialEq)]
pub struct MapFile {
    pub map: DiffeoMap,
    pub steps: usize,
    pub theta: f64,
    pub residual: f64,
    pub density_id: String,
    pub diagnostics: StepDiagnostics,
}

impl MapFile {
    pub fn from_result(result: &TransportResult, density_id: impl Into<String>) -> Self {
        Self {
            map: result.map.clone(),
            steps: result.steps,
            theta: result.theta,
            residual: result.residual,
            density_id: density_id.into(),
            diagnostics: result.diagnostics.clone(),
        }
    }

    pub fn encode(&self) -> Result<Vec<u8>> {
        let g = *self.map.grid();
        let k = self.steps;
        let d = &self.diagnostics;
        if d.cfl.len() != k || d.poisson_mean.len() != k || d.min_jacobian.len() != k {
            return Err(OitError::InvalidInput("diagnostics length differs from step count".into()));
        }
        let inv = self
            .map
            .inverse_displacement()
            .ok_or_else(|| OitError::InvalidInput("map file requires the inverse displacement".into()))?;
        let id = self.density_id.as_bytes();
        let mut out = Vec::with_capacity(64 + id.len() + 8 * (3 * k + 4 * g.len()));
        out.extend_from_slice(MAP_MAGIC);
        out.extend_from_slice(&(g.nx() as u32).to_le_bytes());
        out.extend_from_slice(&(g.ny() as u32).to_le_bytes());
        out.extend_from_slice(&u32::try_from(k).map_err(|_| OitError::InvalidInput("too many steps".into()))?.to_le_bytes());
        out.extend_from_slice(&self.theta.to_le_bytes());
        out.extend_from_slice(&self.residual.to_le_bytes());
        out.extend_from_slice(&(id.len() as u32).to_le_bytes());
        out.extend_from_slice(id);
        put_f64s(&mut out, &d.cfl);
        put_f64s(&mut out, &d.poisson_mean);
        put_f64s(&mut out, &d.min_jacobian);
        let fwd = self.map.displacement();
        for f in [fwd.x(), fwd.y(), inv.x(), inv.y()] {
            put_f64s(&mut out, f.values());
        }
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut c = Cursor::new(bytes);
        check_magic(&mut c, MAP_MAGIC)?;
        let grid = read_grid(&mut c)?;
        let steps = c.u32()? as usize;
        let theta = c.f64()?;
        let residual = c.f64()?;
        let id_len = c.u32()? as usize;
        let density_id = String::from_utf8(c.take(id_len)?.to_vec())
            .map_err(|_| OitError::Format("density id is not UTF-8".into()))?;
        let diagnostics = StepDiagnostics {
            cfl: c.f64s(steps)?,
            poisson_mean: c.f64s(steps)?,
            min_jacobian: c.f64s(steps)?,
        };
        let mut field = || -> Result<ScalarField> {
            ScalarField::new(grid, c.f64s(grid.len())?).map_err(|e| OitError::Format(e.to_string()))
        };
        let fwd = VectorField::new(field()?, field()?)?;
        let inv = VectorField::new(field()?, field()?)?;
        c.finish()?;
        let map = DiffeoMap::new(fwd, Some(inv)).map_err(|e| OitError::Format(e.to_string()))?;
        Ok(Self {
            map,
            steps,
            theta,
            residual,
            density_id,
            diagnostics,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.encode()?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::decode(&bytes)
    }
}

/// Writes `x,y` CSV. `{}` on `f64` prints the shortest string that parses
/// back to the same value.
pub fn write_samples_csv<W: Write>(out: W, points: &[[f64; 2]]) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "x,y")?;
    for p in points {
        writeln!(w, "{},{}", p[0], p[1])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_samples_csv<R: Read>(input: R) -> Result<Vec<[f64; 2]>> {
    let mut lines = BufReader::new(input).lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == "x,y" => {}
        _ => return Err(OitError::Format("sample CSV must start with header x,y".into())),
    }
    let mut out = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse = |s: Option<&str>| -> Result<f64> {
            s.and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| OitError::Format(format!("bad sample on line {}", n + 2)))
        };
        let mut it = line.split(',');
        let x = parse(it.next())?;
        let y = parse(it.next())?;
        out.push([x, y]);
    }
    Ok(out)
}

/// Binary sample variant: OITF layout with `n_x = N`, `n_y = 1` and two
/// components (all x, then all y). The minimum grid size does not apply.
pub fn encode_samples_binary(batch: &SampleBatch) -> Vec<u8> {
    let n = batch.points.len();
    let mut out = Vec::with_capacity(15 + 16 * n);
    out.extend_from_slice(FIELD_MAGIC);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&1u32.to_le_bytes());
    out.push(2);
    let xs: Vec<f64> = batch.points.iter().map(|p| p[0]).collect();
    let ys: Vec<f64> = batch.points.iter().map(|p| p[1]).collect();
    put_f64s(&mut out, &xs);
    put_f64s(&mut out, &ys);
    out
}

pub fn decode_samples_binary(bytes: &[u8]) -> Result<Vec<[f64; 2]>> {
    let mut c = Cursor::new(bytes);
    check_magic(&mut c, FIELD_MAGIC)?;
    let n = c.u32()? as usize;
    if c.u32()? != 1 || c.u8()? != 2 {
        return Err(OitError::Format("binary samples must be N x 1 with two components".into()));
    }
    let xs = c.f64s(n)?;
    let ys = c.f64s(n)?;
    c.finish()?;
    Ok(xs.into_iter().zip(ys).map(|(x, y)| [x, y]).collect())
}
