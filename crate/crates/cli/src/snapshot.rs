//! Bit-exact binary snapshots of the prognostic state.
//!
//! Layout (all integers and floats little-endian):
//! magic `PECH`, format version `u32`, `nx ny nz` as `u32`, `h` and `t` as
//! `f64`, then the `v1`, `v2`, `T` arrays as `f64` in x-fastest, then y,
//! then z order.

use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use pe_core::{BasisTag, Grid, GridSpec, ScalarField3, State, VectorFieldH};

pub const MAGIC: [u8; 4] = *b"PECH";
pub const VERSION: u32 = 1;

fn write_field(w: &mut impl Write, f: &ScalarField3) -> Result<()> {
    // storage is (nz, ny, nx) C-order, i.e. exactly x-fastest then y then z
    let slice = f.values().as_slice().expect("contiguous");
    let mut buf = Vec::with_capacity(slice.len() * 8);
    for v in slice {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Write a snapshot; the round trip through [`read_snapshot`] is bit-exact.
pub fn write_snapshot(state: &State, path: &Path) -> Result<()> {
    let g = state.grid();
    let file = std::fs::File::create(path)
        .with_context(|| format!("cannot create snapshot `{}`", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    for dim in [g.nx() as u32, g.ny() as u32, g.nz() as u32] {
        w.write_all(&dim.to_le_bytes())?;
    }
    w.write_all(&g.h().to_le_bytes())?;
    w.write_all(&state.t.to_le_bytes())?;
    write_field(&mut w, &state.v.u1)?;
    write_field(&mut w, &state.v.u2)?;
    write_field(&mut w, &state.temp)?;
    w.flush()?;
    Ok(())
}

/// Header of a snapshot file.
#[derive(Debug, Clone, Copy)]
pub struct SnapshotInfo {
    pub version: u32,
    pub nx: u32,
    pub ny: u32,
    pub nz: u32,
    pub h: f64,
    pub t: f64,
}

fn read_exact(r: &mut impl Read, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf).map_err(|_| anyhow::anyhow!("snapshot truncated while reading {what}"))
}

fn read_u32(r: &mut impl Read, what: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, what)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read, what: &str) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b, what)?;
    Ok(f64::from_le_bytes(b))
}

pub fn read_header(r: &mut impl Read) -> Result<SnapshotInfo> {
    let mut magic = [0u8; 4];
    read_exact(r, &mut magic, "magic")?;
    if magic != MAGIC {
        bail!("not a snapshot file: bad magic {magic:?}");
    }
    let version = read_u32(r, "version")?;
    if version != VERSION {
        bail!("unsupported snapshot version {version} (expected {VERSION})");
    }
    let nx = read_u32(r, "nx")?;
    let ny = read_u32(r, "ny")?;
    let nz = read_u32(r, "nz")?;
    let h = read_f64(r, "h")?;
    let t = read_f64(r, "t")?;
    if nx == 0 || ny == 0 || nz == 0 {
        bail!("snapshot declares a zero dimension ({nx} x {ny} x {nz})");
    }
    if !(h > 0.0) || !h.is_finite() {
        bail!("snapshot declares an invalid depth h = {h}");
    }
    Ok(SnapshotInfo { version, nx, ny, nz, h, t })
}

pub fn info(path: &Path) -> Result<SnapshotInfo> {
    let file = std::fs::File::open(path)
        .with_context(|| format!("cannot open snapshot `{}`", path.display()))?;
    let mut r = std::io::BufReader::new(file);
    read_header(&mut r)
}

fn read_field(
    r: &mut impl Read,
    grid: &std::sync::Arc<Grid>,
    tag: BasisTag,
    what: &str,
) -> Result<ScalarField3> {
    let n = grid.nx() * grid.ny() * grid.nz();
    let mut buf = vec![0u8; n * 8];
    read_exact(r, &mut buf, what)?;
    let mut data = Vec::with_capacity(n);
    for chunk in buf.chunks_exact(8) {
        data.push(f64::from_le_bytes(chunk.try_into().unwrap()));
    }
    let arr = ndarray_from_vec(grid, data);
    Ok(ScalarField3::from_values(grid, tag, arr).expect("shape checked"))
}

fn ndarray_from_vec(grid: &Grid, data: Vec<f64>) -> ndarray::Array3<f64> {
    ndarray::Array3::from_shape_vec((grid.nz(), grid.ny(), grid.nx()), data)
        .expect("length checked")
}

/// Read a snapshot back into a state on a freshly built grid.
pub fn read_snapshot(path: &Path, dealias: bool) -> Result<State> {
    let file = std::fs::File::open(path)
        .with_context(|| format!("cannot open snapshot `{}`", path.display()))?;
    let mut r = std::io::BufReader::new(file);
    let hdr = read_header(&mut r)?;
    let grid = Grid::new(GridSpec::new(
        hdr.nx as usize,
        hdr.ny as usize,
        hdr.nz as usize,
        hdr.h,
        dealias,
    ))
    .map_err(|e| anyhow::anyhow!("{e}"))?;
    let u1 = read_field(&mut r, &grid, BasisTag::Cosine, "v1")?;
    let u2 = read_field(&mut r, &grid, BasisTag::Cosine, "v2")?;
    let temp = read_field(&mut r, &grid, BasisTag::Sine, "T")?;
    let mut trailing = [0u8; 1];
    if r.read(&mut trailing)? != 0 {
        bail!("snapshot has trailing bytes beyond the declared fields");
    }
    let v = VectorFieldH::new(u1, u2).map_err(|e| anyhow::anyhow!("{e}"))?;
    State::new(v, temp, hdr.t).map_err(|e| anyhow::anyhow!("{e}"))
}

// re-export ndarray for the helper above
use pe_core::ndarray;
