//! Field snapshots on disk.
//!
//! Two encodings carry the same content: the box side `period`, the lattice
//! size `n`, the rank (1 for scalars, 3 for vectors) and one record per mode
//! `(k1, k2, k3, re, im)` with one `(re, im)` pair per component.
//!
//! Binary layout, every number little-endian:
//!
//! ```text
//! magic    8 bytes  "NSKCSNAP"
//! version  u32      1
//! period   f64
//! n        u32
//! rank     u32
//! records  n^3 x { k1 i32, k2 i32, k3 i32, rank x { re f64, im f64 } }
//! ```
//!
//! Records appear in storage order (last axis fastest).
//!
//! CSV layout: two comment lines `# nskc-snapshot v1` and
//! `# period=<f64> n=<int> rank=<int>`, a column header, then one row per
//! non-zero mode. Absent modes are zero on reading. Floats are written in
//! shortest round-trip form.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{NskError, Result};
use crate::C64;

use super::field::SpectralField;
use super::grid::GridSpec;

const MAGIC: &[u8; 8] = b"NSKCSNAP";
const VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SnapshotFormat {
    Binary,
    Csv,
}

impl SnapshotFormat {
    /// Picks the format from a file extension (`.csv` or anything else).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Self::Csv,
            _ => Self::Binary,
        }
    }
}

/// Scalar or vector field read back from disk.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub grid: GridSpec,
    pub comps: Vec<SpectralField>,
}

impl Snapshot {
    pub fn rank(&self) -> usize {
        self.comps.len()
    }
}

pub fn write_snapshot(path: &Path, format: SnapshotFormat, comps: &[&SpectralField]) -> Result<()> {
    let grid = match comps {
        [first, rest @ ..] if matches!(comps.len(), 1 | 3) => {
            if rest.iter().any(|c| c.grid() != first.grid()) {
                return Err(NskError::GridMismatch);
            }
            *first.grid()
        }
        _ => {
            return Err(NskError::Format(format!(
                "rank {} is not 1 or 3",
                comps.len()
            )))
        }
    };
    let mut w = BufWriter::new(File::create(path)?);
    match format {
        SnapshotFormat::Binary => {
            w.write_all(MAGIC)?;
            w.write_all(&VERSION.to_le_bytes())?;
            w.write_all(&grid.period().to_le_bytes())?;
            w.write_all(&(grid.n() as u32).to_le_bytes())?;
            w.write_all(&(comps.len() as u32).to_le_bytes())?;
            for idx in 0..grid.len() {
                for k in grid.mode(idx) {
                    w.write_all(&(k as i32).to_le_bytes())?;
                }
                for c in comps {
                    let z = c.coeffs()[idx];
                    w.write_all(&z.re.to_le_bytes())?;
                    w.write_all(&z.im.to_le_bytes())?;
                }
            }
        }
        SnapshotFormat::Csv => {
            writeln!(w, "# nskc-snapshot v{VERSION}")?;
            writeln!(
                w,
                "# period={} n={} rank={}",
                grid.period(),
                grid.n(),
                comps.len()
            )?;
            if comps.len() == 1 {
                writeln!(w, "k1,k2,k3,re,im")?;
            } else {
                writeln!(w, "k1,k2,k3,re0,im0,re1,im1,re2,im2")?;
            }
            for idx in 0..grid.len() {
                if comps.iter().all(|c| c.coeffs()[idx] == C64::default()) {
                    continue;
                }
                let [k1, k2, k3] = grid.mode(idx);
                write!(w, "{k1},{k2},{k3}")?;
                for c in comps {
                    let z = c.coeffs()[idx];
                    write!(w, ",{:?},{:?}", z.re, z.im)?;
                }
                writeln!(w)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let mut head = [0u8; 8];
    let mut f = File::open(path)?;
    let n_read = f.read(&mut head)?;
    drop(f);
    if n_read == 8 && &head == MAGIC {
        read_binary(path)
    } else {
        read_csv(path)
    }
}

fn read_binary(path: &Path) -> Result<Snapshot> {
    let mut r = BufReader::new(File::open(path)?);
    let mut buf8 = [0u8; 8];
    let mut buf4 = [0u8; 4];
    r.read_exact(&mut buf8)?;
    r.read_exact(&mut buf4)?;
    let version = u32::from_le_bytes(buf4);
    if version != VERSION {
        return Err(NskError::Format(format!(
            "unsupported snapshot version {version}"
        )));
    }
    r.read_exact(&mut buf8)?;
    let period = f64::from_le_bytes(buf8);
    r.read_exact(&mut buf4)?;
    let n = u32::from_le_bytes(buf4) as usize;
    r.read_exact(&mut buf4)?;
    let rank = u32::from_le_bytes(buf4) as usize;
    if !matches!(rank, 1 | 3) {
        return Err(NskError::Format(format!("rank {rank} is not 1 or 3")));
    }
    let grid = GridSpec::new(period, n)?;
    let mut comps = vec![vec![C64::default(); grid.len()]; rank];
    for idx in 0..grid.len() {
        let mut k = [0i64; 3];
        for kk in &mut k {
            r.read_exact(&mut buf4)?;
            *kk = i32::from_le_bytes(buf4) as i64;
        }
        if k != grid.mode(idx) {
            return Err(NskError::Format(format!(
                "record {idx} holds mode {k:?} out of order"
            )));
        }
        for comp in comps.iter_mut() {
            r.read_exact(&mut buf8)?;
            let re = f64::from_le_bytes(buf8);
            r.read_exact(&mut buf8)?;
            comp[idx] = C64::new(re, f64::from_le_bytes(buf8));
        }
    }
    finish(grid, comps)
}

fn read_csv(path: &Path) -> Result<Snapshot> {
    let r = BufReader::new(File::open(path)?);
    let mut lines = r.lines();
    let mut next = || -> Result<String> {
        lines
            .next()
            .ok_or_else(|| NskError::Format("truncated snapshot header".into()))?
            .map_err(NskError::from)
    };
    let magic = next()?;
    if !magic.starts_with("# nskc-snapshot") {
        return Err(NskError::Format("missing snapshot banner".into()));
    }
    let meta = next()?;
    let (mut period, mut n, mut rank) = (None, None, None);
    for kv in meta.trim_start_matches('#').split_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| NskError::Format(format!("bad header entry {kv:?}")))?;
        let bad = |_| NskError::Format(format!("bad header value {kv:?}"));
        match k {
            "period" => period = Some(v.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            "n" => n = Some(v.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            "rank" => rank = Some(v.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            _ => {}
        }
    }
    let (Some(period), Some(n), Some(rank)) = (period, n, rank) else {
        return Err(NskError::Format("header lacks period, n or rank".into()));
    };
    if !matches!(rank, 1 | 3) {
        return Err(NskError::Format(format!("rank {rank} is not 1 or 3")));
    }
    let grid = GridSpec::new(period, n)?;
    next()?;
    let mut comps = vec![vec![C64::default(); grid.len()]; rank];
    for line in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 + 2 * rank {
            return Err(NskError::Format(format!(
                "row has {} columns: {line}",
                fields.len()
            )));
        }
        let bad = || NskError::Format(format!("unparsable row: {line}"));
        let mut k = [0i64; 3];
        for (kk, s) in k.iter_mut().zip(&fields[..3]) {
            *kk = s.parse().map_err(|_| bad())?;
        }
        let idx = grid.index_of(k).ok_or_else(bad)?;
        for (c, comp) in comps.iter_mut().enumerate() {
            let re: f64 = fields[3 + 2 * c].parse().map_err(|_| bad())?;
            let im: f64 = fields[4 + 2 * c].parse().map_err(|_| bad())?;
            comp[idx] = C64::new(re, im);
        }
    }
    finish(grid, comps)
}

fn finish(grid: GridSpec, comps: Vec<Vec<C64>>) -> Result<Snapshot> {
    let comps = comps
        .into_iter()
        .map(|c| SpectralField::from_coeffs(grid, c))
        .collect::<Result<Vec<_>>>()?;
    Ok(Snapshot { grid, comps })
}
