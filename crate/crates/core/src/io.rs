//! OWF1 field snapshots and CSV tables.
//!
//! Snapshot layout, all little-endian: `b"OWF1"`, `dims: u32`,
//! `n_points: [u64; dims]`, `extent: [f64; 2 * dims]` as (min, max) pairs,
//! `time, hbar, mass: f64`, then phi_r and phi_c as f64 arrays.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::SchrodingerField;
use crate::grid::{Axis, Grid};
use crate::observables::ObservableRecord;

pub const MAGIC: &[u8; 4] = b"OWF1";

pub fn encode_snapshot(field: &SchrodingerField) -> Vec<u8> {
    let g = &field.grid;
    let mut out = Vec::with_capacity(64 + 16 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(g.dims() as u32).to_le_bytes());
    for a in g.axes() {
        out.extend_from_slice(&(a.n as u64).to_le_bytes());
    }
    for a in g.axes() {
        out.extend_from_slice(&a.min.to_le_bytes());
        out.extend_from_slice(&a.max.to_le_bytes());
    }
    for x in [field.time, field.hbar, field.mass] {
        out.extend_from_slice(&x.to_le_bytes());
    }
    for x in field.phi_r.iter().chain(&field.phi_c) {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        if end > self.buf.len() {
            return Err(Error::Format(format!("truncated at byte {}", self.pos)));
        }
        let mut a = [0u8; N];
        a.copy_from_slice(&self.buf[self.pos..end]);
        self.pos = end;
        Ok(a)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        (0..n).map(|_| self.f64()).collect()
    }
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<SchrodingerField> {
    let mut c = Cursor { buf: bytes, pos: 0 };
    if &c.take::<4>()? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let dims = u32::from_le_bytes(c.take()?) as usize;
    if dims == 0 || dims > 2 {
        return Err(Error::Format(format!("dims = {dims}")));
    }
    let ns: Vec<usize> = (0..dims)
        .map(|_| c.take::<8>().map(|b| u64::from_le_bytes(b) as usize))
        .collect::<Result<_>>()?;
    let mut axes = Vec::with_capacity(dims);
    for &n in &ns {
        let (min, max) = (c.f64()?, c.f64()?);
        axes.push(Axis::new(min, max, n)?);
    }
    let grid = Grid::new(axes)?;
    let (time, hbar, mass) = (c.f64()?, c.f64()?, c.f64()?);
    let phi_r = c.f64s(grid.len())?;
    let phi_c = c.f64s(grid.len())?;
    if c.pos != bytes.len() {
        return Err(Error::Format(format!("{} trailing bytes", bytes.len() - c.pos)));
    }
    SchrodingerField::new(grid, phi_r, phi_c, time, hbar, mass)
}

pub fn write_snapshot(field: &SchrodingerField, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode_snapshot(field))?;
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<SchrodingerField> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    decode_snapshot(&bytes)
}

/// CSV writer; floats use Rust's shortest round-trip formatting.
pub struct Table {
    w: csv::Writer<BufWriter<File>>,
}

impl Table {
    pub fn create(path: &Path, header: &[String]) -> Result<Self> {
        let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
        w.write_record(header)?;
        Ok(Self { w })
    }

    pub fn row(&mut self, cells: &[String]) -> Result<()> {
        self.w.write_record(cells)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.w.flush()?;
        Ok(())
    }
}

pub fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

pub fn write_observables(path: &Path, records: &[ObservableRecord]) -> Result<()> {
    let mut t = Table::create(
        path,
        &header(&["time", "norm", "energy", "q_mean", "p_mean", "continuity_residual"]),
    )?;
    for r in records {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
        t.row(&[
            r.time.to_string(),
            r.norm.to_string(),
            r.energy.to_string(),
            join(&r.position_mean),
            join(&r.momentum_mean),
            r.continuity_residual.to_string(),
        ])?;
    }
    t.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn snapshot_round_trip_is_exact() {
        let g = Grid::plane((-4.0, 4.0, 16), (-3.0, 5.0, 8)).unwrap();
        let f = crate::field::init_coherent_state(&g, &[0.1, 0.9], &[1.0, -0.5], &[Complex64::new(2.0, 0.3)], 0.7, 1.3)
            .unwrap();
        let back = decode_snapshot(&encode_snapshot(&f)).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn rejects_corrupt_snapshots() {
        let g = Grid::line(-4.0, 4.0, 8).unwrap();
        let f = SchrodingerField::new(g, vec![1.0; 8], vec![0.0; 8], 0.0, 1.0, 1.0).unwrap();
        let mut b = encode_snapshot(&f);
        assert!(decode_snapshot(&b[..b.len() - 1]).is_err());
        b[0] = b'X';
        assert!(decode_snapshot(&b).is_err());
    }
}
