//! Snapshot persistence and diagnostics output.
//!
//! Snapshot layout (little-endian throughout): magic `INLS`, u32 version 1,
//! u64 n, f64 half_width, f64 time, then n (re, im) f64 pairs. Byte-exact
//! round trips on any platform.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::field::ComplexField;
use crate::spectral::grid::Grid;

const MAGIC: [u8; 4] = *b"INLS";
const VERSION: u32 = 1;

pub fn write_snapshot(field: &ComplexField, time: f64, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(field.grid().n() as u64).to_le_bytes())?;
    w.write_all(&field.grid().half_width().to_le_bytes())?;
    w.write_all(&time.to_le_bytes())?;
    for z in field.values() {
        w.write_all(&z.re.to_le_bytes())?;
        w.write_all(&z.im.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(ComplexField, f64)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(|_| truncated(path))?;
    if magic != MAGIC {
        return Err(Error::Format(format!("{}: bad magic", path.display())));
    }
    let version = read_u32(&mut r, path)?;
    if version != VERSION {
        return Err(Error::Format(format!(
            "{}: unsupported snapshot version {version}",
            path.display()
        )));
    }
    let n = read_u64(&mut r, path)? as usize;
    let half_width = read_f64(&mut r, path)?;
    let time = read_f64(&mut r, path)?;
    let grid = Grid::new(n, half_width)
        .map_err(|e| Error::Format(format!("{}: invalid header: {e}", path.display())))?;
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let re = read_f64(&mut r, path)?;
        let im = read_f64(&mut r, path)?;
        values.push(Complex64::new(re, im));
    }
    let mut tail = [0u8; 1];
    if r.read(&mut tail)? != 0 {
        return Err(Error::Format(format!("{}: trailing bytes", path.display())));
    }
    Ok((ComplexField::from_values(&grid, values)?, time))
}

fn truncated(path: &Path) -> Error {
    Error::Format(format!("{}: truncated snapshot", path.display()))
}

fn read_u32(r: &mut impl Read, path: &Path) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b).map_err(|_| truncated(path))?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read, path: &Path) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|_| truncated(path))?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut impl Read, path: &Path) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b).map_err(|_| truncated(path))?;
    Ok(f64::from_le_bytes(b))
}

/// One row of the standard diagnostics time series.
#[derive(Clone, Copy, Debug)]
pub struct DiagRow {
    pub time: f64,
    pub mass: f64,
    pub momentum: f64,
    pub e2: f64,
    pub e3: f64,
    pub e4: f64,
    pub sobolev_quarter: f64,
    pub hardy_leak: f64,
}

/// Fixed-column CSV with 17 significant digits per value.
pub fn write_diagnostics_csv(rows: &[DiagRow], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "time,mass,momentum,e2,e3,e4,sobolev_quarter,hardy_leak")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            fmt(r.time),
            fmt(r.mass),
            fmt(r.momentum),
            fmt(r.e2),
            fmt(r.e3),
            fmt(r.e4),
            fmt(r.sobolev_quarter),
            fmt(r.hardy_leak)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// 17 significant digits: enough to reproduce the f64 bit pattern.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Generic CSV writer for study outputs: a header plus rows of equal width.
pub fn write_csv(header: &[&str], rows: &[Vec<f64>], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::Format("csv row width does not match header".into()));
        }
        let cells: Vec<String> = row.iter().map(|&v| fmt(v)).collect();
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Pass/fail CSV for check batteries.
pub fn write_check_csv(rows: &[crate::operators::CheckRow], path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "name,value,threshold,pass")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.name, fmt(r.value), fmt(r.threshold), r.pass)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_json(value: &serde_json::Value, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)
        .map_err(|e| Error::Format(format!("json: {e}")))?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn snapshot_round_trip_is_bit_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("u.snap");
        let grid = Grid::new(64, 12.5).unwrap();
        let u = crate::corpus::random_band_limited(&grid, 20, 99);
        write_snapshot(&u, 0.625, &path).unwrap();
        let (v, t) = read_snapshot(&path).unwrap();
        assert_eq!(t, 0.625);
        assert_eq!(u.values(), v.values());
        assert_eq!(v.grid().half_width(), 12.5);
    }

    #[test]
    fn bad_magic_and_truncation_are_errors() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.snap");
        std::fs::write(&path, b"NOPE").unwrap();
        assert!(matches!(read_snapshot(&path), Err(Error::Format(_))));

        let grid = Grid::new(64, 1.0).unwrap();
        let u = ComplexField::zeros(&grid);
        let path2 = dir.path().join("trunc.snap");
        write_snapshot(&u, 0.0, &path2).unwrap();
        let bytes = std::fs::read(&path2).unwrap();
        std::fs::write(&path2, &bytes[..bytes.len() - 5]).unwrap();
        assert!(matches!(read_snapshot(&path2), Err(Error::Format(_))));
    }

    #[test]
    fn header_n_must_be_valid() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("n.snap");
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"INLS");
        bytes.extend_from_slice(&1u32.to_le_bytes());
        bytes.extend_from_slice(&15u64.to_le_bytes()); // not a power of two
        bytes.extend_from_slice(&1.0f64.to_le_bytes());
        bytes.extend_from_slice(&0.0f64.to_le_bytes());
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_snapshot(&path), Err(Error::Format(_))));
    }

    #[test]
    fn fmt_round_trips_f64() {
        for &v in &[1.0, -0.1, 3.141592653589793, 1e-300, 6.02e23] {
            let s = fmt(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(v, back, "{s}");
        }
    }
}
