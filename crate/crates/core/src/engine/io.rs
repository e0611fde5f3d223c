//! Path export.
//!
//! CSV: optional `# config: <json>` line, then `path_id,t,value` rows.
//!
//! Binary (version 1), all integers and floats little-endian:
//!
//! ```text
//! offset  size        field
//! 0       4           magic "CKLS"
//! 4       1           version = 1
//! 5       8           n_paths (u64)
//! 13      8           n_points (u64)
//! 21      4           config_len (u32)
//! 25      config_len  config echo, UTF-8 JSON (may be empty)
//! ..      8*n_points  time column (f64)
//! ..      8*n_paths*n_points  values, one column of n_points per path (f64)
//! ```

use std::io::{self, Read, Write};

use serde::Serialize;

use super::euler::Path;

pub const MAGIC: &[u8; 4] = b"CKLS";
pub const VERSION: u8 = 1;

/// Values of several paths on a shared time axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathTable {
    pub times: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
}

impl PathTable {
    pub fn from_paths(paths: &[Path]) -> Self {
        let times = paths.first().map(|p| p.grid.times()).unwrap_or_default();
        Self { times, rows: paths.iter().map(|p| p.values.clone()).collect() }
    }

    /// One value per path at a single time.
    pub fn terminal(t: f64, values: &[f64]) -> Self {
        Self { times: vec![t], rows: values.iter().map(|&v| vec![v]).collect() }
    }
}

pub fn write_csv<W: Write>(table: &PathTable, config: Option<&str>, mut w: W) -> io::Result<()> {
    if let Some(cfg) = config {
        writeln!(w, "# config: {cfg}")?;
    }
    writeln!(w, "path_id,t,value")?;
    for (id, row) in table.rows.iter().enumerate() {
        for (t, v) in table.times.iter().zip(row) {
            writeln!(w, "{id},{t},{v}")?;
        }
    }
    Ok(())
}

pub fn write_binary<W: Write>(table: &PathTable, config: Option<&str>, mut w: W) -> io::Result<()> {
    let cfg = config.unwrap_or("").as_bytes();
    let n_points = table.times.len();
    if table.rows.iter().any(|r| r.len() != n_points) {
        return Err(io::Error::new(io::ErrorKind::InvalidInput, "ragged path table"));
    }
    w.write_all(MAGIC)?;
    w.write_all(&[VERSION])?;
    w.write_all(&(table.rows.len() as u64).to_le_bytes())?;
    w.write_all(&(n_points as u64).to_le_bytes())?;
    let cfg_len = u32::try_from(cfg.len()).map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "config too large"))?;
    w.write_all(&cfg_len.to_le_bytes())?;
    w.write_all(cfg)?;
    for t in &table.times {
        w.write_all(&t.to_le_bytes())?;
    }
    for row in &table.rows {
        for v in row {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> io::Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

/// Read a version-1 binary file back into a table and its config echo.
pub fn read_binary<R: Read>(mut r: R) -> io::Result<(PathTable, String)> {
    let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
    if &read_array::<4, _>(&mut r)? != MAGIC {
        return Err(bad("bad magic"));
    }
    if read_array::<1, _>(&mut r)?[0] != VERSION {
        return Err(bad("unsupported version"));
    }
    let n_paths = u64::from_le_bytes(read_array(&mut r)?) as usize;
    let n_points = u64::from_le_bytes(read_array(&mut r)?) as usize;
    let cfg_len = u32::from_le_bytes(read_array(&mut r)?) as usize;
    let mut cfg = vec![0u8; cfg_len];
    r.read_exact(&mut cfg)?;
    let cfg = String::from_utf8(cfg).map_err(|_| bad("config is not UTF-8"))?;
    let mut read_f64s = |n: usize| -> io::Result<Vec<f64>> {
        (0..n).map(|_| Ok(f64::from_le_bytes(read_array(&mut r)?))).collect()
    };
    let times = read_f64s(n_points)?;
    let rows = (0..n_paths).map(|_| read_f64s(n_points)).collect::<io::Result<Vec<_>>>()?;
    Ok((PathTable { times, rows }, cfg))
}
