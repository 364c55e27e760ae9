//! Field snapshots (flat little-endian binary plus JSON sidecar) and probe CSV streams.

use super::grid::{Grid, GridField};
use super::ops::NormProbe;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

pub const PROBE_HEADER: [&str; 6] = ["t", "unknown", "l1", "l2", "linf", "h1"];
const HEADER_BYTES: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotMeta {
    pub n: usize,
    pub points: usize,
    pub half_length: f64,
    pub t: f64,
    pub label: String,
    pub header_bytes: usize,
    pub dtype: String,
    pub layout: String,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes `n, N` (u64) and `L, t` (f64), then the values, all little-endian.
pub fn write_snapshot(path: &Path, field: &GridField, t: f64, label: &str) -> Result<()> {
    let g = field.grid;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&(g.n as u64).to_le_bytes())?;
    w.write_all(&(g.points as u64).to_le_bytes())?;
    w.write_all(&g.half_length.to_le_bytes())?;
    w.write_all(&t.to_le_bytes())?;
    for v in &field.values {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    let meta = SnapshotMeta {
        n: g.n,
        points: g.points,
        half_length: g.half_length,
        t,
        label: label.to_string(),
        header_bytes: HEADER_BYTES,
        dtype: "f64-le".into(),
        layout: if g.n == 1 {
            "x".into()
        } else {
            "row-major [x][y]".into()
        },
    };
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)? + "\n")?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(GridField, f64)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut buf = [0u8; 8];
    let mut next = |r: &mut BufReader<File>| -> Result<[u8; 8]> {
        r.read_exact(&mut buf)?;
        Ok(buf)
    };
    let n = u64::from_le_bytes(next(&mut r)?) as usize;
    let points = u64::from_le_bytes(next(&mut r)?) as usize;
    let half_length = f64::from_le_bytes(next(&mut r)?);
    let t = f64::from_le_bytes(next(&mut r)?);
    let grid = Grid::new(n, half_length, points)?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != grid.len() * 8 {
        return Err(Error::Parse(format!(
            "snapshot {} holds {} bytes of data, expected {}",
            path.display(),
            bytes.len(),
            grid.len() * 8
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((GridField { grid, values }, t))
}

/// CSV sink for [`NormProbe`] rows.
pub struct ProbeWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl ProbeWriter<File> {
    pub fn create(path: &Path) -> Result<Self> {
        Self::new(File::create(path)?)
    }
}

impl<W: Write> ProbeWriter<W> {
    pub fn new(w: W) -> Result<Self> {
        let mut inner = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        inner.write_record(PROBE_HEADER)?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, p: &NormProbe) -> Result<()> {
        self.inner.serialize(p)?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush()?;
        self.inner.into_inner().map_err(|e| Error::Io(e.to_string()))
    }
}

pub fn write_probes(path: &Path, probes: &[NormProbe]) -> Result<()> {
    let mut w = ProbeWriter::create(path)?;
    for p in probes {
        w.write(p)?;
    }
    w.finish()?;
    Ok(())
}

pub fn read_probes(path: &Path) -> Result<Vec<NormProbe>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != PROBE_HEADER {
        return Err(Error::Parse(format!("unexpected probe header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}
