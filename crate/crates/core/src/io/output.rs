// SPDX-License-Identifier: Apache-2.0

//! Output files: CSV tables, heatmaps, JSON summaries and checksums.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// One written file, relative to the output directory.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OutputRecord {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Writes files under one directory and records their checksums.
#[derive(Debug)]
pub struct OutputSet {
    dir: PathBuf,
    records: Vec<OutputRecord>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

impl OutputSet {
    pub fn create(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)
            .map_err(|e| Error::from(e).context(format!("creating {}", dir.display())))?;
        Ok(OutputSet {
            dir,
            records: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn records(&self) -> &[OutputRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<OutputRecord> {
        self.records
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)
            .map_err(|e| Error::from(e).context(format!("writing {}", path.display())))?;
        self.records.push(OutputRecord {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(())
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    pub fn write_csv(&mut self, name: &str, table: &Table) -> Result<()> {
        self.write_bytes(name, table.to_csv()?.as_bytes())
    }

    /// Writes `stem.txt` and `stem.pgm`; see [`heatmap_text`] and [`heatmap_pgm`].
    pub fn write_heatmap(&mut self, stem: &str, matrix: &[Vec<f64>], t_grid: &[f64]) -> Result<()> {
        let text = heatmap_text(matrix, t_grid)?;
        let pgm = heatmap_pgm(matrix)?;
        self.write_bytes(&format!("{stem}.txt"), text.as_bytes())?;
        self.write_bytes(&format!("{stem}.pgm"), &pgm)
    }
}

/// A numeric table whose first column is `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        let mut header = vec!["t".to_string()];
        header.extend(columns.iter().map(|s| s.to_string()));
        Table {
            header,
            rows: Vec::new(),
        }
    }

    pub fn with_header(header: Vec<String>) -> Self {
        Table {
            header,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, values: &[f64]) {
        let mut row = Vec::with_capacity(values.len() + 1);
        row.push(t);
        row.extend_from_slice(values);
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        if self.header.first().map(String::as_str) != Some("t") {
            return Err(Error::arg("header", "the first column must be t"));
        }
        let width = self.header.len();
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            if row.len() != width {
                return Err(Error::Dimension(format!(
                    "row of {} values for {width} columns",
                    row.len()
                )));
            }
            let cells: Vec<String> = row.iter().map(|v| format_number(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        Ok(out)
    }
}

/// Shortest round-trip representation.
pub fn format_number(v: f64) -> String {
    format!("{v:e}")
}

fn check_heatmap(matrix: &[Vec<f64>]) -> Result<(usize, usize)> {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::arg(
            "matrix",
            "heatmap needs at least one row and column",
        ));
    }
    if matrix.iter().any(|r| r.len() != cols) {
        return Err(Error::Dimension("heatmap rows differ in length".into()));
    }
    if let Some(v) = matrix
        .iter()
        .flatten()
        .find(|v| !(v.is_finite() && **v >= 0.0))
    {
        return Err(Error::arg(
            "matrix",
            format!("heatmap entries must be finite and >= 0, got {v}"),
        ));
    }
    Ok((rows, cols))
}

/// Plain-text matrix: one header line, then one row per time (ascending),
/// one column per site.
pub fn heatmap_text(matrix: &[Vec<f64>], t_grid: &[f64]) -> Result<String> {
    let (rows, cols) = check_heatmap(matrix)?;
    if t_grid.len() != rows {
        return Err(Error::Dimension(format!(
            "{rows} heatmap rows for {} times",
            t_grid.len()
        )));
    }
    let mut out = format!(
        "# rows: t = {} .. {} ({rows} ascending); columns: site 0 .. {}\n",
        format_number(t_grid[0]),
        format_number(t_grid[rows - 1]),
        cols - 1
    );
    for row in matrix {
        let cells: Vec<String> = row.iter().map(|v| format_number(*v)).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    Ok(out)
}

/// Binary 8-bit graymap, `0 ↦ 255` (white) and the maximum `↦ 0` (black).
pub fn heatmap_pgm(matrix: &[Vec<f64>]) -> Result<Vec<u8>> {
    let (rows, cols) = check_heatmap(matrix)?;
    let max = matrix.iter().flatten().copied().fold(0.0, f64::max);
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    for v in matrix.iter().flatten() {
        let level = if max > 0.0 {
            255.0 * (1.0 - v / max)
        } else {
            255.0
        };
        out.push(level.round().clamp(0.0, 255.0) as u8);
    }
    Ok(out)
}
