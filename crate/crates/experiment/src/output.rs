// Copyright 2026 The qtransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Snapshot files.
//!
//! * `Q_*.tsv`: `x_nm<TAB>Q_per_nm`, one line per grid node after a `#`
//!   header.
//! * `wigner_*.txt`: `# key = value` header lines, then one line of
//!   whitespace-separated values per kept row.
//! * `wigner_*.bin`: the 8-byte magic `QTWIGNR1`, a little-endian u64 header
//!   length, the same header text, then rows × cols little-endian f64 in
//!   row-major order.
//! * `negativity_*.json`: the negativity report.
//!
//! Wigner output keeps every `stride_x`-th node row and averages each run of
//! `bin_k` consecutive k samples, so Σ_bins mean·count·dk still equals the
//! full-resolution position marginal. Numbers are written in shortest
//! round-trip exponent form.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use ndarray::Array2;
use qtransport_core::diagnostics::{NegativeCluster, NegativityReport};
use qtransport_core::wigner::WignerField;
use qtransport_core::ChargeDensity;
use serde::Serialize;

pub const WIGNER_MAGIC: &[u8; 8] = b"QTWIGNR1";
pub const WIGNER_FORMAT_TAG: &str = "qtransport-wigner/1";

/// I/O failure tagged with the offending path.
#[derive(Debug)]
pub struct OutputError {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for OutputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl std::error::Error for OutputError {}

fn io_err(path: &Path, e: impl std::fmt::Display) -> OutputError {
    OutputError {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), OutputError> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

/// Two-column charge density file.
pub fn density_text(q: &ChargeDensity) -> String {
    let mut s = String::with_capacity(q.values().len() * 48);
    s.push_str("# x_nm\tQ_per_nm\n");
    for (x, v) in q.grid().nodes().zip(q.values()) {
        let _ = writeln!(s, "{x:e}\t{v:e}");
    }
    s
}

pub fn read_density(path: &Path) -> Result<Vec<(f64, f64)>, OutputError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let mut cols = line.split('\t');
        let parse = |c: Option<&str>| c.and_then(|v| v.trim().parse::<f64>().ok());
        match (parse(cols.next()), parse(cols.next())) {
            (Some(x), Some(q)) => out.push((x, q)),
            _ => {
                return Err(io_err(
                    path,
                    format!("line {}: expected two numbers", i + 1),
                ))
            }
        }
    }
    Ok(out)
}

/// Layout of a down-sampled Wigner file.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerLayout {
    pub time: f64,
    pub x_min: f64,
    /// Node spacing of the source grid.
    pub dx: f64,
    pub n_points: usize,
    pub k_min: f64,
    pub dk: f64,
    pub n_k: usize,
    pub stride_x: usize,
    pub bin_k: usize,
    pub convention: String,
}

impl WignerLayout {
    pub fn rows(&self) -> usize {
        self.n_points.div_ceil(self.stride_x)
    }

    pub fn cols(&self) -> usize {
        self.n_k.div_ceil(self.bin_k)
    }

    pub fn row_x(&self, r: usize) -> f64 {
        self.x_min + (r * self.stride_x) as f64 * self.dx
    }

    /// Samples averaged into column `c`.
    pub fn bin_count(&self, c: usize) -> usize {
        (self.n_k - c * self.bin_k).min(self.bin_k)
    }

    pub fn col_k(&self, c: usize) -> f64 {
        self.k_min
            + (c * self.bin_k) as f64 * self.dk
            + 0.5 * (self.bin_count(c) - 1) as f64 * self.dk
    }

    fn header(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# format = {WIGNER_FORMAT_TAG}");
        let _ = writeln!(s, "# axes = rows:x_nm cols:k_per_nm");
        let _ = writeln!(s, "# time_fs = {:e}", self.time);
        let _ = writeln!(s, "# rows = {}", self.rows());
        let _ = writeln!(s, "# cols = {}", self.cols());
        let _ = writeln!(s, "# x_min = {:e}", self.x_min);
        let _ = writeln!(s, "# dx = {:e}", self.dx);
        let _ = writeln!(s, "# n_points = {}", self.n_points);
        let _ = writeln!(s, "# stride_x = {}", self.stride_x);
        let _ = writeln!(s, "# k_min = {:e}", self.k_min);
        let _ = writeln!(s, "# dk = {:e}", self.dk);
        let _ = writeln!(s, "# n_k = {}", self.n_k);
        let _ = writeln!(s, "# bin_k = {}", self.bin_k);
        let _ = writeln!(s, "# convention = {}", self.convention);
        s
    }

    fn from_header(fields: &BTreeMap<String, String>) -> Result<Self, String> {
        let get = |k: &str| fields.get(k).ok_or_else(|| format!("header lacks `{k}`"));
        let num = |k: &str| {
            get(k)?
                .parse::<f64>()
                .map_err(|e| format!("header `{k}`: {e}"))
        };
        let int = |k: &str| {
            get(k)?
                .parse::<usize>()
                .map_err(|e| format!("header `{k}`: {e}"))
        };
        if get("format")? != WIGNER_FORMAT_TAG {
            return Err(format!("unsupported format `{}`", get("format")?));
        }
        let layout = Self {
            time: num("time_fs")?,
            x_min: num("x_min")?,
            dx: num("dx")?,
            n_points: int("n_points")?,
            k_min: num("k_min")?,
            dk: num("dk")?,
            n_k: int("n_k")?,
            stride_x: int("stride_x")?,
            bin_k: int("bin_k")?,
            convention: get("convention")?.clone(),
        };
        if layout.stride_x == 0 || layout.bin_k == 0 {
            return Err("strides must be positive".into());
        }
        if int("rows")? != layout.rows() || int("cols")? != layout.cols() {
            return Err("rows/cols disagree with strides".into());
        }
        Ok(layout)
    }
}

/// Down-sampled Wigner field as written to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerFile {
    pub layout: WignerLayout,
    pub values: Array2<f64>,
}

impl WignerFile {
    pub fn from_field(f: &WignerField, time: f64, stride_x: usize, bin_k: usize) -> Self {
        let g = f.grid();
        let kg = f.kgrid();
        let layout = WignerLayout {
            time,
            x_min: g.x_min(),
            dx: g.dx(),
            n_points: g.n_points(),
            k_min: kg.k_min(),
            dk: kg.dk(),
            n_k: kg.n_points(),
            stride_x: stride_x.max(1),
            bin_k: bin_k.max(1),
            convention: f.convention().to_string(),
        };
        let mut values = Array2::zeros((layout.rows(), layout.cols()));
        for r in 0..layout.rows() {
            let row = f.node_row(r * layout.stride_x);
            for c in 0..layout.cols() {
                let start = c * layout.bin_k;
                let count = layout.bin_count(c);
                let sum: f64 = row.iter().skip(start).take(count).sum();
                values[[r, c]] = sum / count as f64;
            }
        }
        Self { layout, values }
    }

    /// Q at each kept row: Σ_c mean_c·count_c·dk.
    pub fn position_marginal(&self) -> Vec<(f64, f64)> {
        (0..self.layout.rows())
            .map(|r| {
                let q: f64 = (0..self.layout.cols())
                    .map(|c| self.values[[r, c]] * self.layout.bin_count(c) as f64)
                    .sum::<f64>()
                    * self.layout.dk;
                (self.layout.row_x(r), q)
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = self.layout.header();
        for row in self.values.rows() {
            let mut first = true;
            for v in row {
                if !first {
                    s.push(' ');
                }
                first = false;
                let _ = write!(s, "{v:e}");
            }
            s.push('\n');
        }
        s
    }

    pub fn to_binary(&self) -> Vec<u8> {
        let header = self.layout.header();
        let mut out = Vec::with_capacity(16 + header.len() + 8 * self.values.len());
        out.extend_from_slice(WIGNER_MAGIC);
        out.extend_from_slice(&(header.len() as u64).to_le_bytes());
        out.extend_from_slice(header.as_bytes());
        for v in self.values.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Reads either layout, telling them apart by the magic bytes.
    pub fn read(path: &Path) -> Result<Self, OutputError> {
        let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
        Self::parse(&bytes).map_err(|e| io_err(path, e))
    }

    pub fn parse(bytes: &[u8]) -> Result<Self, String> {
        if bytes.starts_with(WIGNER_MAGIC) {
            let len_bytes: [u8; 8] = bytes
                .get(8..16)
                .ok_or("truncated header length")?
                .try_into()
                .expect("8 bytes");
            let len = u64::from_le_bytes(len_bytes) as usize;
            let header = std::str::from_utf8(bytes.get(16..16 + len).ok_or("truncated header")?)
                .map_err(|e| e.to_string())?;
            let layout = WignerLayout::from_header(&header_fields(header))?;
            let body = &bytes[16 + len..];
            let (rows, cols) = (layout.rows(), layout.cols());
            if body.len() != 8 * rows * cols {
                return Err(format!(
                    "expected {} data bytes, found {}",
                    8 * rows * cols,
                    body.len()
                ));
            }
            let data = body
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect();
            let values = Array2::from_shape_vec((rows, cols), data).map_err(|e| e.to_string())?;
            return Ok(Self { layout, values });
        }
        let text = std::str::from_utf8(bytes).map_err(|e| e.to_string())?;
        let layout = WignerLayout::from_header(&header_fields(text))?;
        let (rows, cols) = (layout.rows(), layout.cols());
        let mut data = Vec::with_capacity(rows * cols);
        for (i, line) in text
            .lines()
            .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
            .enumerate()
        {
            let before = data.len();
            for tok in line.split_ascii_whitespace() {
                data.push(
                    tok.parse::<f64>()
                        .map_err(|e| format!("data row {i}: {e}"))?,
                );
            }
            if data.len() - before != cols {
                return Err(format!(
                    "data row {i}: expected {cols} values, found {}",
                    data.len() - before
                ));
            }
        }
        let values =
            Array2::from_shape_vec((rows, cols), data).map_err(|e| format!("data block: {e}"))?;
        Ok(Self { layout, values })
    }
}

fn header_fields(text: &str) -> BTreeMap<String, String> {
    text.lines()
        .filter_map(|l| l.strip_prefix('#'))
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

#[derive(Serialize)]
struct ClusterRecord {
    x_start: f64,
    x_end: f64,
    x_min: f64,
    q_min: f64,
    integral: f64,
    nodes: usize,
}

impl From<&NegativeCluster> for ClusterRecord {
    fn from(c: &NegativeCluster) -> Self {
        Self {
            x_start: c.x_start,
            x_end: c.x_end,
            x_min: c.x_min,
            q_min: c.q_min,
            integral: c.integral,
            nodes: c.nodes,
        }
    }
}

#[derive(Serialize)]
struct NegativityRecord {
    time_fs: f64,
    tolerance: f64,
    global_min: [f64; 2],
    violation_count: usize,
    clusters: Vec<ClusterRecord>,
    violations: Vec<[f64; 2]>,
}

pub fn negativity_json(r: &NegativityReport) -> String {
    let record = NegativityRecord {
        time_fs: r.time,
        tolerance: r.tolerance,
        global_min: [r.global_min.0, r.global_min.1],
        violation_count: r.violations.len(),
        clusters: r.clusters.iter().map(ClusterRecord::from).collect(),
        violations: r.violations.iter().map(|&(x, q)| [x, q]).collect(),
    };
    let mut s = serde_json::to_string_pretty(&record).expect("plain data");
    s.push('\n');
    s
}

/// Writes `bytes` and returns the file name relative to `dir`.
pub fn emit(dir: &Path, name: &str, bytes: &[u8]) -> Result<String, OutputError> {
    let path = dir.join(name);
    let mut f = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
    f.write_all(bytes).map_err(|e| io_err(&path, e))?;
    Ok(name.to_string())
}
