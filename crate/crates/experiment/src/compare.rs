// Copyright 2026 The qtransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Side-by-side tables of two run directories.

use std::fs;
use std::path::Path;

use crate::manifest::MANIFEST_NAME;
use crate::output::OutputError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareField {
    /// Positive, negative and total norm per time.
    Decomposition,
    /// Minimum of Q and violation count per snapshot.
    Negativity,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecompositionRow {
    pub time: f64,
    pub positive: f64,
    pub negative: f64,
    pub total: f64,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> OutputError {
    OutputError {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

pub fn read_decomposition(dir: &Path) -> Result<Vec<DecompositionRow>, OutputError> {
    let path = dir.join("decomposition.tsv");
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split('\t')
            .map(|s| s.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| io_err(&path, format!("line {}: {e}", i + 1)))?;
        if v.len() != 4 {
            return Err(io_err(&path, format!("line {}: expected 4 columns", i + 1)));
        }
        rows.push(DecompositionRow {
            time: v[0],
            positive: v[1],
            negative: v[2],
            total: v[3],
        });
    }
    Ok(rows)
}

fn read_manifest(dir: &Path) -> Result<serde_json::Value, OutputError> {
    let path = dir.join(MANIFEST_NAME);
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    serde_json::from_str(&text).map_err(|e| io_err(&path, e))
}

fn label(dir: &Path) -> Result<String, OutputError> {
    Ok(read_manifest(dir)?["scenario"]
        .as_str()
        .unwrap_or("?")
        .to_string())
}

/// Renders the comparison as a tab-separated table. Rows are matched by
/// time; a time present in only one run leaves the other side blank.
pub fn compare_runs(a: &Path, b: &Path, field: CompareField) -> Result<String, OutputError> {
    let (la, lb) = (label(a)?, label(b)?);
    match field {
        CompareField::Decomposition => {
            let (ra, rb) = (read_decomposition(a)?, read_decomposition(b)?);
            let mut times: Vec<f64> = ra.iter().chain(&rb).map(|r| r.time).collect();
            times.sort_by(f64::total_cmp);
            times.dedup();
            let mut out = format!(
                "time_fs\t{la}:positive\t{la}:negative\t{la}:total\t{lb}:positive\t{lb}:negative\t{lb}:total\n"
            );
            let cell = |rows: &[DecompositionRow], t: f64| match rows.iter().find(|r| r.time == t) {
                Some(r) => format!("{:.6}\t{:.6}\t{:.6}", r.positive, r.negative, r.total),
                None => "-\t-\t-".to_string(),
            };
            for t in times {
                out.push_str(&format!("{t}\t{}\t{}\n", cell(&ra, t), cell(&rb, t)));
            }
            Ok(out)
        }
        CompareField::Negativity => {
            let (ma, mb) = (read_manifest(a)?, read_manifest(b)?);
            let snaps = |m: &serde_json::Value| -> Vec<(f64, f64, f64, u64)> {
                m["snapshots"]
                    .as_array()
                    .map(|v| {
                        v.iter()
                            .map(|s| {
                                (
                                    s["time_fs"].as_f64().unwrap_or(f64::NAN),
                                    s["min_q"][0].as_f64().unwrap_or(f64::NAN),
                                    s["min_q"][1].as_f64().unwrap_or(f64::NAN),
                                    s["violations"].as_u64().unwrap_or(0),
                                )
                            })
                            .collect()
                    })
                    .unwrap_or_default()
            };
            let (sa, sb) = (snaps(&ma), snaps(&mb));
            let mut times: Vec<f64> = sa.iter().chain(&sb).map(|s| s.0).collect();
            times.sort_by(f64::total_cmp);
            times.dedup();
            let mut out = format!(
                "time_fs\t{la}:min_x\t{la}:min_q\t{la}:violations\t{lb}:min_x\t{lb}:min_q\t{lb}:violations\n"
            );
            let cell = |rows: &[(f64, f64, f64, u64)], t: f64| match rows.iter().find(|r| r.0 == t)
            {
                Some(r) => format!("{:.3}\t{:.6e}\t{}", r.1, r.2, r.3),
                None => "-\t-\t-".to_string(),
            };
            for t in times {
                out.push_str(&format!("{t}\t{}\t{}\n", cell(&sa, t), cell(&sb, t)));
            }
            Ok(out)
        }
    }
}
