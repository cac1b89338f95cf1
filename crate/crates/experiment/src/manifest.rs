// Copyright 2026 The qtransport Authors
// SPDX-License-Identifier: Apache-2.0

//! Run manifest: resolved configuration, diagnostics and a checksummed
//! index of every emitted file.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::output::OutputError;

pub const MANIFEST_FORMAT: &str = "qtransport-manifest/1";
pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn file_entry(dir: &Path, name: &str) -> Result<FileEntry, OutputError> {
    let path = dir.join(name);
    let bytes = fs::read(&path).map_err(|e| OutputError {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(FileEntry {
        path: name.to_string(),
        sha256: sha256_hex(&bytes),
        bytes: bytes.len() as u64,
    })
}

/// Re-hashes every file listed in `dir/manifest.json` and checks that the
/// directory holds nothing else. Returns one message per problem.
pub fn verify_manifest(dir: &Path) -> Result<Vec<String>, OutputError> {
    let path = dir.join(MANIFEST_NAME);
    let text = fs::read_to_string(&path).map_err(|e| OutputError {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let doc: serde_json::Value = serde_json::from_str(&text).map_err(|e| OutputError {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut problems = Vec::new();
    if doc["format"] != MANIFEST_FORMAT {
        problems.push(format!("unexpected manifest format {}", doc["format"]));
    }
    let mut listed = Vec::new();
    for entry in doc["files"].as_array().cloned().unwrap_or_default() {
        let name = entry["path"].as_str().unwrap_or_default().to_string();
        match file_entry(dir, &name) {
            Ok(actual) => {
                if entry["sha256"] != actual.sha256.as_str() {
                    problems.push(format!("{name}: checksum mismatch"));
                }
                if entry["bytes"] != actual.bytes {
                    problems.push(format!("{name}: size mismatch"));
                }
            }
            Err(e) => problems.push(e.to_string()),
        }
        listed.push(name);
    }
    let entries = fs::read_dir(dir).map_err(|e| OutputError {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    for entry in entries.flatten() {
        let name = entry.file_name().to_string_lossy().into_owned();
        if name != MANIFEST_NAME && !listed.contains(&name) {
            problems.push(format!("{name}: not indexed in the manifest"));
        }
    }
    Ok(problems)
}
