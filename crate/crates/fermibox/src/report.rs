//! Deterministic artifact emission: CSV with fixed column order and float
//! formatting, JSON with sorted keys, and config-hash-stamped file names.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::Result;

/// 17-significant-digit scientific formatting; identical inputs produce
/// byte-identical artifacts.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Writes a CSV table (UTF-8, LF line endings, header row).
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut text = header.join(",");
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

/// Writes JSON with sorted keys (serde_json maps are BTree-backed here).
pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Output path `<dir>/<subcommand>_<hash>_<name>`, creating `dir`.
pub fn artifact_path(dir: &str, subcommand: &str, hash: &str, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    Ok(Path::new(dir).join(format!("{subcommand}_{hash}_{name}")))
}

/// Parses a CSV produced by `write_csv` back into numeric rows.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .unwrap_or("")
        .split(',')
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|t| t.trim().parse::<f64>()).collect();
        rows.push(row.map_err(|e| crate::error::Error::Range(format!("csv parse: {e}")))?);
    }
    Ok((header, rows))
}
