//! Report files: CSV with a header row, `.` decimals and `\n` line endings,
//! pretty-printed JSON. Files are written to a temporary sibling and renamed
//! into place.

use std::io::Write;
use std::path::{Path, PathBuf};

/// Shortest round-trip form; switches to exponent notation for very small
/// and very large magnitudes.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

pub fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> csv::Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

pub fn json_bytes(value: &serde_json::Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("in-memory JSON");
    out.push(b'\n');
    out
}

pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> std::io::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(&target).map_err(|e| e.error)?;
    Ok(target)
}
