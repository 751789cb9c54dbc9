//! Deterministic file emission: no timestamps, stable field order, shortest
//! round-trip float formatting, so identical (config, seed) pairs produce
//! byte-identical outputs.

use std::path::{Path, PathBuf};

use crate::CliError;

pub fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, bytes)
        .map_err(|e| CliError::Io(format!("write {}: {e}", path.display())))?;
    Ok(path)
}

pub fn to_pretty_json<T: serde::Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Io(format!("serialize: {e}")))?;
    text.push('\n');
    Ok(text.into_bytes())
}

/// CSV from a header and stringified rows; all fields are numeric or plain
/// identifiers, so no quoting is needed.
pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

/// FNV-1a over little-endian f64 bit patterns; stable content hash for
/// tagging result rows.
pub fn fnv64_hex(values: &[f64]) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for b in v.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    format!("{h:016x}")
}
