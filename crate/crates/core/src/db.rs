//! Scenario database persistence.
//!
//! The database is a line-delimited UTF-8 text file: one scenario record
//! per line as a self-describing JSON object with a `type` tag. Field names
//! follow the scenario structs in [`crate::extract`] and are stable across
//! versions.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::extract::ScenarioRecord;

/// Sorts records into the canonical database order
/// `(recording_id, start_frame, challenger_id)`.
pub fn sort_records(records: &mut [ScenarioRecord]) {
    records.sort_by_key(|r| r.sort_key());
}

/// Serializes one record to its database line.
pub fn to_line(record: &ScenarioRecord) -> serde_json::Result<String> {
    serde_json::to_string(record)
}

/// Writes a database file, one record per line, in canonical order.
pub fn write_db(path: &Path, records: &[ScenarioRecord]) -> std::io::Result<()> {
    let mut sorted: Vec<ScenarioRecord> = records.to_vec();
    sort_records(&mut sorted);
    let mut out = Vec::new();
    for record in &sorted {
        let line = to_line(record).map_err(std::io::Error::other)?;
        out.extend_from_slice(line.as_bytes());
        out.push(b'\n');
    }
    write_atomic(path, &out)
}

/// Reads a database file written by [`write_db`].
pub fn read_db(path: &Path) -> std::io::Result<Vec<ScenarioRecord>> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ScenarioRecord = serde_json::from_str(&line).map_err(|e| {
            std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                format!("{}:{}: {e}", path.display(), i + 1),
            )
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Writes a file atomically: the content lands under a temporary name in
/// the same directory and is renamed over the target.
pub fn write_atomic(path: &Path, content: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".to_string());
    let tmp = dir.join(format!(".{file_name}.tmp"));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(content)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}
