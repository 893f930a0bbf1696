use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use walkdir::WalkDir;

use super::{EXIT_FINDINGS, EXIT_IO, EXIT_OK, SCHEMA_VERSION};
use crate::sensitivity::{SensitivityEngine, SensitivityLevel};

/// Bytes inspected for a NUL when deciding whether a file is binary.
pub const BINARY_SNIFF_BYTES: usize = 8192;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileFinding {
    pub path: PathBuf,
    pub level: SensitivityLevel,
    pub counts: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Skipped {
    pub path: PathBuf,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanFailure {
    pub path: PathBuf,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub schema: u32,
    pub min_level: SensitivityLevel,
    /// Every text file scanned, sorted by path.
    pub files: Vec<FileFinding>,
    pub skipped: Vec<Skipped>,
    pub errors: Vec<ScanFailure>,
    /// Sum of per-file counts.
    pub totals: BTreeMap<String, usize>,
    pub exit_code: i32,
}

impl ScanReport {
    /// Files at or above `min_level`.
    pub fn flagged(&self) -> impl Iterator<Item = &FileFinding> {
        self.files.iter().filter(|f| f.level >= self.min_level)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scan report serializes")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let flagged: Vec<&FileFinding> = self.flagged().collect();
        let width = flagged
            .iter()
            .map(|f| f.path.display().to_string().len())
            .max()
            .unwrap_or(4)
            .max(4);
        if !flagged.is_empty() {
            let _ = writeln!(out, "{:<width$}  {:<12}  ENTITIES", "PATH", "LEVEL");
            for f in &flagged {
                let counts = f
                    .counts
                    .iter()
                    .map(|(t, n)| format!("{t}={n}"))
                    .collect::<Vec<_>>()
                    .join(" ");
                let _ = writeln!(
                    out,
                    "{:<width$}  {:<12}  {counts}",
                    f.path.display(),
                    f.level.as_str()
                );
            }
        }
        for s in &self.skipped {
            let _ = writeln!(out, "skipped {}: {}", s.path.display(), s.reason);
        }
        for e in &self.errors {
            let _ = writeln!(out, "error {}: {}", e.path.display(), e.message);
        }
        let totals = self
            .totals
            .iter()
            .map(|(t, n)| format!("{t}={n}"))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(
            out,
            "{} files scanned, {} at or above {}, {} skipped, {} errors{}{}",
            self.files.len(),
            flagged.len(),
            self.min_level,
            self.skipped.len(),
            self.errors.len(),
            if totals.is_empty() { "" } else { "; totals: " },
            totals
        );
        out
    }
}

enum Outcome {
    File(FileFinding),
    Skipped(Skipped),
    Error(ScanFailure),
}

/// Scans files and directory trees.
///
/// Exit code: 1 if any path could not be read (the scan is incomplete),
/// else 2 if any file is at or above `min_level`, else 0.
pub fn cmd_scan(
    paths: &[PathBuf],
    engine: &SensitivityEngine,
    min_level: SensitivityLevel,
) -> ScanReport {
    let mut candidates = Vec::new();
    let mut errors = Vec::new();
    for root in paths {
        for entry in WalkDir::new(root).sort_by_file_name() {
            match entry {
                Ok(e) if e.file_type().is_file() => candidates.push(e.into_path()),
                Ok(_) => {}
                Err(e) => errors.push(ScanFailure {
                    path: e
                        .path()
                        .map(Path::to_path_buf)
                        .unwrap_or_else(|| root.clone()),
                    message: e.to_string(),
                }),
            }
        }
    }

    let outcomes: Vec<Outcome> = candidates
        .par_iter()
        .map(|p| scan_file(p, engine))
        .collect();

    let mut files = Vec::new();
    let mut skipped = Vec::new();
    for o in outcomes {
        match o {
            Outcome::File(f) => files.push(f),
            Outcome::Skipped(s) => skipped.push(s),
            Outcome::Error(e) => errors.push(e),
        }
    }
    files.sort_by(|a, b| a.path.cmp(&b.path));
    skipped.sort_by(|a, b| a.path.cmp(&b.path));
    errors.sort_by(|a, b| a.path.cmp(&b.path));

    let mut totals = BTreeMap::new();
    for f in &files {
        for (t, n) in &f.counts {
            *totals.entry(t.clone()).or_insert(0) += n;
        }
    }
    let exit_code = if !errors.is_empty() {
        EXIT_IO
    } else if files.iter().any(|f| f.level >= min_level) {
        EXIT_FINDINGS
    } else {
        EXIT_OK
    };
    ScanReport {
        schema: SCHEMA_VERSION,
        min_level,
        files,
        skipped,
        errors,
        totals,
        exit_code,
    }
}

/// True when the first [`BINARY_SNIFF_BYTES`] bytes contain a NUL.
pub fn is_binary(bytes: &[u8]) -> bool {
    bytes[..bytes.len().min(BINARY_SNIFF_BYTES)].contains(&0)
}

fn scan_file(path: &Path, engine: &SensitivityEngine) -> Outcome {
    let mut bytes = Vec::new();
    let read = std::fs::File::open(path).and_then(|mut f| f.read_to_end(&mut bytes));
    if let Err(e) = read {
        return Outcome::Error(ScanFailure {
            path: path.to_path_buf(),
            message: e.to_string(),
        });
    }
    if is_binary(&bytes) {
        return Outcome::Skipped(Skipped {
            path: path.to_path_buf(),
            reason: "binary file".into(),
        });
    }
    let text = String::from_utf8_lossy(&bytes);
    let report = engine.analyze(&text);
    Outcome::File(FileFinding {
        path: path.to_path_buf(),
        level: report.level,
        counts: report.counts,
    })
}
