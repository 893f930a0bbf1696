use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::disclosure::Action;
use crate::policy::Effect;
use crate::sensitivity::SensitivityLevel;

/// One line of the audit log.
///
/// Fields that were never computed for a request (a policy refusal never
/// reaches scoring or the backend) are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub request_id: String,
    pub timestamp: DateTime<Utc>,
    pub principal_id: String,
    pub effect: Effect,
    pub status: u16,
    pub tier: Option<u8>,
    /// Rounded to six decimals when written, so the log never carries long
    /// digit runs that read as card numbers.
    #[serde(serialize_with = "rounded_score")]
    pub raw_score: Option<f64>,
    pub level: Option<SensitivityLevel>,
    pub action_set: Vec<Action>,
    pub entity_type_counts: BTreeMap<String, usize>,
    /// SHA-256 of the unmodified backend output.
    pub output_hash: Option<String>,
    pub anomaly_flag: bool,
    pub backend_id: Option<String>,
    pub latency_ms: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub matched_rule_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_entity_counts: Option<BTreeMap<String, usize>>,
}

pub const SCORE_DECIMALS: i32 = 6;

fn rounded_score<S: serde::Serializer>(score: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    let scale = 10f64.powi(SCORE_DECIMALS);
    match score {
        Some(v) => s.serialize_some(&((v * scale).round() / scale)),
        None => s.serialize_none(),
    }
}

pub fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditQuery {
    pub principal_id: Option<String>,
    pub since: Option<DateTime<Utc>>,
}

impl AuditQuery {
    fn matches(&self, r: &AuditRecord) -> bool {
        self.principal_id
            .as_ref()
            .is_none_or(|p| *p == r.principal_id)
            && self.since.is_none_or(|s| r.timestamp >= s)
    }
}

/// Result of reading a log back: records plus lines that failed to parse.
#[derive(Debug, Clone, Default)]
pub struct AuditScan {
    pub records: Vec<AuditRecord>,
    pub malformed: usize,
}

/// Append-only JSONL sink.
///
/// Each record is serialized up front and written with a single
/// `write_all` on an `O_APPEND` handle while holding the lock, so lines from
/// concurrent writers never interleave and a crash can at worst truncate
/// the final line.
#[derive(Debug)]
pub struct AuditLog {
    path: PathBuf,
    file: Mutex<File>,
    errors: AtomicU64,
}

impl AuditLog {
    pub fn open(path: impl Into<PathBuf>) -> std::io::Result<Self> {
        let path = path.into();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self {
            path,
            file: Mutex::new(file),
            errors: AtomicU64::new(0),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Appends a record. Failures are counted rather than propagated; a
    /// response must not fail because the log did.
    pub fn append(&self, record: &AuditRecord) -> bool {
        let line = match serde_json::to_string(record) {
            Ok(mut l) => {
                l.push('\n');
                l
            }
            Err(e) => {
                self.fail(&e);
                return false;
            }
        };
        let mut file = self.file.lock().unwrap_or_else(|p| p.into_inner());
        match file.write_all(line.as_bytes()).and_then(|_| file.flush()) {
            Ok(()) => true,
            Err(e) => {
                self.fail(&e);
                false
            }
        }
    }

    fn fail(&self, e: &dyn std::error::Error) {
        self.errors.fetch_add(1, Ordering::Relaxed);
        tracing::error!(path = %self.path.display(), error = %e, "audit write failed");
    }

    pub fn error_count(&self) -> u64 {
        self.errors.load(Ordering::Relaxed)
    }

    /// Records matching `q`, in timestamp order.
    pub fn query(&self, q: &AuditQuery) -> std::io::Result<Vec<AuditRecord>> {
        let _guard = self.file.lock().unwrap_or_else(|p| p.into_inner());
        let mut records: Vec<AuditRecord> = read_audit_log(&self.path)?
            .records
            .into_iter()
            .filter(|r| q.matches(r))
            .collect();
        records.sort_by_key(|r| r.timestamp);
        Ok(records)
    }
}

/// Reads a JSONL audit log, counting lines that do not parse.
pub fn read_audit_log(path: &Path) -> std::io::Result<AuditScan> {
    let reader = BufReader::new(File::open(path)?);
    let mut scan = AuditScan::default();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(r) => scan.records.push(r),
            Err(_) => scan.malformed += 1,
        }
    }
    Ok(scan)
}
