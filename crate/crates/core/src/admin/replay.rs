use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::SCHEMA_VERSION;
use crate::disclosure::Action;
use crate::gateway::{read_audit_log, AuditRecord};
use crate::policy::Effect;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplaySummary {
    pub schema: u32,
    pub records: usize,
    pub malformed: usize,
    /// Requests per tier 0..3; refusals before scoring are not counted here.
    pub per_tier: [usize; 4],
    pub unscored: usize,
    /// Occurrences of each action across all action sets.
    pub actions: BTreeMap<Action, usize>,
    pub anomaly_rate: f64,
    pub denial_rate: f64,
    pub status_counts: BTreeMap<u16, usize>,
}

fn rate(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        n as f64 / d as f64
    }
}

pub fn summarize(records: &[AuditRecord], malformed: usize) -> ReplaySummary {
    let mut s = ReplaySummary {
        schema: SCHEMA_VERSION,
        records: records.len(),
        malformed,
        per_tier: [0; 4],
        unscored: 0,
        actions: BTreeMap::new(),
        anomaly_rate: 0.0,
        denial_rate: 0.0,
        status_counts: BTreeMap::new(),
    };
    let mut anomalies = 0;
    let mut denials = 0;
    for r in records {
        match r.tier {
            Some(t) if (t as usize) < 4 => s.per_tier[t as usize] += 1,
            _ => s.unscored += 1,
        }
        for a in &r.action_set {
            *s.actions.entry(*a).or_insert(0) += 1;
        }
        *s.status_counts.entry(r.status).or_insert(0) += 1;
        anomalies += r.anomaly_flag as usize;
        denials += (r.effect == Effect::Deny) as usize;
    }
    s.anomaly_rate = rate(anomalies, records.len());
    s.denial_rate = rate(denials, records.len());
    s
}

/// Summarizes a JSONL audit log. Malformed lines are counted, not fatal.
pub fn cmd_replay(path: &Path) -> std::io::Result<ReplaySummary> {
    let scan = read_audit_log(path)?;
    Ok(summarize(&scan.records, scan.malformed))
}

impl ReplaySummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "records:       {}", self.records);
        if self.malformed > 0 {
            let _ = writeln!(out, "malformed:     {} (skipped)", self.malformed);
        }
        for (t, n) in self.per_tier.iter().enumerate() {
            let _ = writeln!(out, "tier {t}:        {n}");
        }
        let _ = writeln!(out, "unscored:      {}", self.unscored);
        for a in Action::ALL {
            let _ = writeln!(
                out,
                "{:<14} {}",
                format!("{a}:"),
                self.actions.get(&a).unwrap_or(&0)
            );
        }
        let _ = writeln!(out, "anomaly rate:  {:.4}", self.anomaly_rate);
        let _ = writeln!(out, "denial rate:   {:.4}", self.denial_rate);
        out
    }
}
