//! Append-only JSON-lines audit log.
//!
//! Each record is one line:
//!
//! ```json
//! {"ts":"2024-05-01T12:00:00.000Z","kind":"auth_denied","mac":"AA:BB:CC:DD:EE:FF","detail":"1"}
//! ```
//!
//! `mac` is omitted for records not tied to a device.

use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clock::Timestamp;
use crate::model::MacAddress;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditKind {
    AuthGranted,
    AuthDenied,
    Alert,
    CommandSent,
    CommandAcked,
    CommandFailed,
    AdminAdd,
    AdminRemove,
}

impl AuditKind {
    pub const fn as_str(self) -> &'static str {
        match self {
            AuditKind::AuthGranted => "auth_granted",
            AuditKind::AuthDenied => "auth_denied",
            AuditKind::Alert => "alert",
            AuditKind::CommandSent => "command_sent",
            AuditKind::CommandAcked => "command_acked",
            AuditKind::CommandFailed => "command_failed",
            AuditKind::AdminAdd => "admin_add",
            AuditKind::AdminRemove => "admin_remove",
        }
    }
}

impl fmt::Display for AuditKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub ts: Timestamp,
    pub kind: AuditKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mac: Option<MacAddress>,
    pub detail: String,
}

impl AuditRecord {
    pub fn new(
        ts: Timestamp,
        kind: AuditKind,
        mac: Option<MacAddress>,
        detail: impl Into<String>,
    ) -> Self {
        Self {
            ts,
            kind,
            mac,
            detail: detail.into(),
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("audit records always serialize")
    }
}

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("audit I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("audit line {line_number}: {reason}")]
    Parse { line_number: usize, reason: String },
}

/// Appends one record and flushes before returning.
pub fn append_audit(record: &AuditRecord, log_path: &Path) -> Result<(), AuditError> {
    AuditWriter::open(log_path)?.append(record)
}

/// Keeps the log open across appends.
#[derive(Debug)]
pub struct AuditWriter {
    file: File,
}

impl AuditWriter {
    pub fn open(log_path: &Path) -> Result<Self, AuditError> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(log_path)?;
        Ok(Self { file })
    }

    pub fn append(&mut self, record: &AuditRecord) -> Result<(), AuditError> {
        let mut line = record.to_json_line();
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AuditFilter {
    pub kind: Option<AuditKind>,
    pub mac: Option<MacAddress>,
    /// Inclusive lower bound.
    pub since: Option<Timestamp>,
    /// Exclusive upper bound.
    pub until: Option<Timestamp>,
}

impl AuditFilter {
    pub fn kind(kind: AuditKind) -> Self {
        Self {
            kind: Some(kind),
            ..Self::default()
        }
    }

    pub fn matches(&self, r: &AuditRecord) -> bool {
        self.kind.is_none_or(|k| k == r.kind)
            && self.mac.is_none_or(|m| r.mac == Some(m))
            && self.since.is_none_or(|s| r.ts >= s)
            && self.until.is_none_or(|u| r.ts < u)
    }
}

pub fn parse_audit_line(line: &str) -> Result<AuditRecord, serde_json::Error> {
    serde_json::from_str(line)
}

/// Reads matching records in file order. Any unparseable line is an error
/// naming its 1-based line number.
pub fn read_audit(log_path: &Path, filter: &AuditFilter) -> Result<Vec<AuditRecord>, AuditError> {
    let reader = BufReader::new(File::open(log_path)?);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let record = parse_audit_line(&line).map_err(|e| AuditError::Parse {
            line_number: idx + 1,
            reason: e.to_string(),
        })?;
        if filter.matches(&record) {
            out.push(record);
        }
    }
    Ok(out)
}
