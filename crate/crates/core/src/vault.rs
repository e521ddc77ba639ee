//! Entity vault and audit trail.
//!
//! Both live as newline-delimited JSON beside each other:
//!
//! ```text
//! entities.ndjson  {"digest":"…64 hex…","slug":"5bdcc146bf","type":"IP_ADDRESS","value":"10.0.0.1","first_seen":"2026-01-01T00:00:00Z","source":"scan.xml"}
//! audit.ndjson     {"timestamp":"2026-01-01T00:00:00Z","actor":"alice","action":"DEANONYMIZE","slug":"5bdcc146bf","detail":"report.anon.txt"}
//! ```
//!
//! Original values are stored in plaintext: the vault file is as sensitive as
//! the key. Both files are append-only.

use std::collections::HashMap;
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::domain::EntityType;
use crate::error::VaultError;

pub const DEFAULT_VAULT_FILE: &str = "entities.ndjson";
pub const AUDIT_FILE: &str = "audit.ndjson";

pub fn now_rfc3339() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true)
}

fn is_rfc3339(s: &str) -> bool {
    chrono::DateTime::parse_from_rfc3339(s).is_ok()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PseudonymRecord {
    #[serde(rename = "digest")]
    pub digest_hex: String,
    pub slug: String,
    #[serde(rename = "type")]
    pub entity_type: EntityType,
    #[serde(rename = "value")]
    pub original_value: String,
    pub first_seen: String,
    pub source: String,
}

impl PseudonymRecord {
    /// New record stamped with the current time.
    pub fn new(
        digest_hex: String,
        slug: String,
        entity_type: EntityType,
        original_value: String,
        source: String,
    ) -> Result<Self, VaultError> {
        let record = Self {
            digest_hex,
            slug,
            entity_type,
            original_value,
            first_seen: now_rfc3339(),
            source,
        };
        record.check()?;
        Ok(record)
    }

    pub fn check(&self) -> Result<(), VaultError> {
        let bad = |why: &str| Err(VaultError::InvalidRecord(why.to_owned()));
        let lower_hex = |s: &str| s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'));
        if self.digest_hex.len() != 64 || !lower_hex(&self.digest_hex) {
            return bad("digest must be 64 lowercase hex characters");
        }
        if self.slug.is_empty() || !self.digest_hex.starts_with(&self.slug) {
            return bad("slug must be a non-empty prefix of the digest");
        }
        if self.original_value.is_empty() {
            return bad("original value is empty");
        }
        if !is_rfc3339(&self.first_seen) {
            return bad("first_seen is not an RFC 3339 timestamp");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum AuditAction {
    Anonymize,
    Deanonymize,
    Lookup,
    Export,
}

impl AuditAction {
    pub fn as_str(&self) -> &'static str {
        match self {
            AuditAction::Anonymize => "ANONYMIZE",
            AuditAction::Deanonymize => "DEANONYMIZE",
            AuditAction::Lookup => "LOOKUP",
            AuditAction::Export => "EXPORT",
        }
    }
}

impl fmt::Display for AuditAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AuditAction {
    type Err = VaultError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ANONYMIZE" => Ok(AuditAction::Anonymize),
            "DEANONYMIZE" => Ok(AuditAction::Deanonymize),
            "LOOKUP" => Ok(AuditAction::Lookup),
            "EXPORT" => Ok(AuditAction::Export),
            other => Err(VaultError::InvalidAuditEvent(format!("unknown action {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEvent {
    pub timestamp: String,
    pub actor: String,
    pub action: AuditAction,
    pub slug: String,
    pub detail: String,
}

impl AuditEvent {
    pub fn now(action: AuditAction, actor: &str, slug: &str, detail: impl Into<String>) -> Self {
        Self {
            timestamp: now_rfc3339(),
            actor: actor.to_owned(),
            action,
            slug: slug.to_owned(),
            detail: detail.into(),
        }
    }

    /// Builds an event from untyped parts, as read from an external caller.
    pub fn parse(
        timestamp: &str,
        actor: &str,
        action: &str,
        slug: &str,
        detail: &str,
    ) -> Result<Self, VaultError> {
        let event = Self {
            timestamp: timestamp.to_owned(),
            actor: actor.to_owned(),
            action: action.parse()?,
            slug: slug.to_owned(),
            detail: detail.to_owned(),
        };
        event.check()?;
        Ok(event)
    }

    pub fn check(&self) -> Result<(), VaultError> {
        if !is_rfc3339(&self.timestamp) {
            return Err(VaultError::InvalidAuditEvent(format!(
                "timestamp {:?} is not RFC 3339",
                self.timestamp
            )));
        }
        Ok(())
    }
}

/// In-memory index over the entity store, with write-through appends.
///
/// Single writer: every mutation goes through `&mut self`.
#[derive(Debug)]
pub struct Vault {
    path: PathBuf,
    audit_path: PathBuf,
    records: Vec<PseudonymRecord>,
    by_digest: HashMap<String, usize>,
    by_slug: HashMap<String, usize>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> VaultError + '_ {
    move |source| VaultError::Io {
        path: path.to_owned(),
        source,
    }
}

fn append_line(path: &Path, line: &str) -> Result<(), VaultError> {
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(io_err(path))?;
    let mut buf = String::with_capacity(line.len() + 1);
    buf.push_str(line);
    buf.push('\n');
    file.write_all(buf.as_bytes()).map_err(io_err(path))
}

/// The audit log that sits beside a vault file.
pub fn audit_path_for(vault_path: &Path) -> PathBuf {
    vault_path
        .parent()
        .map(|p| p.join(AUDIT_FILE))
        .unwrap_or_else(|| PathBuf::from(AUDIT_FILE))
}

impl Vault {
    /// Opens the store at `path`, creating nothing until the first write.
    pub fn open(path: impl AsRef<Path>) -> Result<Self, VaultError> {
        let path = path.as_ref();
        let mut vault = Vault {
            path: path.to_owned(),
            audit_path: audit_path_for(path),
            records: Vec::new(),
            by_digest: HashMap::new(),
            by_slug: HashMap::new(),
        };
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            if !parent.is_dir() {
                return Err(VaultError::Io {
                    path: parent.to_owned(),
                    source: std::io::Error::new(
                        std::io::ErrorKind::NotFound,
                        "vault directory does not exist",
                    ),
                });
            }
        }
        let file = match File::open(path) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(vault),
            Err(e) => return Err(io_err(path)(e)),
        };
        for (idx, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(io_err(path))?;
            if line.is_empty() {
                continue;
            }
            let corrupt = |reason: String| VaultError::CorruptRecordLine {
                path: path.to_owned(),
                line: idx + 1,
                reason,
            };
            let record: PseudonymRecord =
                serde_json::from_str(&line).map_err(|e| corrupt(e.to_string()))?;
            record.check().map_err(|e| corrupt(e.to_string()))?;
            vault.index(record)?;
        }
        Ok(vault)
    }

    /// Opens an existing store; a missing file is an error.
    pub fn open_existing(path: impl AsRef<Path>) -> Result<Self, VaultError> {
        let path = path.as_ref();
        if !path.is_file() {
            return Err(VaultError::VaultMissing(path.to_owned()));
        }
        Self::open(path)
    }

    fn index(&mut self, record: PseudonymRecord) -> Result<(), VaultError> {
        if self.by_digest.contains_key(&record.digest_hex) {
            return Err(VaultError::DuplicateDigest(record.digest_hex));
        }
        if self.by_slug.contains_key(&record.slug) {
            return Err(VaultError::DuplicateSlug(record.slug));
        }
        let at = self.records.len();
        self.by_digest.insert(record.digest_hex.clone(), at);
        self.by_slug.insert(record.slug.clone(), at);
        self.records.push(record);
        Ok(())
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn audit_path(&self) -> &Path {
        &self.audit_path
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records in insertion order.
    pub fn records(&self) -> &[PseudonymRecord] {
        &self.records
    }

    pub fn get_by_digest(&self, digest_hex: &str) -> Option<&PseudonymRecord> {
        self.by_digest.get(digest_hex).map(|&i| &self.records[i])
    }

    /// Exact slug match without an audit event. Used internally by
    /// re-identification, which records its own events.
    pub fn get_by_slug(&self, slug: &str) -> Option<&PseudonymRecord> {
        self.by_slug.get(slug).map(|&i| &self.records[i])
    }

    /// Inserts `record`, or returns the stored one if its digest is known.
    pub fn upsert_record(&mut self, record: PseudonymRecord) -> Result<PseudonymRecord, VaultError> {
        record.check()?;
        if let Some(existing) = self.get_by_digest(&record.digest_hex) {
            return Ok(existing.clone());
        }
        if self.by_slug.contains_key(&record.slug) {
            return Err(VaultError::SlugConflict { slug: record.slug });
        }
        let line = serde_json::to_string(&record).expect("record serializes");
        append_line(&self.path, &line)?;
        self.index(record.clone())?;
        Ok(record)
    }

    /// Operator lookup: exact slug match, recorded as a LOOKUP event.
    pub fn lookup_by_slug(
        &mut self,
        slug: &str,
        actor: &str,
    ) -> Result<Option<PseudonymRecord>, VaultError> {
        let found = self.get_by_slug(slug).cloned();
        let detail = if found.is_some() { "hit" } else { "miss" };
        self.append_audit(&AuditEvent::now(AuditAction::Lookup, actor, slug, detail))?;
        Ok(found)
    }

    /// Records sorted by (type, original value), optionally of one type.
    pub fn list_entities(&self, filter: Option<&EntityType>) -> Vec<&PseudonymRecord> {
        let mut out: Vec<&PseudonymRecord> = self
            .records
            .iter()
            .filter(|r| filter.is_none_or(|t| &r.entity_type == t))
            .collect();
        out.sort_by(|a, b| {
            (a.entity_type.name(), &a.original_value).cmp(&(b.entity_type.name(), &b.original_value))
        });
        out
    }

    pub fn append_audit(&mut self, event: &AuditEvent) -> Result<(), VaultError> {
        event.check()?;
        let line = serde_json::to_string(event).expect("event serializes");
        append_line(&self.audit_path, &line)
    }
}

/// Reads every event from an audit log; a missing file reads as empty.
pub fn read_audit(path: &Path) -> Result<Vec<AuditEvent>, VaultError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(path)(e)),
    };
    BufReader::new(file)
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |l| !l.is_empty()))
        .map(|(idx, line)| {
            let line = line.map_err(io_err(path))?;
            serde_json::from_str(&line).map_err(|e| VaultError::CorruptRecordLine {
                path: path.to_owned(),
                line: idx + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}
