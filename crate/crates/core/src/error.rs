use std::path::PathBuf;

use thiserror::Error;

use crate::domain::EntityType;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("invalid entity type {0:?}")]
    InvalidEntityType(String),
    #[error("invalid span [{start}, {end})")]
    InvalidSpan { start: usize, end: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("slug length {0} outside 1..=64")]
    SlugLengthOutOfRange(usize),
    #[error("preserved entity {0} is neither built-in nor a declared custom label")]
    UnknownPreservedEntity(EntityType),
    #[error("allow-list entry #{0} is empty")]
    EmptyAllowListEntry(usize),
    #[error("custom pattern for {label}: {reason}")]
    MalformedCustomPattern { label: String, reason: String },
}

/// Every violation found by [`crate::validate_policy`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid policy: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct PolicyErrors(pub Vec<PolicyError>);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("SECRET_KEY is not set; export SECRET_KEY=<secret> before running")]
    MissingSecretKey,
}

#[derive(Debug, Error)]
pub enum PseudonymError {
    #[error("secret key is empty")]
    EmptyKey,
    #[error("value to pseudonymize is empty")]
    EmptyValue,
    #[error("slug length {0} outside 1..=64")]
    LengthOutOfRange(usize),
    #[error("malformed slug {0:?}: expected non-empty lowercase hex")]
    MalformedSlug(String),
    #[error("malformed token {0:?}")]
    MalformedToken(String),
    #[error("every prefix of digest {0} collides with another vault entry")]
    SlugSpaceExhausted(String),
    #[error(transparent)]
    Vault(#[from] VaultError),
}

#[derive(Debug, Error)]
pub enum VaultError {
    #[error("vault I/O on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("vault not found at {0}")]
    VaultMissing(PathBuf),
    #[error("{path}:{line}: corrupt record: {reason}")]
    CorruptRecordLine {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("duplicate digest {0} in vault")]
    DuplicateDigest(String),
    #[error("duplicate slug {0} in vault")]
    DuplicateSlug(String),
    #[error("slug {slug} already maps to a different digest")]
    SlugConflict { slug: String },
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error("invalid audit event: {0}")]
    InvalidAuditEvent(String),
}

#[derive(Debug, Error)]
pub enum RecognizerError {
    #[error("dictionary term is empty")]
    EmptyTerm,
    #[error("duplicate recognizer id {0}")]
    DuplicateId(String),
    #[error("recognizer {id}: pattern does not compile: {reason}")]
    PatternCompile { id: String, reason: String },
    #[error("recognizer {id} failed at runtime: {reason}")]
    PatternRuntimeFailure { id: String, reason: String },
    #[error("recognizer config line {line}: {reason}")]
    ConfigLine { line: usize, reason: String },
}

#[derive(Debug, Error)]
pub enum OcrError {
    #[error("OCR command template has no {{input}} placeholder: {0:?}")]
    MissingPlaceholder(String),
    #[error("OCR engine {0:?} not found")]
    OcrEngineMissing(String),
    #[error("OCR engine exited with {code:?}: {stderr}")]
    OcrEngineFailed { code: Option<i32>, stderr: String },
    #[error("OCR command template is not valid shell syntax: {0:?}")]
    BadTemplate(String),
    #[error("image {0} does not exist")]
    MissingImage(PathBuf),
    #[error("running OCR engine: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum ProcessError {
    #[error("cannot read {path}: {source}")]
    UnreadableFile {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    WriteFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV at row {row}, column {col}: {reason}")]
    MalformedCsv { row: usize, col: usize, reason: String },
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("malformed XML at {line}:{col}: {reason}")]
    MalformedXml { line: usize, col: usize, reason: String },
    #[error("digest verification failed for slug {slug}: wrong SECRET_KEY or tampered vault")]
    KeyMismatch { slug: String },
    #[error(transparent)]
    Pseudonym(#[from] PseudonymError),
    #[error(transparent)]
    Vault(#[from] VaultError),
    #[error(transparent)]
    Recognizer(#[from] RecognizerError),
    #[error(transparent)]
    Ocr(#[from] OcrError),
    #[error("{path}: {source}")]
    InFile {
        path: PathBuf,
        #[source]
        source: Box<ProcessError>,
    },
}

impl ProcessError {
    pub fn in_file(self, path: impl Into<PathBuf>) -> Self {
        match self {
            already @ (ProcessError::InFile { .. }
            | ProcessError::UnreadableFile { .. }
            | ProcessError::WriteFailure { .. }) => already,
            other => ProcessError::InFile {
                path: path.into(),
                source: Box::new(other),
            },
        }
    }

    /// The innermost error, skipping path wrappers.
    pub fn root(&self) -> &ProcessError {
        match self {
            ProcessError::InFile { source, .. } => source.root(),
            other => other,
        }
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("gold annotations overlap in document {doc}: {first:?} and {second:?}")]
    OverlappingGold {
        doc: String,
        first: (usize, usize),
        second: (usize, usize),
    },
    #[error("{path}:{line}: {reason}")]
    BadLine {
        path: PathBuf,
        line: usize,
        reason: String,
    },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}
