//! Keyed, reversible pseudonymization of incident data.
//!
//! Identifiers found in text, CSV, JSON, XML and OCR transcripts are replaced
//! with `<TYPE_slug>` tokens derived from HMAC-SHA256 under a secret key. The
//! vault keeps the full digest and the original value so that holders of the
//! key can restore documents, with every restoration written to an audit log.

pub mod domain;
pub mod error;
pub mod eval;
pub mod ocr;
pub mod policy;
pub mod processors;
pub mod pseudonym;
pub mod recognizers;
pub mod vault;

pub use domain::{CustomLabel, Detection, EntityType, Span};
pub use error::*;
pub use policy::{
    validate_policy, CustomPattern, DictionaryTerm, PolicyConfig, RunContext, SecretKey,
    DEFAULT_SLUG_LENGTH, SECRET_KEY_ENV,
};
pub use pseudonym::{
    canonical_input, compute_digest, find_tokens, format_token, hmac_sha256, make_slug,
    parse_token, pseudonymize, Digest256, Token,
};
pub use recognizers::{
    builtin_registry, recognize_all, recognize_cert_body, recognize_cert_serial, recognize_hash,
    resolve_overlaps, Recognizer, RecognizerRegistry, RegexRecognizer,
};
pub use vault::{AuditAction, AuditEvent, PseudonymRecord, Vault};
pub use processors::{
    anonymize_csv, anonymize_json, anonymize_text, anonymize_xml, prepare_files, process_file, restore_document,
    restore_file, DocumentReport, Format, RestoreReport,
};
pub use eval::{compute_metrics, match_detections, GoldAnnotation, MatchCounts, MetricsReport};
