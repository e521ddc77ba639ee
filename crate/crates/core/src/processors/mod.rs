//! Format-aware anonymization.
//!
//! Processing a document is split in two phases:
//!
//! 1. [`plan_document`] extracts the document's string leaves and runs the
//!    recognizers over each. This is pure and can run in parallel across files.
//! 2. [`apply_plan`] pseudonymizes every non-preserved detection through the
//!    vault and splices the tokens back into the source. Vault writes happen
//!    here, one document at a time.
//!
//! [`process_file`] does both for one path and writes `<stem>.anon.<ext>`.

pub mod csv;
pub mod json;
pub mod leaf;
pub mod restore;
pub mod xml;

use std::fmt;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{Detection, Span};
use crate::error::ProcessError;
use crate::ocr;
use crate::policy::{PolicyConfig, RunContext};
use crate::pseudonym::pseudonymize;
use crate::recognizers::{recognize_all, RecognizerRegistry};
use crate::vault::{AuditAction, AuditEvent, Vault};

pub use leaf::{Leaf, LeafKind, OffsetMap};
pub use restore::{restore_document, restore_file, RestoreReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Format {
    Text,
    Csv,
    Json,
    Xml,
    Image,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Text => "TEXT",
            Format::Csv => "CSV",
            Format::Json => "JSON",
            Format::Xml => "XML",
            Format::Image => "IMAGE",
        })
    }
}

/// Extension first, then a sniff of the first non-blank byte, then TEXT.
pub fn format_for(path: &Path, head: &[u8]) -> Format {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("txt") => return Format::Text,
        Some("csv") => return Format::Csv,
        Some("json") => return Format::Json,
        Some("xml") => return Format::Xml,
        Some("png" | "jpg" | "jpeg") => return Format::Image,
        _ => {}
    }
    let head = head.strip_prefix(b"\xef\xbb\xbf").unwrap_or(head);
    match head.iter().find(|b| !b.is_ascii_whitespace()) {
        Some(b'<') => Format::Xml,
        Some(b'{' | b'[') => Format::Json,
        _ => Format::Text,
    }
}

pub fn detect_format(path: &Path) -> Result<Format, ProcessError> {
    let unreadable = |source| ProcessError::UnreadableFile {
        path: path.to_owned(),
        source,
    };
    let mut head = Vec::with_capacity(512);
    fs::File::open(path)
        .and_then(|f| f.take(512).read_to_end(&mut head))
        .map_err(unreadable)?;
    Ok(format_for(path, &head))
}

/// String leaves of `src` for the given format.
pub fn extract_leaves(format: Format, src: &str) -> Result<Vec<Leaf>, ProcessError> {
    match format {
        Format::Text | Format::Image => Ok(if src.is_empty() {
            Vec::new()
        } else {
            vec![Leaf {
                raw: 0..src.len(),
                text: src.to_owned(),
                map: OffsetMap::Shift(0),
                kind: LeafKind::Text,
            }]
        }),
        Format::Csv => csv::leaves(src),
        Format::Json => json::leaves(src),
        Format::Xml => xml::leaves(src),
    }
}

/// A document with detections computed but nothing pseudonymized yet.
#[derive(Debug, Clone)]
pub struct PlannedDocument {
    pub format: Format,
    pub source: String,
    pub leaves: Vec<Leaf>,
    /// Leaf index and leaf-relative detections, for leaves with any.
    pub detections: Vec<(usize, Vec<Detection>)>,
    pub warnings: Vec<String>,
}

pub fn plan_document(
    format: Format,
    source: String,
    registry: &RecognizerRegistry,
    policy: &PolicyConfig,
) -> Result<PlannedDocument, ProcessError> {
    let leaves: Vec<Leaf> = extract_leaves(format, &source)?
        .into_iter()
        .filter(|l| policy.scan_json_keys || l.kind != LeafKind::JsonKey)
        .collect();
    let mut detections = Vec::new();
    for (idx, leaf) in leaves.iter().enumerate() {
        let found = recognize_all(&leaf.text, registry, policy)?;
        if !found.is_empty() {
            detections.push((idx, found));
        }
    }
    Ok(PlannedDocument {
        format,
        source,
        leaves,
        detections,
        warnings: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Anonymized {
    pub output: String,
    /// Detections with spans into the original source.
    pub detections: Vec<Detection>,
    pub replacements: usize,
}

/// Replaces every non-preserved detection with its vault token.
pub fn apply_plan(
    plan: &PlannedDocument,
    ctx: &RunContext,
    vault: &mut Vault,
    source_id: &str,
) -> Result<Anonymized, ProcessError> {
    let mut replacements = Vec::new();
    let mut doc_detections = Vec::new();
    let mut count = 0;
    for (idx, dets) in &plan.detections {
        let leaf = &plan.leaves[*idx];
        let mut text = leaf.text.clone();
        let mut changed = false;
        // Descending order keeps earlier offsets valid while splicing.
        for d in dets.iter().rev() {
            if d.preserved {
                continue;
            }
            let token = pseudonymize(ctx, vault, &d.entity_type, &d.text, source_id)?;
            text.replace_range(d.span.start..d.span.end, &token.rendered);
            changed = true;
            count += 1;
        }
        if changed {
            replacements.push((*idx, text));
        }
        for d in dets {
            let range = leaf.source_range(d.span.start..d.span.end);
            doc_detections.push(Detection {
                span: Span {
                    start: range.start,
                    end: range.end,
                },
                ..d.clone()
            });
        }
    }
    Ok(Anonymized {
        output: leaf::splice(&plan.source, &plan.leaves, &replacements),
        detections: doc_detections,
        replacements: count,
    })
}

fn anonymize_as(
    format: Format,
    src: &str,
    ctx: &RunContext,
    vault: &mut Vault,
    registry: &RecognizerRegistry,
) -> Result<(String, Vec<Detection>), ProcessError> {
    let plan = plan_document(format, src.to_owned(), registry, &ctx.policy)?;
    let done = apply_plan(&plan, ctx, vault, "inline")?;
    Ok((done.output, done.detections))
}

pub fn anonymize_text(
    text: &str,
    ctx: &RunContext,
    vault: &mut Vault,
    registry: &RecognizerRegistry,
) -> Result<(String, Vec<Detection>), ProcessError> {
    anonymize_as(Format::Text, text, ctx, vault, registry)
}

pub fn anonymize_csv(
    src: &str,
    ctx: &RunContext,
    vault: &mut Vault,
    registry: &RecognizerRegistry,
) -> Result<(String, Vec<Detection>), ProcessError> {
    anonymize_as(Format::Csv, src, ctx, vault, registry)
}

/// String values are rewritten; keys only when `policy.scan_json_keys`.
pub fn anonymize_json(
    src: &str,
    ctx: &RunContext,
    vault: &mut Vault,
    registry: &RecognizerRegistry,
) -> Result<(String, Vec<Detection>), ProcessError> {
    anonymize_as(Format::Json, src, ctx, vault, registry)
}

pub fn anonymize_xml(
    src: &str,
    ctx: &RunContext,
    vault: &mut Vault,
    registry: &RecognizerRegistry,
) -> Result<(String, Vec<Detection>), ProcessError> {
    anonymize_as(Format::Xml, src, ctx, vault, registry)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentReport {
    pub source: PathBuf,
    pub format: Format,
    /// Spans index the input file (the transcript for images).
    pub detections: Vec<Detection>,
    pub replacements: usize,
    pub output: PathBuf,
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// `<stem>.anon.<ext>` beside the input; images get a `.anon.txt` transcript.
pub fn default_output_path(input: &Path, format: Format) -> PathBuf {
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".to_owned());
    let ext = match format {
        Format::Image => Some("txt".to_owned()),
        _ => input.extension().map(|e| e.to_string_lossy().into_owned()),
    };
    let name = match ext {
        Some(ext) => format!("{stem}.anon.{ext}"),
        None => format!("{stem}.anon"),
    };
    input.with_file_name(name)
}

pub(crate) fn read_utf8(path: &Path) -> Result<String, ProcessError> {
    fs::read_to_string(path).map_err(|source| ProcessError::UnreadableFile {
        path: path.to_owned(),
        source,
    })
}

/// A file read (or OCR'd) and planned, awaiting [`commit_file`].
#[derive(Debug, Clone)]
pub struct PreparedFile {
    pub path: PathBuf,
    pub plan: PlannedDocument,
}

/// Phase one for a file: read, route by format, detect. No vault access.
pub fn prepare_file(
    path: &Path,
    registry: &RecognizerRegistry,
    policy: &PolicyConfig,
    ocr_cmd: &str,
) -> Result<PreparedFile, ProcessError> {
    let format = detect_format(path)?;
    let plan = if format == Format::Image {
        ocr::plan_image(path, ocr_cmd, registry, policy)?
    } else {
        plan_document(format, read_utf8(path)?, registry, policy)?
    };
    Ok(PreparedFile {
        path: path.to_owned(),
        plan,
    })
}

/// Phase two: pseudonymize, write the output and record an ANONYMIZE event.
pub fn commit_file(
    prepared: &PreparedFile,
    ctx: &RunContext,
    vault: &mut Vault,
    out: Option<&Path>,
) -> Result<DocumentReport, ProcessError> {
    let path = &prepared.path;
    let source_id = path.display().to_string();
    let done = apply_plan(&prepared.plan, ctx, vault, &source_id)?;
    let output = match out {
        Some(o) if o.is_dir() => o.join(
            default_output_path(path, prepared.plan.format)
                .file_name()
                .expect("output has a file name"),
        ),
        Some(o) => o.to_owned(),
        None => default_output_path(path, prepared.plan.format),
    };
    fs::write(&output, &done.output).map_err(|source| ProcessError::WriteFailure {
        path: output.clone(),
        source,
    })?;
    vault.append_audit(&AuditEvent::now(
        AuditAction::Anonymize,
        &ctx.audit_actor,
        "",
        format!(
            "{} -> {} ({} replacements)",
            path.display(),
            output.display(),
            done.replacements
        ),
    ))?;
    Ok(DocumentReport {
        source: path.clone(),
        format: prepared.plan.format,
        detections: done.detections,
        replacements: done.replacements,
        output,
        warnings: prepared.plan.warnings.clone(),
    })
}

/// Phase one over many files on a pool of `jobs` threads (0 = one per
/// core). Results come back in input order.
pub fn prepare_files(
    paths: &[PathBuf],
    registry: &RecognizerRegistry,
    policy: &PolicyConfig,
    ocr_cmd: &str,
    jobs: usize,
) -> Vec<Result<PreparedFile, ProcessError>> {
    let run = || {
        paths
            .par_iter()
            .map(|p| prepare_file(p, registry, policy, ocr_cmd).map_err(|e| e.in_file(p)))
            .collect()
    };
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(run),
        Err(_) => run(),
    }
}

pub fn process_file(
    path: &Path,
    ctx: &RunContext,
    vault: &mut Vault,
    registry: &RecognizerRegistry,
    out: Option<&Path>,
    ocr_cmd: &str,
) -> Result<DocumentReport, ProcessError> {
    prepare_file(path, registry, &ctx.policy, ocr_cmd)
        .and_then(|prepared| commit_file(&prepared, ctx, vault, out))
        .map_err(|e| e.in_file(path))
}
