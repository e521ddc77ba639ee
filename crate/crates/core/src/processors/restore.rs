//! Re-identification of anonymized documents.
//!
//! Tokens are looked up by exact slug and every hit is verified by
//! recomputing the HMAC of the stored value under the supplied key before
//! anything is substituted. One mismatch aborts the whole document with
//! [`ProcessError::KeyMismatch`] and no audit events.

use std::fs;
use std::path::{Path, PathBuf};

use super::{detect_format, extract_leaves, leaf, read_utf8, Format};
use crate::error::ProcessError;
use crate::policy::SecretKey;
use crate::pseudonym::{compute_digest, find_tokens};
use crate::vault::{AuditAction, AuditEvent, Vault};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestoreReport {
    pub output: String,
    /// Tokens replaced by their original value.
    pub restored: usize,
    /// Rendered tokens with no matching vault record, left in place.
    pub unknown: Vec<String>,
}

/// Restores every known token in `src`.
///
/// A token whose type differs from the record stored under its slug counts
/// as unknown. Each restored occurrence appends one DEANONYMIZE event.
pub fn restore_document(
    format: Format,
    src: &str,
    key: &SecretKey,
    vault: &mut Vault,
    actor: &str,
    detail: &str,
) -> Result<RestoreReport, ProcessError> {
    let leaves = extract_leaves(format, src)?;
    let mut verified = std::collections::HashMap::<String, bool>::new();
    let mut replacements = Vec::new();
    let mut restored_slugs = Vec::new();
    let mut unknown = Vec::new();

    for (idx, lf) in leaves.iter().enumerate() {
        let tokens = find_tokens(&lf.text);
        if tokens.is_empty() {
            continue;
        }
        let mut text = lf.text.clone();
        let mut changed = false;
        for (range, token) in tokens.into_iter().rev() {
            let record = match vault.get_by_slug(&token.slug) {
                Some(r) if r.entity_type == token.entity_type => r,
                _ => {
                    unknown.push(token.rendered);
                    continue;
                }
            };
            let ok = match verified.get(&record.slug) {
                Some(&ok) => ok,
                None => {
                    let digest =
                        compute_digest(key.as_bytes(), &record.entity_type, &record.original_value)?;
                    let ok = digest.hex() == record.digest_hex;
                    verified.insert(record.slug.clone(), ok);
                    ok
                }
            };
            if !ok {
                return Err(ProcessError::KeyMismatch { slug: token.slug });
            }
            text.replace_range(range, &record.original_value);
            restored_slugs.push(token.slug);
            changed = true;
        }
        if changed {
            replacements.push((idx, text));
        }
    }
    unknown.reverse();

    for slug in &restored_slugs {
        vault.append_audit(&AuditEvent::now(AuditAction::Deanonymize, actor, slug, detail))?;
    }
    Ok(RestoreReport {
        output: leaf::splice(src, &leaves, &replacements),
        restored: restored_slugs.len(),
        unknown,
    })
}

/// `<stem>.restored.<ext>` beside the input, dropping a trailing `.anon`.
pub fn default_restored_path(input: &Path) -> PathBuf {
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "output".to_owned());
    let stem = stem.strip_suffix(".anon").unwrap_or(&stem);
    let name = match input.extension() {
        Some(ext) => format!("{stem}.restored.{}", ext.to_string_lossy()),
        None => format!("{stem}.restored"),
    };
    input.with_file_name(name)
}

/// Restores one file and writes the result; returns the output path.
pub fn restore_file(
    path: &Path,
    key: &SecretKey,
    vault: &mut Vault,
    actor: &str,
    out: Option<&Path>,
) -> Result<(PathBuf, RestoreReport), ProcessError> {
    let mut run = || {
        let format = match detect_format(path)? {
            Format::Image => Format::Text,
            f => f,
        };
        let src = read_utf8(path)?;
        let report = restore_document(format, &src, key, vault, actor, &path.display().to_string())?;
        let output = match out {
            Some(o) if o.is_dir() => o.join(default_restored_path(path).file_name().expect("named")),
            Some(o) => o.to_owned(),
            None => default_restored_path(path),
        };
        fs::write(&output, &report.output).map_err(|source| ProcessError::WriteFailure {
            path: output.clone(),
            source,
        })?;
        Ok((output, report))
    };
    run().map_err(|e: ProcessError| e.in_file(path))
}
