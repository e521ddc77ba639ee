//! Keyed pseudonyms: HMAC-SHA256 over a typed canonical input, truncated to a
//! slug and rendered as `<TYPE_slug>`.
//!
//! The vault always stores the full 256-bit digest; the slug is only the
//! visible prefix. When a prefix is already taken by a different digest the
//! slug grows one hex character at a time until it is unique.

use std::fmt;
use std::ops::Range;
use std::sync::OnceLock;

use hmac::{Hmac, Mac};
use regex::Regex;
use sha2::Sha256;

use crate::domain::EntityType;
use crate::error::PseudonymError;
use crate::policy::{RunContext, MAX_SLUG_LENGTH};
use crate::vault::{PseudonymRecord, Vault};

type HmacSha256 = Hmac<Sha256>;

/// Separates the type name from the value in the HMAC message.
pub const UNIT_SEPARATOR: u8 = 0x1f;

/// Grammar of a rendered token; the exact complement of [`format_token`].
pub const TOKEN_PATTERN: &str = r"<([A-Z0-9_:]+)_([0-9a-f]{1,64})>";

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Digest256([u8; 32]);

impl Digest256 {
    pub fn from_bytes(bytes: [u8; 32]) -> Self {
        Self(bytes)
    }

    pub fn from_hex(hex_str: &str) -> Option<Self> {
        if hex_str.len() != 64 || hex_str.bytes().any(|b| b.is_ascii_uppercase()) {
            return None;
        }
        let mut out = [0u8; 32];
        hex::decode_to_slice(hex_str, &mut out).ok()?;
        Some(Self(out))
    }

    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }

    pub fn hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for Digest256 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest256({})", self.hex())
    }
}

/// A rendered pseudonym, `<TYPE_slug>`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub entity_type: EntityType,
    pub slug: String,
    pub rendered: String,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.rendered)
    }
}

pub fn canonical_input(entity_type: &EntityType, value: &str) -> Result<Vec<u8>, PseudonymError> {
    if value.is_empty() {
        return Err(PseudonymError::EmptyValue);
    }
    let name = entity_type.name();
    let mut out = Vec::with_capacity(name.len() + 1 + value.len());
    out.extend_from_slice(name.as_bytes());
    out.push(UNIT_SEPARATOR);
    out.extend_from_slice(value.as_bytes());
    Ok(out)
}

pub fn compute_digest(
    key: &[u8],
    entity_type: &EntityType,
    value: &str,
) -> Result<Digest256, PseudonymError> {
    if key.is_empty() {
        return Err(PseudonymError::EmptyKey);
    }
    let message = canonical_input(entity_type, value)?;
    Ok(hmac_sha256(key, &message))
}

/// Raw HMAC-SHA256. Accepts any key length, including empty.
pub fn hmac_sha256(key: &[u8], message: &[u8]) -> Digest256 {
    let mut mac = HmacSha256::new_from_slice(key).expect("HMAC accepts keys of any length");
    mac.update(message);
    Digest256(mac.finalize().into_bytes().into())
}

pub fn make_slug(digest: &Digest256, length: usize) -> Result<String, PseudonymError> {
    if !(1..=MAX_SLUG_LENGTH).contains(&length) {
        return Err(PseudonymError::LengthOutOfRange(length));
    }
    let mut hex = digest.hex();
    hex.truncate(length);
    Ok(hex)
}

fn is_slug(s: &str) -> bool {
    !s.is_empty()
        && s.len() <= MAX_SLUG_LENGTH
        && s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

pub fn format_token(entity_type: &EntityType, slug: &str) -> Result<Token, PseudonymError> {
    if !is_slug(slug) {
        return Err(PseudonymError::MalformedSlug(slug.to_owned()));
    }
    Ok(Token {
        entity_type: entity_type.clone(),
        slug: slug.to_owned(),
        rendered: format!("<{}_{}>", entity_type.name(), slug),
    })
}

fn token_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(TOKEN_PATTERN).expect("token pattern compiles"))
}

/// Parses a whole string as one token.
pub fn parse_token(rendered: &str) -> Result<Token, PseudonymError> {
    let malformed = || PseudonymError::MalformedToken(rendered.to_owned());
    let caps = token_regex().captures(rendered).ok_or_else(malformed)?;
    if caps.get(0).map(|m| m.range()) != Some(0..rendered.len()) {
        return Err(malformed());
    }
    let entity_type: EntityType = caps[1].parse().map_err(|_| malformed())?;
    format_token(&entity_type, &caps[2])
}

/// Every well-formed token in `text`, with its byte range.
///
/// Matches whose type part is not a valid entity type are skipped.
pub fn find_tokens(text: &str) -> Vec<(Range<usize>, Token)> {
    token_regex()
        .captures_iter(text)
        .filter_map(|caps| {
            let whole = caps.get(0)?;
            let entity_type: EntityType = caps[1].parse().ok()?;
            let token = format_token(&entity_type, &caps[2]).ok()?;
            Some((whole.range(), token))
        })
        .collect()
}

/// Returns the vault-backed token for `value`, inserting a record on first
/// sight.
pub fn pseudonymize(
    ctx: &RunContext,
    vault: &mut Vault,
    entity_type: &EntityType,
    value: &str,
    source: &str,
) -> Result<Token, PseudonymError> {
    let digest = compute_digest(ctx.secret_key.as_bytes(), entity_type, value)?;
    let digest_hex = digest.hex();

    if let Some(existing) = vault.get_by_digest(&digest_hex) {
        return format_token(&existing.entity_type, &existing.slug);
    }

    let min_len = ctx.policy.slug_length.clamp(1, MAX_SLUG_LENGTH);
    let slug = (min_len..=MAX_SLUG_LENGTH)
        .map(|len| &digest_hex[..len])
        .find(|prefix| vault.get_by_slug(prefix).is_none())
        .ok_or_else(|| PseudonymError::SlugSpaceExhausted(digest_hex.clone()))?
        .to_owned();

    let record = PseudonymRecord::new(
        digest_hex,
        slug,
        entity_type.clone(),
        value.to_owned(),
        source.to_owned(),
    )?;
    let stored = vault.upsert_record(record)?;
    format_token(&stored.entity_type, &stored.slug)
}
