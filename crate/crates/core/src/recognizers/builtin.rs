//! Built-in technical and network recognizers.

use std::net::Ipv6Addr;
use std::sync::OnceLock;

use super::{Recognizer, RegexRecognizer};
use crate::domain::EntityType;
use crate::pseudonym::parse_token;

pub const PRIORITY_CERT_BODY: i32 = 12;
pub const PRIORITY_CPE: i32 = 11;
pub const PRIORITY_URL: i32 = 10;
pub const PRIORITY_EMAIL: i32 = 9;
pub const PRIORITY_IP: i32 = 8;
pub const PRIORITY_CERT_SERIAL: i32 = 6;
pub const PRIORITY_HASH: i32 = 5;
pub const PRIORITY_HOSTNAME: i32 = 4;
pub const PRIORITY_CREDENTIAL: i32 = 3;
pub const PRIORITY_CUSTOM: i32 = 2;
pub const PRIORITY_DICTIONARY: i32 = 1;

const OCTET: &str = r"(?:25[0-5]|2[0-4][0-9]|1[0-9]{2}|[1-9]?[0-9])";

pub(crate) fn is_word_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn char_before(text: &str, at: usize) -> Option<char> {
    text[..at].chars().next_back()
}

fn char_after(text: &str, at: usize) -> Option<char> {
    text[at..].chars().next()
}

pub fn ipv4() -> RegexRecognizer {
    let pattern = format!(r"\b(?:{OCTET}\.){{3}}{OCTET}\b");
    RegexRecognizer::new("ipv4", EntityType::IpAddress, &pattern, PRIORITY_IP)
        .expect("builtin pattern compiles")
        .with_refine(refine_ipv4)
}

/// Rejects quads inside longer dotted-number runs such as OIDs or versions.
fn refine_ipv4(text: &str, start: usize, end: usize) -> Option<(usize, usize)> {
    let before = &text.as_bytes()[..start];
    let after = &text.as_bytes()[end..];
    let dotted_before = before.len() >= 2 && before[before.len() - 1] == b'.' && before[before.len() - 2].is_ascii_digit();
    let dotted_after = after.len() >= 2 && after[0] == b'.' && after[1].is_ascii_digit();
    (!dotted_before && !dotted_after).then_some((start, end))
}

/// Full and `::`-compressed IPv6, validated by the standard parser.
pub fn ipv6() -> RegexRecognizer {
    let group = "[0-9A-Fa-f]{1,4}";
    let pattern = format!(
        r"(?:{group}:){{7}}{group}|(?:{group}(?::{group})*)?::(?:{group}(?::{group})*)?"
    );
    RegexRecognizer::new("ipv6", EntityType::IpAddress, &pattern, PRIORITY_IP)
        .expect("builtin pattern compiles")
        .with_refine(refine_ipv6)
}

fn refine_ipv6(text: &str, start: usize, end: usize) -> Option<(usize, usize)> {
    let blocked_before = |c: char| is_word_char(c) || c == ':' || c == '.';
    let blocked_after = |c: char| is_word_char(c) || c == ':';
    if char_before(text, start).is_some_and(blocked_before)
        || char_after(text, end).is_some_and(blocked_after)
    {
        return None;
    }
    let candidate = &text[start..end];
    if !candidate.bytes().any(|b| b.is_ascii_digit()) || candidate.parse::<Ipv6Addr>().is_err() {
        return None;
    }
    // Eight two-digit groups without compression read as a certificate serial.
    let all_pairs = !candidate.contains("::") && candidate.split(':').all(|g| g.len() == 2);
    (!all_pairs).then_some((start, end))
}

pub fn email() -> RegexRecognizer {
    RegexRecognizer::new(
        "email",
        EntityType::Email,
        r"\b[A-Za-z0-9._%+-]+@(?:[A-Za-z0-9](?:[A-Za-z0-9-]*[A-Za-z0-9])?\.)+[A-Za-z]{2,}\b",
        PRIORITY_EMAIL,
    )
    .expect("builtin pattern compiles")
}

fn trim_trailing(text: &str, start: usize, end: usize, junk: &[char]) -> Option<(usize, usize)> {
    let trimmed = text[start..end].trim_end_matches(junk);
    (!trimmed.is_empty()).then_some((start, start + trimmed.len()))
}

pub fn url() -> RegexRecognizer {
    RegexRecognizer::new(
        "url",
        EntityType::Url,
        r#"\b[A-Za-z][A-Za-z0-9+.\-]*://[^\s<>"'`{}|\\^\[\]]+"#,
        PRIORITY_URL,
    )
    .expect("builtin pattern compiles")
    .with_refine(|text, s, e| {
        let (s, e) = trim_trailing(text, s, e, &['.', ',', ';', ':', '!', '?', ')'])?;
        // Needs something after the scheme separator.
        (!text[s..e].ends_with("://")).then_some((s, e))
    })
}

/// Two or more dot-separated labels ending in an alphabetic label.
pub fn hostname() -> RegexRecognizer {
    RegexRecognizer::new(
        "hostname",
        EntityType::Hostname,
        r"(?i)\b(?:[a-z0-9](?:[a-z0-9-]*[a-z0-9])?\.)+[a-z]{2,63}\b",
        PRIORITY_HOSTNAME,
    )
    .expect("builtin pattern compiles")
    .with_refine(|text, s, e| {
        // A trailing hyphen means the final label continues (e.g. "host.lan-01").
        (char_after(text, e) != Some('-')).then_some((s, e))
    })
}

/// MD5, SHA-1 and SHA-256 lengths; all-decimal runs are treated as numbers
/// (timestamps, counters) rather than digests.
pub fn hash() -> RegexRecognizer {
    RegexRecognizer::new(
        "hash",
        EntityType::Hash,
        r"\b(?:[0-9A-Fa-f]{64}|[0-9A-Fa-f]{40}|[0-9A-Fa-f]{32})\b",
        PRIORITY_HASH,
    )
    .expect("builtin pattern compiles")
    .with_refine(|text, s, e| {
        text[s..e]
            .bytes()
            .any(|b| b.is_ascii_alphabetic())
            .then_some((s, e))
    })
}

pub fn cert_serial() -> RegexRecognizer {
    RegexRecognizer::new(
        "cert_serial",
        EntityType::CertSerial,
        r"\b[0-9A-Fa-f]{2}(?::[0-9A-Fa-f]{2}){5,}\b",
        PRIORITY_CERT_SERIAL,
    )
    .expect("builtin pattern compiles")
}

pub fn cert_body() -> RegexRecognizer {
    RegexRecognizer::new(
        "cert_body",
        EntityType::CertBody,
        r"(?s)-----BEGIN CERTIFICATE-----.*?-----END CERTIFICATE-----",
        PRIORITY_CERT_BODY,
    )
    .expect("builtin pattern compiles")
}

pub fn cpe() -> RegexRecognizer {
    RegexRecognizer::new(
        "cpe",
        EntityType::CpeString,
        r#"\bcpe:(?:/|2\.3:)[^\s<>"'`]+"#,
        PRIORITY_CPE,
    )
    .expect("builtin pattern compiles")
    .with_refine(|text, s, e| trim_trailing(text, s, e, &['.', ',', ';', ')', ']']))
}

/// `keyword [:=] value`; only the value is reported.
pub fn credential(keywords: &[String]) -> RegexRecognizer {
    let alternation = keywords
        .iter()
        .map(|k| regex::escape(k))
        .collect::<Vec<_>>()
        .join("|");
    let pattern = format!(r"(?i)\b(?:{alternation})\s*[:=]\s*(\S+)");
    RegexRecognizer::new("credential", EntityType::Credential, &pattern, PRIORITY_CREDENTIAL)
        .expect("escaped keywords compile")
        .with_group(1)
        .with_refine(refine_credential)
}

fn refine_credential(text: &str, start: usize, end: usize) -> Option<(usize, usize)> {
    let raw = &text[start..end];
    let trailing = raw.trim_end_matches([',', ';']);
    let unquoted = trailing.trim_start_matches(['"', '\'']);
    let lead = trailing.len() - unquoted.len();
    let value = unquoted.trim_end_matches(['"', '\'']);
    if value.is_empty() || parse_token(value).is_ok() {
        return None;
    }
    let s = start + lead;
    Some((s, s + value.len()))
}

/// The full built-in set, ordered from highest to lowest priority.
pub fn all(credential_keywords: &[String]) -> Vec<Box<dyn Recognizer>> {
    vec![
        Box::new(cert_body()),
        Box::new(cpe()),
        Box::new(url()),
        Box::new(email()),
        Box::new(ipv4()),
        Box::new(ipv6()),
        Box::new(cert_serial()),
        Box::new(hash()),
        Box::new(hostname()),
        Box::new(credential(credential_keywords)),
    ]
}

pub(crate) fn cached(
    slot: &'static OnceLock<RegexRecognizer>,
    make: fn() -> RegexRecognizer,
) -> &'static RegexRecognizer {
    slot.get_or_init(make)
}
