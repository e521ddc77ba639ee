//! String literals of a JSON document, located in the source.
//!
//! The document is validated by `serde_json` first; the scanner below then
//! only has to find string literals and tell keys from values.

use serde::de::IgnoredAny;

use super::leaf::{Leaf, LeafKind, OffsetMap};
use crate::error::ProcessError;

pub fn validate(src: &str) -> Result<(), ProcessError> {
    serde_json::from_str::<IgnoredAny>(src)
        .map(|_| ())
        .map_err(|e| ProcessError::MalformedJson(e.to_string()))
}

/// Every string literal (keys and values) as a leaf covering the quotes.
pub fn leaves(src: &str) -> Result<Vec<Leaf>, ProcessError> {
    validate(src)?;
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b'"' {
            i += 1;
            continue;
        }
        let start = i;
        let (text, table, end) = decode_literal(src, start)?;
        let mut j = end;
        while j < bytes.len() && bytes[j].is_ascii_whitespace() {
            j += 1;
        }
        let kind = if bytes.get(j) == Some(&b':') {
            LeafKind::JsonKey
        } else {
            LeafKind::JsonString
        };
        out.push(Leaf {
            raw: start..end,
            text,
            map: OffsetMap::Table(table),
            kind,
        });
        i = end;
    }
    Ok(out)
}

/// Decodes the literal opening at `start`; returns text, offset table and the
/// index just past the closing quote.
fn decode_literal(src: &str, start: usize) -> Result<(String, Vec<usize>, usize), ProcessError> {
    let bytes = src.as_bytes();
    let bad = |why: &str| ProcessError::MalformedJson(format!("{why} at byte {start}"));
    let mut text = String::new();
    let mut table = Vec::new();
    let mut i = start + 1;
    loop {
        match bytes.get(i) {
            None => return Err(bad("unterminated string")),
            Some(b'"') => {
                table.push(i - start);
                return Ok((text, table, i + 1));
            }
            Some(b'\\') => {
                let esc_at = i - start;
                let decoded = match bytes.get(i + 1) {
                    Some(b'"') => '"',
                    Some(b'\\') => '\\',
                    Some(b'/') => '/',
                    Some(b'b') => '\u{8}',
                    Some(b'f') => '\u{c}',
                    Some(b'n') => '\n',
                    Some(b'r') => '\r',
                    Some(b't') => '\t',
                    Some(b'u') => {
                        let (c, used) = decode_unicode_escape(src, i).ok_or_else(|| bad("bad \\u escape"))?;
                        let mut buf = [0u8; 4];
                        let s = c.encode_utf8(&mut buf);
                        text.push_str(s);
                        table.extend(std::iter::repeat_n(esc_at, s.len()));
                        i += used;
                        continue;
                    }
                    _ => return Err(bad("bad escape")),
                };
                text.push(decoded);
                table.push(esc_at);
                i += 2;
            }
            Some(_) => {
                let ch = src[i..].chars().next().expect("inside string");
                text.push(ch);
                table.extend((0..ch.len_utf8()).map(|k| i - start + k));
                i += ch.len_utf8();
            }
        }
    }
}

fn hex4(src: &str, at: usize) -> Option<u32> {
    u32::from_str_radix(src.get(at..at + 4)?, 16).ok()
}

/// `\uXXXX`, or a surrogate pair `\uD8xx\uDCxx`; returns the char and bytes used.
fn decode_unicode_escape(src: &str, at: usize) -> Option<(char, usize)> {
    let hi = hex4(src, at + 2)?;
    if (0xD800..0xDC00).contains(&hi) {
        if src.get(at + 6..at + 8)? != "\\u" {
            return None;
        }
        let lo = hex4(src, at + 8)?;
        if !(0xDC00..0xE000).contains(&lo) {
            return None;
        }
        let code = 0x10000 + ((hi - 0xD800) << 10) + (lo - 0xDC00);
        return Some((char::from_u32(code)?, 12));
    }
    Some((char::from_u32(hi)?, 6))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keys_and_values_are_told_apart() {
        let src = r#"{"host" : "203.0.113.7", "n": 42, "tags": ["a", {"k":"v"}]}"#;
        let found: Vec<(LeafKind, String)> =
            leaves(src).unwrap().into_iter().map(|l| (l.kind, l.text)).collect();
        assert_eq!(
            found,
            vec![
                (LeafKind::JsonKey, "host".into()),
                (LeafKind::JsonString, "203.0.113.7".into()),
                (LeafKind::JsonKey, "n".into()),
                (LeafKind::JsonKey, "tags".into()),
                (LeafKind::JsonString, "a".into()),
                (LeafKind::JsonKey, "k".into()),
                (LeafKind::JsonString, "v".into()),
            ]
        );
    }

    #[test]
    fn escapes_decode_and_map_back() {
        let src = r#"["a\"b\u00e9\ud83d\ude00\n"]"#;
        let leaf = leaves(src).unwrap().remove(0);
        assert_eq!(leaf.text, "a\"bé😀\n");
        let expected: String = serde_json::from_str::<Vec<String>>(src).unwrap().remove(0);
        assert_eq!(leaf.text, expected);
        let quote = leaf.text.find('"').unwrap();
        assert_eq!(&src[leaf.source_range(quote..quote + 1)], "\\\"");
        let e = leaf.text.find('é').unwrap();
        assert_eq!(&src[leaf.source_range(e..e + 2)], "\\u00e9");
        let smile = leaf.text.find('😀').unwrap();
        assert_eq!(&src[leaf.source_range(smile..smile + 4)], "\\ud83d\\ude00");
        assert_eq!(&src[leaf.source_range(0..leaf.text.len())], &src[2..src.len() - 2]);
    }

    #[test]
    fn malformed_documents_rejected() {
        for bad in ["{", r#"{"a" 1}"#, "[1,]", r#"["\q"]"#] {
            assert!(matches!(leaves(bad), Err(ProcessError::MalformedJson(_))), "{bad}");
        }
    }
}
