//! Text nodes, CDATA sections and attribute values of an XML document,
//! located in the source.
//!
//! Element and attribute names, namespaces, comments, processing
//! instructions and the DOCTYPE are never leaves, so they pass through the
//! rewrite untouched.

use quick_xml::events::Event;
use quick_xml::Reader;

use super::leaf::{Leaf, LeafKind, OffsetMap};
use crate::error::ProcessError;

fn line_col(src: &str, pos: usize) -> (usize, usize) {
    let before = &src[..pos.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn malformed(src: &str, pos: usize, reason: impl Into<String>) -> ProcessError {
    let (line, col) = line_col(src, pos);
    ProcessError::MalformedXml {
        line,
        col,
        reason: reason.into(),
    }
}

/// Resolves predefined and numeric character references, keeping a map from
/// decoded offsets back into `raw`.
pub fn unescape_with_map(raw: &str) -> Result<(String, OffsetMap), (usize, String)> {
    if !raw.contains('&') {
        return Ok((raw.to_owned(), OffsetMap::Shift(0)));
    }
    let mut text = String::with_capacity(raw.len());
    let mut table = Vec::with_capacity(raw.len() + 1);
    let mut i = 0;
    while i < raw.len() {
        let rest = &raw[i..];
        if let Some(after) = rest.strip_prefix('&') {
            let semi = after
                .find(';')
                .ok_or_else(|| (i, "unterminated entity reference".to_owned()))?;
            let name = &after[..semi];
            let resolved = match name {
                "lt" => '<',
                "gt" => '>',
                "amp" => '&',
                "quot" => '"',
                "apos" => '\'',
                _ => {
                    let code = if let Some(hex) = name.strip_prefix("#x") {
                        u32::from_str_radix(hex, 16).ok()
                    } else if let Some(dec) = name.strip_prefix('#') {
                        dec.parse().ok()
                    } else {
                        None
                    };
                    code.and_then(char::from_u32)
                        .ok_or_else(|| (i, format!("unsupported entity &{name};")))?
                }
            };
            text.push(resolved);
            table.extend(std::iter::repeat_n(i, resolved.len_utf8()));
            i += semi + 2;
        } else {
            let ch = rest.chars().next().expect("non-empty");
            text.push(ch);
            table.extend((0..ch.len_utf8()).map(|k| i + k));
            i += ch.len_utf8();
        }
    }
    table.push(raw.len());
    Ok((text, OffsetMap::Table(table)))
}

fn offset_in(src: &str, part: &[u8]) -> Option<usize> {
    let base = src.as_ptr() as usize;
    let at = part.as_ptr() as usize;
    (at >= base && at + part.len() <= base + src.len()).then(|| at - base)
}

fn escaped_leaf(src: &str, start: usize, end: usize, kind: LeafKind) -> Result<Leaf, ProcessError> {
    let (text, map) =
        unescape_with_map(&src[start..end]).map_err(|(at, why)| malformed(src, start + at, why))?;
    Ok(Leaf {
        raw: start..end,
        text,
        map,
        kind,
    })
}

/// Every non-blank text node, CDATA section and attribute value.
pub fn leaves(src: &str) -> Result<Vec<Leaf>, ProcessError> {
    let mut reader = Reader::from_str(src);
    let mut out = Vec::new();
    let mut depth = 0usize;
    let mut saw_root = false;
    loop {
        let start = reader.buffer_position() as usize;
        let event = reader
            .read_event()
            .map_err(|e| malformed(src, reader.error_position() as usize, e.to_string()))?;
        let end = reader.buffer_position() as usize;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                if depth == 0 && saw_root {
                    return Err(malformed(src, start, "more than one root element"));
                }
                saw_root = true;
                if matches!(event, Event::Start(_)) {
                    depth += 1;
                }
                for attr in e.attributes().with_checks(true) {
                    let attr = attr.map_err(|err| malformed(src, start, err.to_string()))?;
                    let value_start = offset_in(src, &attr.value)
                        .ok_or_else(|| malformed(src, start, "attribute value not borrowed"))?;
                    let value_end = value_start + attr.value.len();
                    let leaf = escaped_leaf(src, value_start, value_end, LeafKind::XmlAttr)?;
                    if !leaf.text.trim().is_empty() {
                        out.push(leaf);
                    }
                }
            }
            Event::End(_) => {
                depth = depth
                    .checked_sub(1)
                    .ok_or_else(|| malformed(src, start, "unexpected closing tag"))?;
            }
            Event::Text(_) => {
                if depth == 0 {
                    if !src[start..end].trim().is_empty() {
                        return Err(malformed(src, start, "text outside the root element"));
                    }
                    continue;
                }
                let leaf = escaped_leaf(src, start, end, LeafKind::XmlText)?;
                if !leaf.text.trim().is_empty() {
                    out.push(leaf);
                }
            }
            Event::CData(_) => {
                let (cs, ce) = (start + "<![CDATA[".len(), end - "]]>".len());
                if cs < ce && !src[cs..ce].trim().is_empty() {
                    out.push(Leaf {
                        raw: cs..ce,
                        text: src[cs..ce].to_owned(),
                        map: OffsetMap::Shift(0),
                        kind: LeafKind::XmlCData,
                    });
                }
            }
            Event::Eof => break,
            _ => {}
        }
    }
    if depth != 0 {
        return Err(malformed(src, src.len(), "unclosed element at end of document"));
    }
    if !saw_root {
        return Err(malformed(src, src.len(), "no root element"));
    }
    Ok(out)
}
