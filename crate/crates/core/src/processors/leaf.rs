//! Rewritable string leaves of a document.
//!
//! Every format is reduced to a list of disjoint source ranges ("leaves"), each
//! holding a decoded string and a map from decoded byte offsets back to the
//! source. Rewriting replaces only the leaves whose text changed and copies
//! everything else through untouched, so element names, keys, numbers,
//! delimiters and whitespace survive byte-for-byte.

use std::ops::Range;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LeafKind {
    Text,
    CsvCell { quoted: bool },
    JsonKey,
    JsonString,
    XmlText,
    XmlCData,
    XmlAttr,
}

/// Decoded byte offset -> source offset relative to the leaf start.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OffsetMap {
    /// Decoded text equals the source slice shifted by this many bytes.
    Shift(usize),
    /// One entry per decoded byte plus a final end entry.
    Table(Vec<usize>),
}

impl OffsetMap {
    pub fn to_raw(&self, decoded: usize) -> usize {
        match self {
            OffsetMap::Shift(shift) => decoded + shift,
            OffsetMap::Table(table) => table[decoded],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Leaf {
    /// Source range replaced wholesale by [`encode`] output.
    pub raw: Range<usize>,
    pub text: String,
    pub map: OffsetMap,
    pub kind: LeafKind,
}

impl Leaf {
    /// Absolute source range of a decoded sub-range. The end maps through the
    /// last decoded byte so an escape straddling the boundary is included.
    pub fn source_range(&self, decoded: Range<usize>) -> Range<usize> {
        let start = self.raw.start + self.map.to_raw(decoded.start);
        let end = if decoded.end == 0 {
            start
        } else {
            let last = self.raw.start + self.map.to_raw(decoded.end - 1);
            let next = self.raw.start + self.map.to_raw(decoded.end);
            next.max(last + 1)
        };
        start..end
    }
}

fn csv_needs_quotes(s: &str) -> bool {
    s.contains([',', '"', '\n', '\r'])
}

/// Source representation of `text` for a leaf of this kind.
pub fn encode(kind: LeafKind, text: &str) -> String {
    match kind {
        LeafKind::Text => text.to_owned(),
        LeafKind::CsvCell { quoted } => {
            if quoted || csv_needs_quotes(text) {
                format!("\"{}\"", text.replace('"', "\"\""))
            } else {
                text.to_owned()
            }
        }
        LeafKind::JsonKey | LeafKind::JsonString => {
            serde_json::to_string(text).expect("strings always serialize")
        }
        LeafKind::XmlText => quick_xml::escape::partial_escape(text).into_owned(),
        LeafKind::XmlAttr => quick_xml::escape::escape(text).into_owned(),
        LeafKind::XmlCData => text.replace("]]>", "]]]]><![CDATA[>"),
    }
}

/// Rebuilds `source` with the given leaves replaced by new decoded text.
/// `replacements` pairs a leaf index with its new text and must be sorted by
/// leaf index.
pub fn splice(source: &str, leaves: &[Leaf], replacements: &[(usize, String)]) -> String {
    let mut out = String::with_capacity(source.len());
    let mut cursor = 0;
    for (idx, new_text) in replacements {
        let leaf = &leaves[*idx];
        out.push_str(&source[cursor..leaf.raw.start]);
        out.push_str(&encode(leaf.kind, new_text));
        cursor = leaf.raw.end;
    }
    out.push_str(&source[cursor..]);
    out
}
