//! RFC 4180 field scanner that keeps the source range and quoting of every
//! cell, so cells can be rewritten in place.

use super::leaf::{Leaf, LeafKind, OffsetMap};
use crate::error::ProcessError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvField {
    pub row: usize,
    pub col: usize,
    pub leaf: Leaf,
}

/// Every field of `src`, including empty ones, in row-major order.
pub fn scan_fields(src: &str) -> Result<Vec<CsvField>, ProcessError> {
    let bytes = src.as_bytes();
    let mut fields = Vec::new();
    let (mut row, mut col) = (0usize, 0usize);
    let mut i = 0;
    let malformed = |row: usize, col: usize, reason: &str| ProcessError::MalformedCsv {
        row: row + 1,
        col: col + 1,
        reason: reason.to_owned(),
    };

    while i < bytes.len() {
        let start = i;
        let leaf = if bytes[i] == b'"' {
            let mut text = String::new();
            let mut table = Vec::new();
            i += 1;
            let mut seg = i;
            loop {
                match bytes.get(i) {
                    None => return Err(malformed(row, col, "unterminated quoted field")),
                    Some(b'"') if bytes.get(i + 1) == Some(&b'"') => {
                        text.push_str(&src[seg..i]);
                        table.extend((seg..i).map(|p| p - start));
                        text.push('"');
                        table.push(i - start);
                        i += 2;
                        seg = i;
                    }
                    Some(b'"') => {
                        text.push_str(&src[seg..i]);
                        table.extend((seg..i).map(|p| p - start));
                        table.push(i - start);
                        i += 1;
                        break;
                    }
                    Some(_) => i += 1,
                }
            }
            if !matches!(bytes.get(i), None | Some(b',') | Some(b'\n') | Some(b'\r')) {
                return Err(malformed(row, col, "text after closing quote"));
            }
            Leaf {
                raw: start..i,
                text,
                map: OffsetMap::Table(table),
                kind: LeafKind::CsvCell { quoted: true },
            }
        } else {
            while i < bytes.len() && !matches!(bytes[i], b',' | b'\n' | b'\r') {
                if bytes[i] == b'"' {
                    return Err(malformed(row, col, "quote inside unquoted field"));
                }
                i += 1;
            }
            Leaf {
                raw: start..i,
                text: src[start..i].to_owned(),
                map: OffsetMap::Shift(0),
                kind: LeafKind::CsvCell { quoted: false },
            }
        };
        fields.push(CsvField { row, col, leaf });

        match bytes.get(i) {
            Some(b',') => {
                i += 1;
                col += 1;
                if i == bytes.len() {
                    // Trailing comma at EOF: one more empty field.
                    fields.push(CsvField {
                        row,
                        col,
                        leaf: Leaf {
                            raw: i..i,
                            text: String::new(),
                            map: OffsetMap::Shift(0),
                            kind: LeafKind::CsvCell { quoted: false },
                        },
                    });
                }
            }
            Some(b'\r') if bytes.get(i + 1) == Some(&b'\n') => {
                i += 2;
                row += 1;
                col = 0;
            }
            Some(b'\n') => {
                i += 1;
                row += 1;
                col = 0;
            }
            Some(b'\r') => return Err(malformed(row, col, "bare carriage return")),
            _ => {}
        }
    }
    Ok(fields)
}

/// Non-empty cells as rewritable leaves.
pub fn leaves(src: &str) -> Result<Vec<Leaf>, ProcessError> {
    Ok(scan_fields(src)?
        .into_iter()
        .map(|f| f.leaf)
        .filter(|l| !l.text.is_empty())
        .collect())
}

/// Cells per row, for shape checks.
pub fn shape(src: &str) -> Result<Vec<usize>, ProcessError> {
    let mut rows: Vec<usize> = Vec::new();
    for f in scan_fields(src)? {
        if rows.len() <= f.row {
            rows.resize(f.row + 1, 0);
        }
        rows[f.row] += 1;
    }
    Ok(rows)
}
