//! Precision/recall scoring of detections against hand-annotated spans.
//!
//! Matching is exact: a prediction counts only when document, span and type
//! all equal a gold item. A partially covered entity is one FP plus one FN.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{Detection, EntityType, Span};
use crate::error::EvalError;

/// One line of a gold or prediction file.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GoldAnnotation {
    #[serde(rename = "doc")]
    pub doc_id: String,
    #[serde(flatten)]
    pub span: Span,
    #[serde(rename = "type")]
    pub entity_type: EntityType,
    pub text: String,
    /// Set on exported predictions that were detected but kept verbatim.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub preserved: bool,
}

impl GoldAnnotation {
    pub fn from_detection(doc_id: impl Into<String>, d: &Detection) -> Self {
        Self {
            doc_id: doc_id.into(),
            span: d.span,
            entity_type: d.entity_type.clone(),
            text: d.text.clone(),
            preserved: d.preserved,
        }
    }

    fn key(&self) -> (&str, usize, usize, &EntityType) {
        (&self.doc_id, self.span.start, self.span.end, &self.entity_type)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Empty denominators give 1.0 for precision and recall.
pub fn compute_metrics(tp: usize, fp: usize, fn_: usize) -> MetricsReport {
    let ratio = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    MetricsReport {
        tp,
        fp,
        fn_,
        precision,
        recall,
        f1,
    }
}

impl From<MatchCounts> for MetricsReport {
    fn from(c: MatchCounts) -> Self {
        compute_metrics(c.tp, c.fp, c.fn_)
    }
}

fn check_gold(gold: &[GoldAnnotation]) -> Result<(), EvalError> {
    let mut by_doc: HashMap<&str, Vec<Span>> = HashMap::new();
    for g in gold {
        by_doc.entry(&g.doc_id).or_default().push(g.span);
    }
    for (doc, mut spans) in by_doc {
        spans.sort_by_key(|s| (s.start, s.end));
        for pair in spans.windows(2) {
            if pair[0].overlaps(&pair[1]) {
                return Err(EvalError::OverlappingGold {
                    doc: doc.to_owned(),
                    first: (pair[0].start, pair[0].end),
                    second: (pair[1].start, pair[1].end),
                });
            }
        }
    }
    Ok(())
}

/// Exact doc/span/type matching; each gold item absorbs at most one
/// prediction.
pub fn match_detections(
    gold: &[GoldAnnotation],
    pred: &[GoldAnnotation],
) -> Result<MatchCounts, EvalError> {
    check_gold(gold)?;
    let mut open: HashMap<_, usize> = HashMap::new();
    for g in gold {
        *open.entry(g.key()).or_default() += 1;
    }
    let mut tp = 0;
    for p in pred {
        if let Some(n) = open.get_mut(&p.key()).filter(|n| **n > 0) {
            *n -= 1;
            tp += 1;
        }
    }
    Ok(MatchCounts {
        tp,
        fp: pred.len() - tp,
        fn_: gold.len() - tp,
    })
}

/// Counts per entity type name, over the union of gold and predicted types.
pub fn match_by_type(
    gold: &[GoldAnnotation],
    pred: &[GoldAnnotation],
) -> Result<BTreeMap<String, MatchCounts>, EvalError> {
    check_gold(gold)?;
    let mut groups: BTreeMap<String, (Vec<GoldAnnotation>, Vec<GoldAnnotation>)> = BTreeMap::new();
    for g in gold {
        groups.entry(g.entity_type.name()).or_default().0.push(g.clone());
    }
    for p in pred {
        groups.entry(p.entity_type.name()).or_default().1.push(p.clone());
    }
    groups
        .into_iter()
        .map(|(name, (g, p))| Ok((name, match_detections(&g, &p)?)))
        .collect()
}

/// Scores predictions, ignoring those flagged `preserved`.
pub fn evaluate(
    gold: &[GoldAnnotation],
    pred: &[GoldAnnotation],
) -> Result<(MetricsReport, BTreeMap<String, MetricsReport>), EvalError> {
    let pred: Vec<GoldAnnotation> = pred.iter().filter(|p| !p.preserved).cloned().collect();
    let overall = match_detections(gold, &pred)?.into();
    let by_type = match_by_type(gold, &pred)?
        .into_iter()
        .map(|(k, c)| (k, c.into()))
        .collect();
    Ok((overall, by_type))
}

/// Reads one annotation per non-blank line.
pub fn read_annotations(path: &Path) -> Result<Vec<GoldAnnotation>, EvalError> {
    let io = |source| EvalError::Io {
        path: path.to_owned(),
        source,
    };
    let file = File::open(path).map_err(io)?;
    let mut out = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: String| EvalError::BadLine {
            path: path.to_owned(),
            line: idx + 1,
            reason,
        };
        let ann: GoldAnnotation = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        if ann.span.start >= ann.span.end {
            return Err(bad(format!("empty span {}..{}", ann.span.start, ann.span.end)));
        }
        out.push(ann);
    }
    Ok(out)
}

pub fn write_annotations<W: Write>(mut w: W, items: &[GoldAnnotation]) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut w, item)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
