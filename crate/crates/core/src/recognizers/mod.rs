//! Pattern-based entity detection.
//!
//! A [`RecognizerRegistry`] holds regex recognizers (the built-ins plus any
//! operator-declared `CUSTOM:` patterns) and a verbatim dictionary. Statistical
//! NER can be plugged in by implementing [`Recognizer`].
//!
//! [`recognize_all`] runs everything, resolves overlaps (longer span wins,
//! then higher priority, then earlier start), drops allow-listed matches and
//! flags detections of preserved types.

pub mod builtin;
pub mod config;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::OnceLock;

use regex::Regex;

use crate::domain::{Detection, EntityType};
use crate::error::RecognizerError;
use crate::policy::{PolicyConfig, DEFAULT_CREDENTIAL_KEYWORDS};

pub use config::{parse_recognizer_config, RecognizerConfig};

/// Something that finds entities in text.
pub trait Recognizer: Send + Sync {
    fn id(&self) -> &str;
    fn entity_type(&self) -> &EntityType;
    fn priority(&self) -> i32;
    fn recognize(&self, text: &str) -> Result<Vec<Detection>, RecognizerError>;
}

/// Narrows or rejects a raw match: `(text, start, end) -> Some((start, end))`.
pub type Refine = fn(&str, usize, usize) -> Option<(usize, usize)>;

#[derive(Debug, Clone)]
pub struct RegexRecognizer {
    id: String,
    entity_type: EntityType,
    regex: Regex,
    priority: i32,
    group: usize,
    refine: Option<Refine>,
}

impl RegexRecognizer {
    pub fn new(
        id: &str,
        entity_type: EntityType,
        pattern: &str,
        priority: i32,
    ) -> Result<Self, RecognizerError> {
        let regex = Regex::new(pattern).map_err(|e| RecognizerError::PatternCompile {
            id: id.to_owned(),
            reason: e.to_string(),
        })?;
        Ok(Self {
            id: id.to_owned(),
            entity_type,
            regex,
            priority,
            group: 0,
            refine: None,
        })
    }

    /// Report only this capture group instead of the whole match.
    pub fn with_group(mut self, group: usize) -> Self {
        self.group = group;
        self
    }

    pub fn with_refine(mut self, refine: Refine) -> Self {
        self.refine = Some(refine);
        self
    }

    pub fn pattern(&self) -> &str {
        self.regex.as_str()
    }
}

impl Recognizer for RegexRecognizer {
    fn id(&self) -> &str {
        &self.id
    }

    fn entity_type(&self) -> &EntityType {
        &self.entity_type
    }

    fn priority(&self) -> i32 {
        self.priority
    }

    fn recognize(&self, text: &str) -> Result<Vec<Detection>, RecognizerError> {
        let mut out = Vec::new();
        for caps in self.regex.captures_iter(text) {
            let Some(m) = caps.get(self.group) else { continue };
            let (mut start, mut end) = (m.start(), m.end());
            if let Some(refine) = self.refine {
                match refine(text, start, end) {
                    Some((s, e)) => (start, end) = (s, e),
                    None => continue,
                }
            }
            if start < end {
                out.push(
                    Detection::exact(text, start, end, self.entity_type.clone(), &self.id)
                        .with_priority(self.priority),
                );
            }
        }
        Ok(out)
    }
}

#[derive(Default)]
pub struct RecognizerRegistry {
    recognizers: Vec<Box<dyn Recognizer>>,
    dictionary_terms: BTreeMap<String, EntityType>,
}

impl std::fmt::Debug for RecognizerRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RecognizerRegistry")
            .field("recognizers", &self.ids())
            .field("dictionary_terms", &self.dictionary_terms)
            .finish()
    }
}

pub const DICTIONARY_ID: &str = "dictionary";

impl RecognizerRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn ids(&self) -> Vec<&str> {
        self.recognizers.iter().map(|r| r.id()).collect()
    }

    pub fn recognizers(&self) -> impl Iterator<Item = &dyn Recognizer> {
        self.recognizers.iter().map(|r| r.as_ref())
    }

    pub fn dictionary_terms(&self) -> &BTreeMap<String, EntityType> {
        &self.dictionary_terms
    }

    pub fn register(&mut self, recognizer: Box<dyn Recognizer>) -> Result<(), RecognizerError> {
        if recognizer.id() == DICTIONARY_ID || self.ids().contains(&recognizer.id()) {
            return Err(RecognizerError::DuplicateId(recognizer.id().to_owned()));
        }
        self.recognizers.push(recognizer);
        Ok(())
    }

    /// Adds verbatim terms, matched whole-word and case-sensitively.
    pub fn register_dictionary<I>(mut self, terms: I) -> Result<Self, RecognizerError>
    where
        I: IntoIterator<Item = (String, EntityType)>,
    {
        for (term, entity_type) in terms {
            if term.is_empty() {
                return Err(RecognizerError::EmptyTerm);
            }
            self.dictionary_terms.insert(term, entity_type);
        }
        Ok(self)
    }

    /// Built-ins plus the policy's credential keywords, custom patterns and
    /// dictionary.
    pub fn from_policy(policy: &PolicyConfig) -> Result<Self, RecognizerError> {
        let mut registry = Self::empty();
        for r in builtin::all(&policy.credential_keywords) {
            registry.register(r)?;
        }
        for (i, custom) in policy.custom_patterns.iter().enumerate() {
            let id = format!("custom:{}#{i}", custom.entity_type);
            let r = RegexRecognizer::new(
                &id,
                custom.entity_type.clone(),
                &custom.pattern,
                builtin::PRIORITY_CUSTOM,
            )?;
            registry.register(Box::new(r))?;
        }
        registry.register_dictionary(
            policy
                .dictionary_terms
                .iter()
                .map(|t| (t.term.clone(), t.entity_type.clone())),
        )
    }

    fn recognize_dictionary(&self, text: &str) -> Vec<Detection> {
        let mut out = Vec::new();
        for (term, entity_type) in &self.dictionary_terms {
            for (start, _) in text.match_indices(term.as_str()) {
                let end = start + term.len();
                let before_ok = !text[..start].chars().next_back().is_some_and(builtin::is_word_char);
                let after_ok = !text[end..].chars().next().is_some_and(builtin::is_word_char);
                if before_ok && after_ok {
                    out.push(
                        Detection::exact(text, start, end, entity_type.clone(), DICTIONARY_ID)
                            .with_priority(builtin::PRIORITY_DICTIONARY),
                    );
                }
            }
        }
        out
    }
}

/// Registry with every built-in recognizer and no dictionary.
pub fn builtin_registry() -> RecognizerRegistry {
    let keywords: Vec<String> = DEFAULT_CREDENTIAL_KEYWORDS.iter().map(|s| (*s).to_owned()).collect();
    let mut registry = RecognizerRegistry::empty();
    for r in builtin::all(&keywords) {
        registry.register(r).expect("builtin ids are unique");
    }
    registry
}

/// Candidate detections before allow-listing and overlap resolution.
pub fn raw_detections(
    text: &str,
    registry: &RecognizerRegistry,
) -> Result<Vec<Detection>, RecognizerError> {
    let mut all = Vec::new();
    for r in &registry.recognizers {
        all.extend(r.recognize(text)?);
    }
    all.extend(registry.recognize_dictionary(text));
    Ok(all)
}

pub fn recognize_all(
    text: &str,
    registry: &RecognizerRegistry,
    policy: &PolicyConfig,
) -> Result<Vec<Detection>, RecognizerError> {
    let allow: HashSet<&str> = policy.allow_list.iter().map(String::as_str).collect();
    // Allow-listed matches take part in overlap resolution so that whatever
    // they cover stays verbatim, then they are dropped.
    let mut resolved: Vec<Detection> = resolve_overlaps(raw_detections(text, registry)?)
        .into_iter()
        .filter(|d| !allow.contains(d.text.as_str()))
        .collect();
    for d in &mut resolved {
        d.preserved = policy.is_preserved(&d.entity_type);
    }
    Ok(resolved)
}

/// Greedy disjoint selection: longer span first, then higher priority, then
/// smaller start. Output is sorted by start.
pub fn resolve_overlaps(mut detections: Vec<Detection>) -> Vec<Detection> {
    detections.sort_by(|a, b| {
        b.span
            .len()
            .cmp(&a.span.len())
            .then(b.priority.cmp(&a.priority))
            .then(a.span.start.cmp(&b.span.start))
    });
    // start -> end of accepted spans; they are disjoint, so the only candidate
    // overlap is the accepted span with the greatest start below `end`.
    let mut taken: BTreeMap<usize, usize> = BTreeMap::new();
    let mut kept = Vec::new();
    for d in detections {
        let clash = taken
            .range(..d.span.end)
            .next_back()
            .is_some_and(|(_, &end)| end > d.span.start);
        if !clash {
            taken.insert(d.span.start, d.span.end);
            kept.push(d);
        }
    }
    kept.sort_by_key(|d| (d.span.start, d.span.end));
    kept
}

fn run_static(
    slot: &'static OnceLock<RegexRecognizer>,
    make: fn() -> RegexRecognizer,
    text: &str,
) -> Vec<Detection> {
    builtin::cached(slot, make)
        .recognize(text)
        .expect("regex recognizers do not fail")
}

pub fn recognize_hash(text: &str) -> Vec<Detection> {
    static SLOT: OnceLock<RegexRecognizer> = OnceLock::new();
    run_static(&SLOT, builtin::hash, text)
}

pub fn recognize_cert_serial(text: &str) -> Vec<Detection> {
    static SLOT: OnceLock<RegexRecognizer> = OnceLock::new();
    run_static(&SLOT, builtin::cert_serial, text)
}

pub fn recognize_cert_body(text: &str) -> Vec<Detection> {
    static SLOT: OnceLock<RegexRecognizer> = OnceLock::new();
    run_static(&SLOT, builtin::cert_body, text)
}

/// Entity types a registry can emit.
pub fn emitted_types(registry: &RecognizerRegistry) -> BTreeSet<EntityType> {
    registry
        .recognizers()
        .map(|r| r.entity_type().clone())
        .chain(registry.dictionary_terms.values().cloned())
        .collect()
}

#[cfg(test)]
mod tests;
