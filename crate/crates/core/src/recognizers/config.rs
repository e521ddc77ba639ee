//! Operator recognizer file: one `TYPE<TAB>value` declaration per line.
//!
//! ```text
//! # comment
//! HOSTNAME	servidor-web-01
//! CUSTOM:PERSON	beatriz.machado
//! CUSTOM:TICKET	re:INC-[0-9]{6}
//! CREDENTIAL	keyword:passphrase
//! ```
//!
//! Values prefixed `re:` are regex patterns (only for `CUSTOM:` types),
//! `keyword:` under `CREDENTIAL` adds a context keyword, anything else is a
//! verbatim dictionary term.
#![allow(clippy::tabs_in_doc_comments)]

use crate::domain::EntityType;
use crate::error::RecognizerError;
use crate::policy::{CustomPattern, DictionaryTerm, PolicyConfig};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RecognizerConfig {
    pub custom_patterns: Vec<CustomPattern>,
    pub dictionary_terms: Vec<DictionaryTerm>,
    pub credential_keywords: Vec<String>,
}

impl RecognizerConfig {
    /// Merges these declarations into `policy`.
    pub fn apply_to(self, policy: &mut PolicyConfig) {
        policy.custom_patterns.extend(self.custom_patterns);
        policy.dictionary_terms.extend(self.dictionary_terms);
        for kw in self.credential_keywords {
            if !policy.credential_keywords.contains(&kw) {
                policy.credential_keywords.push(kw);
            }
        }
    }
}

pub fn parse_recognizer_config(text: &str) -> Result<RecognizerConfig, RecognizerError> {
    let mut config = RecognizerConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let bad = |reason: &str| RecognizerError::ConfigLine {
            line: idx + 1,
            reason: reason.to_owned(),
        };
        let (type_name, value) = line
            .split_once('\t')
            .ok_or_else(|| bad("expected TYPE<TAB>value"))?;
        let entity_type: EntityType = type_name
            .trim()
            .parse()
            .map_err(|e: crate::error::DomainError| bad(&e.to_string()))?;
        if value.is_empty() {
            return Err(bad("empty value"));
        }
        if let Some(pattern) = value.strip_prefix("re:") {
            if !entity_type.is_custom() {
                return Err(bad("regex patterns need a CUSTOM:<LABEL> type"));
            }
            regex::Regex::new(pattern).map_err(|e| bad(&e.to_string()))?;
            config.custom_patterns.push(CustomPattern {
                entity_type,
                pattern: pattern.to_owned(),
            });
        } else if let Some(kw) = value.strip_prefix("keyword:") {
            if entity_type != EntityType::Credential || kw.trim().is_empty() {
                return Err(bad("keyword: declarations need the CREDENTIAL type and a word"));
            }
            config.credential_keywords.push(kw.trim().to_owned());
        } else {
            config.dictionary_terms.push(DictionaryTerm {
                term: value.to_owned(),
                entity_type,
            });
        }
    }
    Ok(config)
}
