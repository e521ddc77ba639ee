//! Run-time pseudonymization policy and the per-run context that carries the
//! secret key.

use std::collections::BTreeSet;
use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::domain::EntityType;
use crate::error::{ContextError, PolicyError, PolicyErrors};

pub const DEFAULT_SLUG_LENGTH: usize = 64;
pub const MAX_SLUG_LENGTH: usize = 64;
pub const SECRET_KEY_ENV: &str = "SECRET_KEY";

/// Context words that introduce a credential value (`password=...`).
pub const DEFAULT_CREDENTIAL_KEYWORDS: [&str; 6] =
    ["password", "passwd", "pwd", "secret", "token", "apikey"];

/// Operator-declared regex recognizer for a `CUSTOM:` category.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CustomPattern {
    pub entity_type: EntityType,
    pub pattern: String,
}

/// Operator-declared verbatim term, matched whole-word and case-sensitively.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictionaryTerm {
    pub term: String,
    pub entity_type: EntityType,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub slug_length: usize,
    pub allow_list: Vec<String>,
    pub preserve_entities: BTreeSet<EntityType>,
    /// Carried for interface parity; no recognizer consults it.
    pub lang: String,
    pub custom_patterns: Vec<CustomPattern>,
    pub dictionary_terms: Vec<DictionaryTerm>,
    pub credential_keywords: Vec<String>,
    pub scan_json_keys: bool,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            slug_length: DEFAULT_SLUG_LENGTH,
            allow_list: Vec::new(),
            preserve_entities: BTreeSet::new(),
            lang: "en".to_owned(),
            custom_patterns: Vec::new(),
            dictionary_terms: Vec::new(),
            credential_keywords: DEFAULT_CREDENTIAL_KEYWORDS
                .iter()
                .map(|s| (*s).to_owned())
                .collect(),
            scan_json_keys: false,
        }
    }
}

impl PolicyConfig {
    pub fn is_preserved(&self, entity_type: &EntityType) -> bool {
        self.preserve_entities.contains(entity_type)
    }

    /// Custom categories this policy introduces, through patterns or terms.
    pub fn declared_custom_types(&self) -> BTreeSet<EntityType> {
        self.custom_patterns
            .iter()
            .map(|p| &p.entity_type)
            .chain(self.dictionary_terms.iter().map(|t| &t.entity_type))
            .filter(|t| t.is_custom())
            .cloned()
            .collect()
    }
}

/// Checks every policy invariant and reports all violations at once.
pub fn validate_policy(policy: PolicyConfig) -> Result<PolicyConfig, PolicyErrors> {
    let mut errors = Vec::new();

    if !(1..=MAX_SLUG_LENGTH).contains(&policy.slug_length) {
        errors.push(PolicyError::SlugLengthOutOfRange(policy.slug_length));
    }
    for (i, entry) in policy.allow_list.iter().enumerate() {
        if entry.is_empty() {
            errors.push(PolicyError::EmptyAllowListEntry(i));
        }
    }
    let declared = policy.declared_custom_types();
    for preserved in &policy.preserve_entities {
        if preserved.is_custom() && !declared.contains(preserved) {
            errors.push(PolicyError::UnknownPreservedEntity(preserved.clone()));
        }
    }
    for custom in &policy.custom_patterns {
        let label = custom.entity_type.name();
        if !custom.entity_type.is_custom() {
            errors.push(PolicyError::MalformedCustomPattern {
                label,
                reason: "custom patterns must use a CUSTOM:<LABEL> type".to_owned(),
            });
        } else if custom.pattern.is_empty() {
            errors.push(PolicyError::MalformedCustomPattern {
                label,
                reason: "pattern is empty".to_owned(),
            });
        } else if let Err(e) = regex::Regex::new(&custom.pattern) {
            errors.push(PolicyError::MalformedCustomPattern {
                label,
                reason: e.to_string(),
            });
        }
    }

    if errors.is_empty() {
        Ok(policy)
    } else {
        Err(PolicyErrors(errors))
    }
}

/// HMAC key material. Never printed.
#[derive(Clone, PartialEq, Eq)]
pub struct SecretKey(Vec<u8>);

impl SecretKey {
    pub fn new(bytes: impl Into<Vec<u8>>) -> Result<Self, ContextError> {
        let bytes = bytes.into();
        if bytes.is_empty() {
            return Err(ContextError::MissingSecretKey);
        }
        Ok(Self(bytes))
    }

    pub fn from_env() -> Result<Self, ContextError> {
        match std::env::var_os(SECRET_KEY_ENV) {
            Some(v) => Self::new(v.into_encoded_bytes()),
            None => Err(ContextError::MissingSecretKey),
        }
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for SecretKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SecretKey([REDACTED])")
    }
}

#[derive(Debug, Clone)]
pub struct RunContext {
    pub secret_key: SecretKey,
    pub policy: PolicyConfig,
    pub vault_path: PathBuf,
    pub audit_actor: String,
}

impl RunContext {
    pub fn new(
        secret_key: SecretKey,
        policy: PolicyConfig,
        vault_path: impl Into<PathBuf>,
        audit_actor: impl Into<String>,
    ) -> Self {
        Self {
            secret_key,
            policy,
            vault_path: vault_path.into(),
            audit_actor: audit_actor.into(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_policy_is_valid() {
        let p = PolicyConfig::default();
        assert_eq!(validate_policy(p.clone()).unwrap(), p);
    }

    #[test]
    fn slug_length_bounds() {
        for (len, ok) in [(0, false), (1, true), (64, true), (65, false)] {
            let p = PolicyConfig {
                slug_length: len,
                ..Default::default()
            };
            assert_eq!(validate_policy(p).is_ok(), ok, "len {len}");
        }
        let err = validate_policy(PolicyConfig {
            slug_length: 0,
            ..Default::default()
        })
        .unwrap_err();
        assert_eq!(err.0, vec![PolicyError::SlugLengthOutOfRange(0)]);
    }

    #[test]
    fn preserving_cpe_is_valid() {
        let p = PolicyConfig {
            preserve_entities: [EntityType::CpeString].into(),
            ..Default::default()
        };
        assert!(validate_policy(p).is_ok());
    }

    #[test]
    fn reports_every_violation() {
        let p = PolicyConfig {
            slug_length: 99,
            allow_list: vec!["Greenbone".into(), String::new()],
            preserve_entities: [EntityType::custom("PRODUCT").unwrap()].into(),
            custom_patterns: vec![
                CustomPattern {
                    entity_type: EntityType::Hash,
                    pattern: "x".into(),
                },
                CustomPattern {
                    entity_type: EntityType::custom("TICKET").unwrap(),
                    pattern: "(".into(),
                },
            ],
            ..Default::default()
        };
        let errs = validate_policy(p).unwrap_err().0;
        assert_eq!(errs.len(), 5, "{errs:?}");
        assert!(errs.contains(&PolicyError::SlugLengthOutOfRange(99)));
        assert!(errs.contains(&PolicyError::EmptyAllowListEntry(1)));
        assert!(errs.contains(&PolicyError::UnknownPreservedEntity(
            EntityType::custom("PRODUCT").unwrap()
        )));
    }

    #[test]
    fn dictionary_declares_custom_labels() {
        let product = EntityType::custom("PRODUCT").unwrap();
        let p = PolicyConfig {
            preserve_entities: [product.clone()].into(),
            dictionary_terms: vec![DictionaryTerm {
                term: "Redis".into(),
                entity_type: product,
            }],
            ..Default::default()
        };
        assert!(validate_policy(p).is_ok());
    }

    #[test]
    fn validation_is_idempotent() {
        let p = PolicyConfig {
            slug_length: 10,
            allow_list: vec!["App".into(), "OS".into()],
            preserve_entities: [EntityType::CpeString].into(),
            ..Default::default()
        };
        let once = validate_policy(p).unwrap();
        let twice = validate_policy(once.clone()).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn secret_key_is_redacted_and_non_empty() {
        assert!(SecretKey::new(Vec::<u8>::new()).is_err());
        let k = SecretKey::new("hunter2").unwrap();
        assert!(!format!("{k:?}").contains("hunter2"));
    }
}
