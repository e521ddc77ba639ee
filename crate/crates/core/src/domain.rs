//! Entity categories, byte spans and detections shared by every stage of the
//! pipeline.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::DomainError;

/// Category of a recognized identifier.
///
/// The built-in set is closed; operators extend it with `CUSTOM:<LABEL>`
/// categories, which flow through tokens and the vault exactly like the
/// built-ins.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum EntityType {
    IpAddress,
    Email,
    Url,
    Hostname,
    Hash,
    CertSerial,
    CertBody,
    CpeString,
    Credential,
    Custom(CustomLabel),
}

/// Label of a `CUSTOM:` entity type: non-empty `[A-Z0-9_]+`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CustomLabel(String);

impl CustomLabel {
    pub fn new(label: &str) -> Result<Self, DomainError> {
        if is_type_charset(label) {
            Ok(Self(label.to_owned()))
        } else {
            Err(DomainError::InvalidEntityType(format!("CUSTOM:{label}")))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

fn is_type_charset(s: &str) -> bool {
    !s.is_empty()
        && s
            .bytes()
            .all(|b| b.is_ascii_uppercase() || b.is_ascii_digit() || b == b'_')
}

impl EntityType {
    /// Every built-in category, in declaration order.
    pub const BUILTIN: [EntityType; 9] = [
        EntityType::IpAddress,
        EntityType::Email,
        EntityType::Url,
        EntityType::Hostname,
        EntityType::Hash,
        EntityType::CertSerial,
        EntityType::CertBody,
        EntityType::CpeString,
        EntityType::Credential,
    ];

    pub fn custom(label: &str) -> Result<Self, DomainError> {
        CustomLabel::new(label).map(EntityType::Custom)
    }

    pub fn name(&self) -> String {
        match self {
            EntityType::Custom(label) => format!("CUSTOM:{}", label.0),
            builtin => builtin.builtin_name().to_owned(),
        }
    }

    fn builtin_name(&self) -> &'static str {
        match self {
            EntityType::IpAddress => "IP_ADDRESS",
            EntityType::Email => "EMAIL",
            EntityType::Url => "URL",
            EntityType::Hostname => "HOSTNAME",
            EntityType::Hash => "HASH",
            EntityType::CertSerial => "CERT_SERIAL",
            EntityType::CertBody => "CERT_BODY",
            EntityType::CpeString => "CPE_STRING",
            EntityType::Credential => "CREDENTIAL",
            EntityType::Custom(_) => "CUSTOM",
        }
    }

    pub fn is_custom(&self) -> bool {
        matches!(self, EntityType::Custom(_))
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EntityType::Custom(label) => write!(f, "CUSTOM:{}", label.0),
            builtin => f.write_str(builtin.builtin_name()),
        }
    }
}

impl FromStr for EntityType {
    type Err = DomainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Some(label) = s.strip_prefix("CUSTOM:") {
            return EntityType::custom(label);
        }
        EntityType::BUILTIN
            .iter()
            .find(|t| t.builtin_name() == s)
            .cloned()
            .ok_or_else(|| DomainError::InvalidEntityType(s.to_owned()))
    }
}

impl TryFrom<String> for EntityType {
    type Error = DomainError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<EntityType> for String {
    fn from(value: EntityType) -> Self {
        value.name()
    }
}

/// Half-open byte range `[start, end)` into UTF-8 text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Result<Self, DomainError> {
        if start < end {
            Ok(Self { start, end })
        } else {
            Err(DomainError::InvalidSpan { start, end })
        }
    }

    /// Builds a span and checks it lands on character boundaries of `text`.
    pub fn within(text: &str, start: usize, end: usize) -> Result<Self, DomainError> {
        let span = Self::new(start, end)?;
        if end > text.len() || !text.is_char_boundary(start) || !text.is_char_boundary(end) {
            return Err(DomainError::InvalidSpan { start, end });
        }
        Ok(span)
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// One located entity occurrence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub entity_type: EntityType,
    pub span: Span,
    pub text: String,
    pub recognizer_id: String,
    pub score: f64,
    /// Detected but left verbatim because its type is in `preserve_entities`.
    #[serde(default)]
    pub preserved: bool,
    /// Tie-break weight of the emitting recognizer during overlap resolution.
    #[serde(skip)]
    pub priority: i32,
}

impl Detection {
    /// Regex-style detection (score 1.0) over `source[start..end]`.
    pub fn exact(
        source: &str,
        start: usize,
        end: usize,
        entity_type: EntityType,
        recognizer_id: &str,
    ) -> Self {
        Self {
            entity_type,
            span: Span { start, end },
            text: source[start..end].to_owned(),
            recognizer_id: recognizer_id.to_owned(),
            score: 1.0,
            preserved: false,
            priority: 0,
        }
    }

    pub fn with_priority(mut self, priority: i32) -> Self {
        self.priority = priority;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip_through_parse() {
        for t in EntityType::BUILTIN {
            assert_eq!(t.name().parse::<EntityType>().unwrap(), t);
        }
        let custom: EntityType = "CUSTOM:TICKET".parse().unwrap();
        assert_eq!(custom.name(), "CUSTOM:TICKET");
    }

    #[test]
    fn rejects_bad_names() {
        for bad in ["", "ip_address", "CUSTOM:", "CUSTOM:lower", "CUSTOM:A-B", "PERSON"] {
            assert!(bad.parse::<EntityType>().is_err(), "{bad:?}");
        }
    }

    #[test]
    fn custom_never_equals_builtin() {
        let custom = EntityType::custom("HASH").unwrap();
        assert_ne!(custom, EntityType::Hash);
        assert_eq!(custom.name(), "CUSTOM:HASH");
    }

    #[test]
    fn span_boundaries() {
        assert!(Span::new(3, 3).is_err());
        assert!(Span::new(4, 3).is_err());
        let s = "aé";
        assert!(Span::within(s, 0, 2).is_err());
        assert!(Span::within(s, 1, 3).is_ok());
        assert!(Span::within(s, 1, 4).is_err());
    }

    #[test]
    fn serde_uses_names() {
        let json = serde_json::to_string(&EntityType::CpeString).unwrap();
        assert_eq!(json, "\"CPE_STRING\"");
        let back: EntityType = serde_json::from_str("\"CUSTOM:PERSON\"").unwrap();
        assert_eq!(back, EntityType::custom("PERSON").unwrap());
        assert!(serde_json::from_str::<EntityType>("\"nope\"").is_err());
    }
}
