//! Shared domain types and token normalization.

use std::collections::BTreeSet;
use std::fmt;

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("token is empty after normalization: {0:?}")]
    EmptyToken(String),
    #[error("token is not in normalized form: {0:?}")]
    NotNormalized(String),
    #[error("{field}: {reason}")]
    InvalidField { field: String, reason: String },
}

/// Lowercases, trims and collapses internal whitespace runs into a single
/// hyphen. Returns `None` when nothing is left.
pub fn normalize_token(raw: &str) -> Option<String> {
    let joined = raw
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join("-");
    if joined.is_empty() {
        None
    } else {
        Some(joined)
    }
}

/// A normalized vocabulary term. Construction always goes through
/// [`normalize_token`], so two tokens compare equal exactly when their raw
/// forms differ only in case and whitespace.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Token(String);

impl Token {
    pub fn new(raw: &str) -> Result<Self, ModelError> {
        normalize_token(raw)
            .map(Token)
            .ok_or_else(|| ModelError::EmptyToken(raw.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Token {
    type Error = ModelError;

    /// Accepts only strings already in normalized form; stored data must be
    /// canonical so that re-serialization is byte-stable.
    fn try_from(value: String) -> Result<Self, Self::Error> {
        match normalize_token(&value) {
            Some(n) if n == value => Ok(Token(value)),
            Some(_) => Err(ModelError::NotNormalized(value)),
            None => Err(ModelError::EmptyToken(value)),
        }
    }
}

impl From<Token> for String {
    fn from(t: Token) -> Self {
        t.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

pub type TokenSet = BTreeSet<Token>;

/// Normalizes every raw term into a set, reporting the first empty entry
/// as an error against `field`.
pub fn token_set<S: AsRef<str>>(field: &str, raw: &[S]) -> Result<TokenSet, ModelError> {
    raw.iter()
        .enumerate()
        .map(|(i, r)| {
            Token::new(r.as_ref()).map_err(|_| ModelError::InvalidField {
                field: format!("{field}[{i}]"),
                reason: "empty token".into(),
            })
        })
        .collect()
}

macro_rules! string_id {
    ($(#[$m:meta])* $name:ident) => {
        $(#[$m])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_string())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                $name(s)
            }
        }
    };
}

string_id!(
    /// Opaque faculty identifier.
    FacultyId
);
string_id!(
    /// Opaque catalog item identifier.
    StpId
);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacultyProfile {
    pub faculty_id: FacultyId,
    pub name: String,
    pub college: Token,
    pub programs: TokenSet,
    pub interests: TokenSet,
    pub expertise: TokenSet,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

/// Raw, unnormalized profile fields as entered by a user.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileInput {
    pub name: String,
    pub college: String,
    #[serde(default)]
    pub programs: Vec<String>,
    #[serde(default)]
    pub interests: Vec<String>,
    #[serde(default)]
    pub expertise: Vec<String>,
}

impl ProfileInput {
    /// Normalizes the input into a profile, collecting every field error.
    pub fn into_profile(
        self,
        faculty_id: FacultyId,
        created_at: DateTime<Utc>,
        updated_at: DateTime<Utc>,
    ) -> Result<FacultyProfile, Vec<ModelError>> {
        let mut errors = Vec::new();
        let name = self.name.trim().to_string();
        if name.is_empty() {
            errors.push(ModelError::InvalidField {
                field: "name".into(),
                reason: "must not be empty".into(),
            });
        }
        if faculty_id.0.trim().is_empty() {
            errors.push(ModelError::InvalidField {
                field: "faculty_id".into(),
                reason: "must not be empty".into(),
            });
        }
        let college = Token::new(&self.college).map_err(|_| ModelError::InvalidField {
            field: "college".into(),
            reason: "must not be empty".into(),
        });
        let mut set = |field: &str, raw: &[String]| match token_set(field, raw) {
            Ok(s) => s,
            Err(e) => {
                errors.push(e);
                TokenSet::new()
            }
        };
        let programs = set("programs", &self.programs);
        let interests = set("interests", &self.interests);
        let expertise = set("expertise", &self.expertise);
        match college {
            Ok(college) if errors.is_empty() => Ok(FacultyProfile {
                faculty_id,
                name,
                college,
                programs,
                interests,
                expertise,
                created_at,
                updated_at,
            }),
            Ok(_) => Err(errors),
            Err(e) => {
                errors.insert(0, e);
                Err(errors)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StpItem {
    pub stp_id: StpId,
    pub title: String,
    pub provider: String,
    pub start_date: NaiveDate,
    pub end_date: Option<NaiveDate>,
    pub url: Option<String>,
    pub description: Option<String>,
    pub tags: TokenSet,
    pub source: String,
    pub ingested_at: DateTime<Utc>,
}

impl StpItem {
    pub fn dedup_key(&self) -> DedupKey {
        DedupKey::new(&self.title, self.start_date)
    }
}

/// Catalog identity of an item: case- and whitespace-insensitive title plus
/// start date.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DedupKey {
    pub title: String,
    pub start_date: NaiveDate,
}

impl DedupKey {
    pub fn new(title: &str, start_date: NaiveDate) -> Self {
        let title = title
            .split_whitespace()
            .map(str::to_lowercase)
            .collect::<Vec<_>>()
            .join(" ");
        DedupKey { title, start_date }
    }

    /// Stable identifier derived from the key: the first 16 hex digits of
    /// SHA-256 over `title '\n' YYYY-MM-DD`.
    pub fn stp_id(&self) -> StpId {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        hasher.update(self.title.as_bytes());
        hasher.update(b"\n");
        hasher.update(self.start_date.format("%Y-%m-%d").to_string().as_bytes());
        let digest = hasher.finalize();
        let hex: String = digest[..8].iter().map(|b| format!("{b:02x}")).collect();
        StpId(hex)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LikeEvent {
    pub faculty_id: FacultyId,
    pub stp_id: StpId,
    pub liked_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AttendanceRecord {
    pub faculty_id: FacultyId,
    pub stp_id: StpId,
    pub date_attended: NaiveDate,
    pub remarks: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub faculty_id: FacultyId,
    pub similarity: f64,
}

/// A scored feed entry with the evidence behind its score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub stp_id: StpId,
    pub score: f64,
    pub content_component: f64,
    pub collab_component: f64,
    pub matched_terms: Vec<Token>,
    pub contributing_neighbors: Vec<Neighbor>,
}
