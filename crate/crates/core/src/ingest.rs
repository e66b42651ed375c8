//! Feed parsing, vocabulary auto-tagging and deduplicating catalog ingest.

use std::collections::{BTreeMap, HashSet};
use std::str::FromStr;

use chrono::{DateTime, NaiveDate, Utc};
use regex::Regex;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use crate::model::{normalize_token, DedupKey, StpItem, Token, TokenSet};
use crate::store::{Store, StoreError};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("feed is not valid UTF-8")]
    NotUtf8,
    #[error("feed is not a JSON array: {0}")]
    NotArray(String),
    #[error("vocabulary: {0}")]
    Vocabulary(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeedFormat {
    JsonArray,
    JsonLines,
}

impl FeedFormat {
    /// A body whose first non-blank byte is `[` is an array, anything else
    /// is treated as JSON lines.
    pub fn detect(bytes: &[u8]) -> FeedFormat {
        match bytes.iter().find(|b| !b.is_ascii_whitespace()) {
            Some(b'[') | None => FeedFormat::JsonArray,
            Some(_) => FeedFormat::JsonLines,
        }
    }
}

impl FromStr for FeedFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" | "json-array" => Ok(FeedFormat::JsonArray),
            "jsonl" | "json-lines" | "ndjson" => Ok(FeedFormat::JsonLines),
            other => Err(format!("unknown feed format {other:?} (expected json or jsonl)")),
        }
    }
}

/// One listing as published by a feed, before normalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedRecord {
    pub title: String,
    pub provider: String,
    pub start_date: NaiveDate,
    pub end_date: Option<NaiveDate>,
    pub url: Option<String>,
    pub description: Option<String>,
    pub explicit_tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub index: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub added: usize,
    pub duplicates_skipped: usize,
    pub rejected: Vec<Rejection>,
}

fn required_str(obj: &Map<String, Value>, field: &str) -> Result<String, String> {
    match obj.get(field) {
        None | Some(Value::Null) => Err(format!("missing required field: {field}")),
        Some(Value::String(s)) if s.trim().is_empty() => {
            Err(format!("missing required field: {field}"))
        }
        Some(Value::String(s)) => Ok(s.trim().to_string()),
        Some(_) => Err(format!("field {field} must be a string")),
    }
}

fn optional_str(obj: &Map<String, Value>, field: &str) -> Result<Option<String>, String> {
    match obj.get(field) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) if s.trim().is_empty() => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.trim().to_string())),
        Some(_) => Err(format!("field {field} must be a string")),
    }
}

fn date(field: &str, raw: &str) -> Result<NaiveDate, String> {
    NaiveDate::parse_from_str(raw, "%Y-%m-%d")
        .map_err(|_| format!("invalid date in field {field}: {raw:?}"))
}

fn record_from_value(value: &Value) -> Result<FeedRecord, String> {
    let obj = value
        .as_object()
        .ok_or_else(|| "record is not a JSON object".to_string())?;
    let title = required_str(obj, "title")?;
    let provider = required_str(obj, "provider")?;
    let start_date = date("start_date", &required_str(obj, "start_date")?)?;
    let end_date = optional_str(obj, "end_date")?
        .map(|d| date("end_date", &d))
        .transpose()?;
    if let Some(end) = end_date {
        if end < start_date {
            return Err("end_date precedes start_date".into());
        }
    }
    let explicit_tags = match obj.get("explicit_tags") {
        None | Some(Value::Null) => Vec::new(),
        Some(Value::Array(tags)) => tags
            .iter()
            .map(|t| match t.as_str() {
                Some(s) if normalize_token(s).is_some() => Ok(s.to_string()),
                Some(_) => Err("empty tag in explicit_tags".to_string()),
                None => Err("explicit_tags must contain only strings".to_string()),
            })
            .collect::<Result<_, _>>()?,
        Some(_) => return Err("explicit_tags must be an array of strings".into()),
    };
    Ok(FeedRecord {
        title,
        provider,
        start_date,
        end_date,
        url: optional_str(obj, "url")?,
        description: optional_str(obj, "description")?,
        explicit_tags,
    })
}

/// Well-formed records in feed order, plus a rejection for each malformed
/// one. Only an undecodable body or (for arrays) a broken top level fails
/// the whole feed.
pub fn parse_feed(
    bytes: &[u8],
    format: FeedFormat,
) -> Result<(Vec<FeedRecord>, Vec<Rejection>), IngestError> {
    let text = std::str::from_utf8(bytes).map_err(|_| IngestError::NotUtf8)?;
    let values: Vec<Result<Value, String>> = match format {
        FeedFormat::JsonArray => {
            let top: Value =
                serde_json::from_str(text).map_err(|e| IngestError::NotArray(e.to_string()))?;
            match top {
                Value::Array(v) => v.into_iter().map(Ok).collect(),
                other => {
                    return Err(IngestError::NotArray(format!(
                        "top-level value is {}",
                        kind(&other)
                    )))
                }
            }
        }
        FeedFormat::JsonLines => text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| format!("invalid JSON: {e}")))
            .collect(),
    };
    let mut records = Vec::new();
    let mut rejected = Vec::new();
    for (index, value) in values.into_iter().enumerate() {
        match value.and_then(|v| record_from_value(&v)) {
            Ok(r) => records.push(r),
            Err(reason) => rejected.push(Rejection { index, reason }),
        }
    }
    Ok((records, rejected))
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "a boolean",
        Value::Number(_) => "a number",
        Value::String(_) => "a string",
        Value::Array(_) => "an array",
        Value::Object(_) => "an object",
    }
}

/// Controlled vocabulary: tag token to the phrases that trigger it.
#[derive(Debug, Clone, Default)]
pub struct TagVocabulary {
    entries: Vec<(Token, Vec<String>, Regex)>,
}

impl TagVocabulary {
    pub fn new(map: BTreeMap<String, Vec<String>>) -> Result<Self, IngestError> {
        let mut seen = HashSet::new();
        let mut entries = Vec::new();
        for (raw, phrases) in map {
            let tag = Token::new(&raw)
                .map_err(|_| IngestError::Vocabulary(format!("empty tag {raw:?}")))?;
            if !seen.insert(tag.clone()) {
                return Err(IngestError::Vocabulary(format!(
                    "tag {raw:?} duplicates {tag} after normalization"
                )));
            }
            if phrases.is_empty() {
                return Err(IngestError::Vocabulary(format!("tag {tag} has no trigger phrases")));
            }
            let mut alts = Vec::new();
            for p in &phrases {
                let words: Vec<String> = p.split_whitespace().map(regex::escape).collect();
                if words.is_empty() {
                    return Err(IngestError::Vocabulary(format!(
                        "tag {tag} has an empty trigger phrase"
                    )));
                }
                alts.push(words.join(r"\s+"));
            }
            let re = Regex::new(&format!(r"(?i)\b(?:{})\b", alts.join("|")))
                .map_err(|e| IngestError::Vocabulary(e.to_string()))?;
            entries.push((tag, phrases, re));
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(TagVocabulary { entries })
    }

    /// Parses the vocabulary file format: a JSON object mapping each tag to
    /// an array of trigger phrases.
    pub fn from_json(bytes: &[u8]) -> Result<Self, IngestError> {
        let map: BTreeMap<String, Vec<String>> =
            serde_json::from_slice(bytes).map_err(|e| IngestError::Vocabulary(e.to_string()))?;
        Self::new(map)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn tags_in<'a>(&'a self, text: &'a str) -> impl Iterator<Item = &'a Token> + 'a {
        self.entries
            .iter()
            .filter(move |(_, _, re)| re.is_match(text))
            .map(|(t, _, _)| t)
    }

    pub fn phrases(&self, tag: &Token) -> Option<&[String]> {
        self.entries
            .iter()
            .find(|(t, _, _)| t == tag)
            .map(|(_, p, _)| p.as_slice())
    }
}

/// Explicit tags plus every vocabulary tag triggered in the title or
/// description (case-insensitive, whole words).
pub fn auto_tag(record: &FeedRecord, vocab: &TagVocabulary) -> TokenSet {
    let mut tags: TokenSet = record
        .explicit_tags
        .iter()
        .filter_map(|t| Token::new(t).ok())
        .collect();
    let mut text = record.title.clone();
    if let Some(d) = &record.description {
        text.push('\n');
        text.push_str(d);
    }
    tags.extend(vocab.tags_in(&text).cloned());
    tags
}

pub fn to_item(record: &FeedRecord, vocab: &TagVocabulary, source: &str, now: DateTime<Utc>) -> StpItem {
    StpItem {
        stp_id: DedupKey::new(&record.title, record.start_date).stp_id(),
        title: record.title.clone(),
        provider: record.provider.clone(),
        start_date: record.start_date,
        end_date: record.end_date,
        url: record.url.clone(),
        description: record.description.clone(),
        tags: auto_tag(record, vocab),
        source: source.to_string(),
        ingested_at: now,
    }
}

/// Adds every record whose dedup key is new to the catalog. Existing
/// items are never modified. The whole batch commits or nothing does.
pub fn ingest(
    feed: &[FeedRecord],
    vocab: &TagVocabulary,
    store: &mut Store,
    source: &str,
    now: DateTime<Utc>,
) -> Result<IngestReport, IngestError> {
    let mut known: HashSet<DedupKey> = store.list_items().iter().map(StpItem::dedup_key).collect();
    let mut fresh = Vec::new();
    let mut report = IngestReport::default();
    for record in feed {
        let item = to_item(record, vocab, source, now);
        if known.insert(item.dedup_key()) {
            fresh.push(item);
            report.added += 1;
        } else {
            report.duplicates_skipped += 1;
        }
    }
    if !fresh.is_empty() {
        store.mutate(|s| {
            s.items.extend(fresh);
            Ok(())
        })?;
    }
    Ok(report)
}

/// Parses and ingests a feed body; the report accounts for every record in
/// it, including rejected ones.
pub fn ingest_feed(
    bytes: &[u8],
    format: FeedFormat,
    vocab: &TagVocabulary,
    store: &mut Store,
    source: &str,
    now: DateTime<Utc>,
) -> Result<IngestReport, IngestError> {
    let (records, rejected) = parse_feed(bytes, format)?;
    let mut report = ingest(&records, vocab, store, source, now)?;
    report.rejected = rejected;
    Ok(report)
}
