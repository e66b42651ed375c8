//! Versioned JSON snapshot of all state, with atomic saves and validated
//! repository mutations.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    AttendanceRecord, FacultyId, FacultyProfile, LikeEvent, ModelError, ProfileInput, StpId,
    StpItem,
};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("cannot parse state file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    UnsupportedVersion(u64),
    #[error("state failed validation: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("unknown faculty: {0}")]
    UnknownFaculty(FacultyId),
    #[error("unknown item: {0}")]
    UnknownItem(StpId),
    #[error("{0} already liked {1}")]
    DuplicateLike(FacultyId, StpId),
    #[error("{0} has not liked {1}")]
    LikeNotFound(FacultyId, StpId),
    #[error("faculty already exists: {0}")]
    DuplicateFaculty(FacultyId),
    #[error("invalid profile: {}", .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidProfile(Vec<ModelError>),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateSnapshot {
    pub schema_version: u32,
    pub faculty: Vec<FacultyProfile>,
    pub items: Vec<StpItem>,
    pub likes: Vec<LikeEvent>,
    pub attendance: Vec<AttendanceRecord>,
}

impl Default for StateSnapshot {
    fn default() -> Self {
        StateSnapshot {
            schema_version: SCHEMA_VERSION,
            faculty: Vec::new(),
            items: Vec::new(),
            likes: Vec::new(),
            attendance: Vec::new(),
        }
    }
}

impl StateSnapshot {
    /// Puts every record list into its canonical order.
    pub fn canonicalize(&mut self) {
        self.faculty.sort_by(|a, b| a.faculty_id.cmp(&b.faculty_id));
        self.items.sort_by(|a, b| a.stp_id.cmp(&b.stp_id));
        self.likes.sort_by(|a, b| {
            (&a.faculty_id, &a.stp_id, a.liked_at).cmp(&(&b.faculty_id, &b.stp_id, b.liked_at))
        });
        self.attendance.sort();
    }

    pub fn canonical(mut self) -> Self {
        self.canonicalize();
        self
    }

    /// Every integrity violation in the snapshot, in a stable order.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            out.push(format!("unsupported schema_version {}", self.schema_version));
        }
        let mut faculty_ids = HashSet::new();
        for f in &self.faculty {
            if f.faculty_id.0.trim().is_empty() {
                out.push("faculty with empty faculty_id".to_string());
            }
            if !faculty_ids.insert(&f.faculty_id) {
                out.push(format!("duplicate faculty_id {}", f.faculty_id));
            }
        }
        let mut item_ids = HashSet::new();
        let mut keys = HashMap::new();
        for item in &self.items {
            if !item_ids.insert(&item.stp_id) {
                out.push(format!("duplicate stp_id {}", item.stp_id));
            }
            if let Some(prev) = keys.insert(item.dedup_key(), &item.stp_id) {
                out.push(format!(
                    "items {} and {} share the dedup key ({:?}, {})",
                    prev, item.stp_id, item.dedup_key().title, item.start_date
                ));
            }
            if let Some(end) = item.end_date {
                if end < item.start_date {
                    out.push(format!("item {} ends before it starts", item.stp_id));
                }
            }
        }
        let mut pairs = HashSet::new();
        for like in &self.likes {
            if !pairs.insert((&like.faculty_id, &like.stp_id)) {
                out.push(format!("duplicate like ({}, {})", like.faculty_id, like.stp_id));
            }
            if !faculty_ids.contains(&like.faculty_id) {
                out.push(format!(
                    "like ({}, {}) references unknown faculty {}",
                    like.faculty_id, like.stp_id, like.faculty_id
                ));
            }
            if !item_ids.contains(&like.stp_id) {
                out.push(format!(
                    "like ({}, {}) references unknown item {}",
                    like.faculty_id, like.stp_id, like.stp_id
                ));
            }
        }
        for rec in &self.attendance {
            if !faculty_ids.contains(&rec.faculty_id) {
                out.push(format!(
                    "attendance ({}, {}) references unknown faculty {}",
                    rec.faculty_id, rec.stp_id, rec.faculty_id
                ));
            }
            if !item_ids.contains(&rec.stp_id) {
                out.push(format!(
                    "attendance ({}, {}) references unknown item {}",
                    rec.faculty_id, rec.stp_id, rec.stp_id
                ));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), StoreError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(StoreError::Invalid(v))
        }
    }

    /// Canonical bytes: records in canonical order, struct field order,
    /// pretty-printed, trailing newline.
    pub fn to_canonical_bytes(&self) -> Vec<u8> {
        let canonical = self.clone().canonical();
        let mut bytes = serde_json::to_vec_pretty(&canonical).expect("snapshot serializes");
        bytes.push(b'\n');
        bytes
    }

    pub fn faculty(&self, id: &FacultyId) -> Option<&FacultyProfile> {
        self.faculty.iter().find(|f| &f.faculty_id == id)
    }

    pub fn item(&self, id: &StpId) -> Option<&StpItem> {
        self.items.iter().find(|i| &i.stp_id == id)
    }
}

/// Parses and validates snapshot bytes.
pub fn parse_state(bytes: &[u8]) -> Result<StateSnapshot, StoreError> {
    let value: serde_json::Value = serde_json::from_slice(bytes)?;
    match value.get("schema_version").and_then(|v| v.as_u64()) {
        Some(v) if v == SCHEMA_VERSION as u64 => {}
        Some(v) => return Err(StoreError::UnsupportedVersion(v)),
        None => {
            return Err(StoreError::Invalid(vec![
                "missing or non-integer schema_version".into(),
            ]))
        }
    }
    let state: StateSnapshot = serde_json::from_value(value)?;
    state.validate()?;
    Ok(state)
}

/// Loads a snapshot; `Ok(None)` means there is no file yet and the caller
/// should start from an empty state.
pub fn load_state(path: &Path) -> Result<Option<StateSnapshot>, StoreError> {
    match fs::read(path) {
        Ok(bytes) => parse_state(&bytes).map(Some),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(io_err(path)(e)),
    }
}

pub fn save_state(state: &StateSnapshot, path: &Path) -> Result<(), StoreError> {
    write_atomic_with(path, &state.to_canonical_bytes(), |_| Ok(()))
}

/// Writes `bytes` to a temporary file beside `path`, syncs it, runs
/// `before_commit` with the temporary path and then renames it over
/// `path`. If anything fails, including the hook, the temporary file is
/// removed and `path` keeps its previous contents.
pub fn write_atomic_with(
    path: &Path,
    bytes: &[u8],
    before_commit: impl FnOnce(&Path) -> io::Result<()>,
) -> Result<(), StoreError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::Builder::new()
        .prefix(".stp-state")
        .suffix(".tmp")
        .tempfile_in(dir)
        .map_err(io_err(dir))?;
    tmp.write_all(bytes).map_err(io_err(tmp.path()))?;
    tmp.as_file().sync_all().map_err(io_err(tmp.path()))?;
    before_commit(tmp.path()).map_err(io_err(tmp.path()))?;
    tmp.persist(path).map_err(|e| io_err(path)(e.error))?;
    Ok(())
}

/// Lowercase slug of a display name, used to mint faculty ids.
fn slug(name: &str) -> String {
    let mut out = String::new();
    for ch in name.chars().flat_map(char::to_lowercase) {
        if ch.is_alphanumeric() {
            out.push(ch);
        } else if !out.is_empty() && !out.ends_with('-') {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    if out.is_empty() {
        "faculty".into()
    } else {
        out
    }
}

/// The single writer over a snapshot. Every mutation is applied to a copy,
/// validated, persisted (when backed by a file) and only then made
/// current, so a failed mutation leaves both memory and disk untouched.
#[derive(Debug, Clone)]
pub struct Store {
    path: Option<PathBuf>,
    state: StateSnapshot,
}

impl Store {
    pub fn in_memory(state: StateSnapshot) -> Result<Self, StoreError> {
        state.validate()?;
        Ok(Store {
            path: None,
            state: state.canonical(),
        })
    }

    /// Opens the snapshot at `path`, creating an empty one when absent.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let path = path.into();
        let state = match load_state(&path)? {
            Some(s) => s.canonical(),
            None => {
                let fresh = StateSnapshot::default();
                save_state(&fresh, &path)?;
                fresh
            }
        };
        Ok(Store {
            path: Some(path),
            state,
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn state(&self) -> &StateSnapshot {
        &self.state
    }

    /// Applies `f` to a copy of the state and commits it if `f` succeeds
    /// and the result validates and persists.
    pub fn mutate<T>(
        &mut self,
        f: impl FnOnce(&mut StateSnapshot) -> Result<T, StoreError>,
    ) -> Result<T, StoreError> {
        let mut next = self.state.clone();
        let out = f(&mut next)?;
        next.canonicalize();
        next.validate()?;
        if let Some(path) = &self.path {
            save_state(&next, path)?;
        }
        self.state = next;
        Ok(out)
    }

    pub fn get_faculty(&self, id: &FacultyId) -> Result<&FacultyProfile, StoreError> {
        self.state
            .faculty(id)
            .ok_or_else(|| StoreError::UnknownFaculty(id.clone()))
    }

    pub fn list_faculty(&self) -> &[FacultyProfile] {
        &self.state.faculty
    }

    pub fn list_items(&self) -> &[StpItem] {
        &self.state.items
    }

    pub fn get_item(&self, id: &StpId) -> Result<&StpItem, StoreError> {
        self.state
            .item(id)
            .ok_or_else(|| StoreError::UnknownItem(id.clone()))
    }

    /// Creates a profile under an id minted from the name (`josh-magtibay`,
    /// then `josh-magtibay-2`, ...).
    pub fn create_faculty(
        &mut self,
        input: ProfileInput,
        now: DateTime<Utc>,
    ) -> Result<FacultyProfile, StoreError> {
        let base = slug(&input.name);
        let mut id = FacultyId(base.clone());
        let mut n = 2;
        while self.state.faculty(&id).is_some() {
            id = FacultyId(format!("{base}-{n}"));
            n += 1;
        }
        self.insert_faculty(id, input, now)
    }

    /// Creates a profile under a caller-chosen id.
    pub fn insert_faculty(
        &mut self,
        id: FacultyId,
        input: ProfileInput,
        now: DateTime<Utc>,
    ) -> Result<FacultyProfile, StoreError> {
        if self.state.faculty(&id).is_some() {
            return Err(StoreError::DuplicateFaculty(id));
        }
        let profile = input
            .into_profile(id, now, now)
            .map_err(StoreError::InvalidProfile)?;
        self.mutate(|s| {
            s.faculty.push(profile.clone());
            Ok(profile)
        })
    }

    /// Replaces an existing profile, keeping its creation time.
    pub fn update_faculty(
        &mut self,
        id: &FacultyId,
        input: ProfileInput,
        now: DateTime<Utc>,
    ) -> Result<FacultyProfile, StoreError> {
        let created = self.get_faculty(id)?.created_at;
        let profile = input
            .into_profile(id.clone(), created, now)
            .map_err(StoreError::InvalidProfile)?;
        self.mutate(|s| {
            let slot = s
                .faculty
                .iter_mut()
                .find(|f| &f.faculty_id == id)
                .expect("checked above");
            *slot = profile.clone();
            Ok(profile)
        })
    }

    /// Creates or replaces the profile with this id.
    pub fn upsert_faculty(
        &mut self,
        id: FacultyId,
        input: ProfileInput,
        now: DateTime<Utc>,
    ) -> Result<FacultyProfile, StoreError> {
        if self.state.faculty(&id).is_some() {
            self.update_faculty(&id, input, now)
        } else {
            self.insert_faculty(id, input, now)
        }
    }

    /// Inserts or replaces an item by `stp_id`.
    pub fn upsert_item(&mut self, item: StpItem) -> Result<(), StoreError> {
        self.mutate(|s| {
            match s.items.iter_mut().find(|i| i.stp_id == item.stp_id) {
                Some(slot) => *slot = item,
                None => s.items.push(item),
            }
            Ok(())
        })
    }

    pub fn add_like(
        &mut self,
        faculty: &FacultyId,
        item: &StpId,
        now: DateTime<Utc>,
    ) -> Result<LikeEvent, StoreError> {
        self.get_faculty(faculty)?;
        self.get_item(item)?;
        if self
            .state
            .likes
            .iter()
            .any(|l| &l.faculty_id == faculty && &l.stp_id == item)
        {
            return Err(StoreError::DuplicateLike(faculty.clone(), item.clone()));
        }
        let like = LikeEvent {
            faculty_id: faculty.clone(),
            stp_id: item.clone(),
            liked_at: now,
        };
        self.mutate(|s| {
            s.likes.push(like.clone());
            Ok(like)
        })
    }

    pub fn remove_like(&mut self, faculty: &FacultyId, item: &StpId) -> Result<(), StoreError> {
        self.get_faculty(faculty)?;
        let pos = self
            .state
            .likes
            .iter()
            .position(|l| &l.faculty_id == faculty && &l.stp_id == item)
            .ok_or_else(|| StoreError::LikeNotFound(faculty.clone(), item.clone()))?;
        self.mutate(|s| {
            s.likes.remove(pos);
            Ok(())
        })
    }

    pub fn likes_of(&self, faculty: &FacultyId) -> Vec<&LikeEvent> {
        self.state
            .likes
            .iter()
            .filter(|l| &l.faculty_id == faculty)
            .collect()
    }

    pub fn add_attendance(&mut self, record: AttendanceRecord) -> Result<AttendanceRecord, StoreError> {
        self.get_faculty(&record.faculty_id)?;
        self.get_item(&record.stp_id)?;
        self.mutate(|s| {
            s.attendance.push(record.clone());
            Ok(record)
        })
    }
}
