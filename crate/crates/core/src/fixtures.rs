//! Reference data: the two faculty profiles used throughout the docs and a
//! three-item catalog in which one of them has liked a finance forum.

use chrono::{DateTime, NaiveDate, TimeZone, Utc};

use crate::model::{
    token_set, DedupKey, FacultyId, FacultyProfile, LikeEvent, ProfileInput, StpItem, Token,
};
use crate::store::StateSnapshot;

pub const JOSH_ID: &str = "josh-magtibay";
pub const BENJIE_ID: &str = "benjie-a-bautista";

pub fn epoch() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap()
}

/// The date the worked example is evaluated on; every catalog item starts
/// after it.
pub fn worked_example_today() -> NaiveDate {
    NaiveDate::from_ymd_opt(2025, 6, 1).unwrap()
}

pub fn josh_input() -> ProfileInput {
    ProfileInput {
        name: "Josh Magtibay".into(),
        college: "CABEIHM".into(),
        programs: vec!["BS-HRM".into(), "BS-Accountancy".into()],
        interests: vec!["Accounting".into(), "Finance".into()],
        expertise: vec![],
    }
}

pub fn benjie_input() -> ProfileInput {
    ProfileInput {
        name: "Benjie A Bautista".into(),
        college: "CABEIHM".into(),
        programs: vec!["BS-Accountancy".into(), "BS Business Administration".into()],
        interests: vec![
            "Finance".into(),
            "Entrepreneurship".into(),
            "Business Management".into(),
        ],
        expertise: vec![],
    }
}

pub fn josh() -> FacultyProfile {
    josh_input()
        .into_profile(JOSH_ID.into(), epoch(), epoch())
        .expect("valid fixture")
}

pub fn benjie() -> FacultyProfile {
    benjie_input()
        .into_profile(BENJIE_ID.into(), epoch(), epoch())
        .expect("valid fixture")
}

/// Builds a profile from already-simple terms; panics on invalid input.
pub fn profile(
    id: &str,
    college: &str,
    programs: &[&str],
    interests: &[&str],
    expertise: &[&str],
) -> FacultyProfile {
    FacultyProfile {
        faculty_id: FacultyId::from(id),
        name: id.to_string(),
        college: Token::new(college).expect("college"),
        programs: token_set("programs", programs).expect("programs"),
        interests: token_set("interests", interests).expect("interests"),
        expertise: token_set("expertise", expertise).expect("expertise"),
        created_at: epoch(),
        updated_at: epoch(),
    }
}

/// Catalog item whose id is derived from its title and start date, as the
/// ingestion pipeline would.
pub fn item(title: &str, start: NaiveDate, tags: &[&str]) -> StpItem {
    StpItem {
        stp_id: DedupKey::new(title, start).stp_id(),
        title: title.to_string(),
        provider: "CHED".into(),
        start_date: start,
        end_date: None,
        url: None,
        description: None,
        tags: token_set("tags", tags).expect("tags"),
        source: "fixture".into(),
        ingested_at: epoch(),
    }
}

/// Finance Forum, Tax Update and Network Security, in that order.
pub fn worked_example_catalog() -> Vec<StpItem> {
    let d = |day| NaiveDate::from_ymd_opt(2025, 7, day).unwrap();
    vec![
        item("Finance Forum", d(10), &["finance"]),
        item("Tax Update", d(15), &["accounting", "taxation"]),
        item("Network Security", d(20), &["networking"]),
    ]
}

/// Josh and Benjie with the three-item catalog; Benjie has liked Finance
/// Forum.
pub fn worked_example_state() -> StateSnapshot {
    let items = worked_example_catalog();
    let likes = vec![LikeEvent {
        faculty_id: BENJIE_ID.into(),
        stp_id: items[0].stp_id.clone(),
        liked_at: epoch(),
    }];
    StateSnapshot {
        faculty: vec![josh(), benjie()],
        items,
        likes,
        ..StateSnapshot::default()
    }
}
