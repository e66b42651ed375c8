//! Consolidated attendance report.

use std::collections::HashMap;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{FacultyId, StpId, Token};
use crate::store::StateSnapshot;

pub const CSV_HEADERS: [&str; 5] = ["faculty_name", "college", "item_title", "provider", "date_attended"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("invalid date range: from {from} is after to {to}")]
    InvalidRange { from: NaiveDate, to: NaiveDate },
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReportFilter {
    pub college: Option<Token>,
    pub from: Option<NaiveDate>,
    pub to: Option<NaiveDate>,
}

impl ReportFilter {
    pub fn validate(&self) -> Result<(), ReportError> {
        match (self.from, self.to) {
            (Some(from), Some(to)) if from > to => Err(ReportError::InvalidRange { from, to }),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportRow {
    pub faculty_name: String,
    pub college: String,
    pub item_title: String,
    pub provider: String,
    pub date_attended: NaiveDate,
}

/// Attendance rows matching `filter`, ordered by college, faculty name,
/// date and then item title. Both date bounds are inclusive.
pub fn attendance_report(
    state: &StateSnapshot,
    filter: &ReportFilter,
) -> Result<Vec<ReportRow>, ReportError> {
    filter.validate()?;
    let faculty: HashMap<&FacultyId, _> = state.faculty.iter().map(|f| (&f.faculty_id, f)).collect();
    let items: HashMap<&StpId, _> = state.items.iter().map(|i| (&i.stp_id, i)).collect();
    let mut rows: Vec<ReportRow> = state
        .attendance
        .iter()
        .filter(|a| filter.from.is_none_or(|from| a.date_attended >= from))
        .filter(|a| filter.to.is_none_or(|to| a.date_attended <= to))
        .filter_map(|a| {
            let f = faculty.get(&a.faculty_id)?;
            let item = items.get(&a.stp_id)?;
            if filter.college.as_ref().is_some_and(|c| c != &f.college) {
                return None;
            }
            Some(ReportRow {
                faculty_name: f.name.clone(),
                college: f.college.to_string(),
                item_title: item.title.clone(),
                provider: item.provider.clone(),
                date_attended: a.date_attended,
            })
        })
        .collect();
    rows.sort_by(|a, b| {
        (&a.college, &a.faculty_name, a.date_attended, &a.item_title).cmp(&(
            &b.college,
            &b.faculty_name,
            b.date_attended,
            &b.item_title,
        ))
    });
    Ok(rows)
}

/// RFC 4180 CSV with a header row, even when there are no rows.
pub fn to_csv(rows: &[ReportRow]) -> String {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    w.write_record(CSV_HEADERS).expect("in-memory write");
    for r in rows {
        let date = r.date_attended.format("%Y-%m-%d").to_string();
        w.write_record([
            r.faculty_name.as_str(),
            r.college.as_str(),
            r.item_title.as_str(),
            r.provider.as_str(),
            date.as_str(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
}
