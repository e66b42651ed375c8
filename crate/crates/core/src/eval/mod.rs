//! Offline evaluation: synthetic populations, leave-one-out hit rate and a
//! brute-force reference scorer.

pub mod oracle;
pub mod rng;
pub mod synth;

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Exec;
use crate::model::{AttendanceRecord, FacultyId, FacultyProfile, LikeEvent, StpId};
use crate::recommend::{RecommendParams, Recommender};
use crate::similarity::SimilarityParams;
use crate::store::StateSnapshot;
use rng::{domain, Stream};

pub use oracle::{compare_recommendations, oracle_recommend};
pub use synth::{generate_population, SyntheticSpec};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("insufficient likes: no faculty member has at least 2 likes")]
    InsufficientLikes,
    #[error("k must be at least 1")]
    ZeroK,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub k: usize,
    pub hit_rate: f64,
    pub random_baseline: f64,
    pub lift: f64,
    pub n_trials: usize,
}

/// The like each trial hides: the user's lexicographically smallest item.
fn hidden_item<'a>(likes: &'a [LikeEvent], user: &FacultyId) -> Option<(usize, &'a StpId)> {
    let mine: Vec<&StpId> = likes
        .iter()
        .filter(|l| &l.faculty_id == user)
        .map(|l| &l.stp_id)
        .collect();
    (mine.len() >= 2).then(|| (mine.len(), *mine.iter().min().expect("non-empty")))
}

/// For every faculty member with at least two likes, hides their smallest
/// liked item, re-ranks (past items included) and counts a hit when the
/// hidden item lands in the top `k`. The random baseline is `k` over the
/// mean candidate-set size, capped at 1.
pub fn leave_one_out(
    state: &StateSnapshot,
    params: &RecommendParams,
    k: usize,
    exec: Exec,
) -> Result<EvalResult, EvalError> {
    if k == 0 {
        return Err(EvalError::ZeroK);
    }
    let trials: Vec<(&FacultyProfile, &StpId)> = state
        .faculty
        .iter()
        .filter_map(|f| hidden_item(&state.likes, &f.faculty_id).map(|(_, item)| (f, item)))
        .collect();
    if trials.is_empty() {
        return Err(EvalError::InsufficientLikes);
    }
    let recommender = Recommender::from_snapshot(state);
    let trial_params = RecommendParams {
        limit: k,
        include_past_items: true,
        ..*params
    };
    // the date is irrelevant with past items included
    let today = NaiveDate::MIN;
    let outcomes = exec.map(&trials, |(user, hidden)| {
        let ranking = recommender.rank(user, Some(hidden), &trial_params, today);
        let hit = ranking.recommendations.iter().any(|r| &r.stp_id == *hidden);
        (hit as usize, ranking.candidates)
    });
    let hits: usize = outcomes.iter().map(|o| o.0).sum();
    let candidates: usize = outcomes.iter().map(|o| o.1).sum();
    let n = trials.len();
    let hit_rate = hits as f64 / n as f64;
    let mean_candidates = candidates as f64 / n as f64;
    let random_baseline = (k as f64 / mean_candidates).min(1.0);
    Ok(EvalResult {
        k,
        hit_rate,
        random_baseline,
        lift: if random_baseline > 0.0 { hit_rate / random_baseline } else { 0.0 },
        n_trials: n,
    })
}

/// The fixed evaluation date of [`random_case`] states.
pub fn random_case_today() -> NaiveDate {
    NaiveDate::from_ymd_opt(2025, 6, 1).expect("valid date")
}

/// A small random state (at most `max_faculty` faculty and `max_items`
/// items over a tiny shared vocabulary, so overlaps are common) together
/// with random recommendation parameters.
pub fn random_case(seed: u64, max_faculty: usize, max_items: usize) -> (StateSnapshot, RecommendParams) {
    let mut s = Stream::new(seed, domain::CASE, 0);
    let n_faculty = 1 + s.below(max_faculty.max(1));
    let n_items = s.below(max_items + 1);
    let pool = ["a", "b", "c", "d", "e", "f"];
    let colleges = ["cabeihm", "cics", "cte"];
    let today = random_case_today();
    let draw_set = |s: &mut Stream, max: usize| -> Vec<String> {
        let k = s.below(max + 1);
        s.choose(&pool, k).into_iter().map(String::from).collect()
    };
    let faculty: Vec<FacultyProfile> = (0..n_faculty)
        .map(|i| {
            let programs = draw_set(&mut s, 2);
            let interests = draw_set(&mut s, 3);
            let expertise = draw_set(&mut s, 2);
            crate::model::ProfileInput {
                name: format!("Faculty {i}"),
                college: colleges[s.below(colleges.len())].into(),
                programs,
                interests,
                expertise,
            }
            .into_profile(
                FacultyId(format!("u{i}")),
                crate::fixtures::epoch(),
                crate::fixtures::epoch(),
            )
            .expect("valid profile")
        })
        .collect();
    let items: Vec<_> = (0..n_items)
        .map(|j| {
            let tags = draw_set(&mut s, 3);
            let tags: Vec<&str> = tags.iter().map(String::as_str).collect();
            // a few days either side of `today`, with collisions on purpose
            let offset = s.below(8) as i64 - 2;
            let start = if offset >= 0 {
                today + Days::new(offset as u64)
            } else {
                today - Days::new((-offset) as u64)
            };
            crate::fixtures::item(&format!("Program {j}"), start, &tags)
        })
        .collect();
    let mut likes = Vec::new();
    let mut attendance = Vec::new();
    for f in &faculty {
        for item in &items {
            if s.next_unit() < 0.35 {
                likes.push(LikeEvent {
                    faculty_id: f.faculty_id.clone(),
                    stp_id: item.stp_id.clone(),
                    liked_at: crate::fixtures::epoch(),
                });
            } else if s.next_unit() < 0.08 {
                attendance.push(AttendanceRecord {
                    faculty_id: f.faculty_id.clone(),
                    stp_id: item.stp_id.clone(),
                    date_attended: today,
                    remarks: None,
                });
            }
        }
    }
    let alphas = [0.0, 0.25, 0.5, 0.75, 1.0];
    let params = RecommendParams {
        alpha: alphas[s.below(alphas.len())],
        limit: 1 + s.below(10),
        include_past_items: s.next_unit() < 0.5,
        similarity: SimilarityParams {
            k_neighbors: 1 + s.below(5),
            ..SimilarityParams::default()
        },
    };
    let state = StateSnapshot {
        faculty,
        items,
        likes,
        attendance,
        ..StateSnapshot::default()
    }
    .canonical();
    (state, params)
}
