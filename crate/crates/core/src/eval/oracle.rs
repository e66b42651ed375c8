//! Brute-force reference scorer.
//!
//! Written against the plain record lists with linear scans and string
//! vectors; it shares no scoring code with [`crate::recommend`] or
//! [`crate::similarity`], so agreement between the two is evidence rather
//! than tautology.

use chrono::NaiveDate;

use crate::model::{FacultyProfile, Neighbor, Recommendation, Token};
use crate::recommend::RecommendParams;
use crate::store::StateSnapshot;

fn strings(set: &std::collections::BTreeSet<Token>) -> Vec<String> {
    set.iter().map(|t| t.as_str().to_string()).collect()
}

/// `Some(|a∩b| / |a∪b|)` counted by hand; `None` for two empty lists.
fn overlap(a: &[String], b: &[String]) -> Option<f64> {
    if a.is_empty() && b.is_empty() {
        return None;
    }
    let mut common = 0usize;
    for x in a {
        if b.contains(x) {
            common += 1;
        }
    }
    let union = a.len() + b.len() - common;
    Some(common as f64 / union as f64)
}

fn similarity(u: &FacultyProfile, v: &FacultyProfile, params: &RecommendParams) -> f64 {
    let s = &params.similarity;
    let same_college = if u.college.as_str() == v.college.as_str() { 1.0 } else { 0.0 };
    let parts = [
        (s.weight_college, Some(same_college)),
        (s.weight_programs, overlap(&strings(&u.programs), &strings(&v.programs))),
        (s.weight_interests, overlap(&strings(&u.interests), &strings(&v.interests))),
        (s.weight_expertise, overlap(&strings(&u.expertise), &strings(&v.expertise))),
    ];
    let mut num = 0.0;
    let mut den = 0.0;
    for (w, value) in parts {
        if let Some(value) = value {
            num += w * value;
            den += w;
        }
    }
    if den <= 0.0 {
        same_college
    } else {
        (num / den).clamp(0.0, 1.0)
    }
}

fn has_liked(state: &StateSnapshot, faculty: &str, item: &str) -> bool {
    state
        .likes
        .iter()
        .any(|l| l.faculty_id.as_str() == faculty && l.stp_id.as_str() == item)
}

fn has_attended(state: &StateSnapshot, faculty: &str, item: &str) -> bool {
    state
        .attendance
        .iter()
        .any(|a| a.faculty_id.as_str() == faculty && a.stp_id.as_str() == item)
}

/// Exhaustively scores every catalog item for `user`.
pub fn oracle_recommend(
    user: &FacultyProfile,
    state: &StateSnapshot,
    params: &RecommendParams,
    today: NaiveDate,
) -> Vec<Recommendation> {
    // every other faculty member, scored, then sorted and cut to k
    let mut everyone: Vec<(f64, String)> = Vec::new();
    for other in &state.faculty {
        if other.faculty_id == user.faculty_id {
            continue;
        }
        everyone.push((similarity(user, other, params), other.faculty_id.0.clone()));
    }
    everyone.sort_by(|a, b| b.0.partial_cmp(&a.0).expect("finite").then_with(|| a.1.cmp(&b.1)));
    let neighbors: Vec<(f64, String)> = everyone
        .into_iter()
        .filter(|(s, _)| *s > 0.0)
        .take(params.similarity.k_neighbors)
        .collect();

    let mut terms: Vec<String> = vec![user.college.as_str().to_string()];
    for set in [&user.programs, &user.interests, &user.expertise] {
        for t in set {
            if !terms.contains(&t.as_str().to_string()) {
                terms.push(t.as_str().to_string());
            }
        }
    }

    let me = user.faculty_id.as_str();
    let mut rows: Vec<(Recommendation, NaiveDate)> = Vec::new();
    for item in &state.items {
        let id = item.stp_id.as_str();
        if has_liked(state, me, id) || has_attended(state, me, id) {
            continue;
        }
        if item.start_date < today && !params.include_past_items {
            continue;
        }
        let tags = strings(&item.tags);
        let matched: Vec<String> = tags.iter().filter(|t| terms.contains(t)).cloned().collect();
        let content = if tags.is_empty() {
            0.0
        } else {
            matched.len() as f64 / tags.len() as f64
        };
        let mut sim_total = 0.0;
        let mut sim_liked = 0.0;
        let mut contributors = Vec::new();
        for (sim, who) in &neighbors {
            sim_total += sim;
            if has_liked(state, who, id) {
                sim_liked += sim;
                contributors.push(Neighbor {
                    faculty_id: who.as_str().into(),
                    similarity: *sim,
                });
            }
        }
        let collab = if sim_total > 0.0 { sim_liked / sim_total } else { 0.0 };
        let score = (params.alpha * content + (1.0 - params.alpha) * collab).min(1.0);
        if score > 0.0 {
            rows.push((
                Recommendation {
                    stp_id: item.stp_id.clone(),
                    score,
                    content_component: content,
                    collab_component: collab,
                    matched_terms: matched.iter().map(|m| Token::new(m).expect("token")).collect(),
                    contributing_neighbors: contributors,
                },
                item.start_date,
            ));
        }
    }
    rows.sort_by(|a, b| {
        b.0.score
            .partial_cmp(&a.0.score)
            .expect("finite")
            .then_with(|| a.1.cmp(&b.1))
            .then_with(|| a.0.stp_id.cmp(&b.0.stp_id))
    });
    rows.into_iter()
        .take(params.limit)
        .map(|(r, _)| r)
        .collect()
}

/// Element-wise comparison: ids, order, terms and neighbor ids must match
/// exactly; every real-valued field within `tol`.
pub fn compare_recommendations(
    got: &[Recommendation],
    expected: &[Recommendation],
    tol: f64,
) -> Result<(), String> {
    if got.len() != expected.len() {
        return Err(format!("length {} != {}", got.len(), expected.len()));
    }
    for (pos, (g, e)) in got.iter().zip(expected).enumerate() {
        if g.stp_id != e.stp_id {
            return Err(format!("position {pos}: {} != {}", g.stp_id, e.stp_id));
        }
        for (name, a, b) in [
            ("score", g.score, e.score),
            ("content", g.content_component, e.content_component),
            ("collab", g.collab_component, e.collab_component),
        ] {
            if (a - b).abs() > tol {
                return Err(format!("position {pos} {name}: {a} vs {b}"));
            }
        }
        if g.matched_terms != e.matched_terms {
            return Err(format!("position {pos}: matched terms differ"));
        }
        if g.contributing_neighbors.len() != e.contributing_neighbors.len()
            || g
                .contributing_neighbors
                .iter()
                .zip(&e.contributing_neighbors)
                .any(|(a, b)| a.faculty_id != b.faculty_id || (a.similarity - b.similarity).abs() > tol)
        {
            return Err(format!("position {pos}: contributing neighbors differ"));
        }
    }
    Ok(())
}
