//! Faculty profile similarity and nearest-neighbor search.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{FacultyProfile, Neighbor, TokenSet};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("similarity weights must be non-negative")]
    NegativeWeight,
    #[error("similarity weights must sum to 1 (got {0})")]
    WeightSum(f64),
    #[error("k_neighbors must be at least 1")]
    ZeroNeighbors,
    #[error("alpha must lie in [0, 1] (got {0})")]
    Alpha(f64),
    #[error("limit must be at least 1")]
    ZeroLimit,
}

/// Per-attribute weights of the profile similarity plus the neighborhood
/// size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimilarityParams {
    pub weight_college: f64,
    pub weight_programs: f64,
    pub weight_interests: f64,
    pub weight_expertise: f64,
    pub k_neighbors: usize,
}

impl Default for SimilarityParams {
    fn default() -> Self {
        SimilarityParams {
            weight_college: 0.2,
            weight_programs: 0.3,
            weight_interests: 0.3,
            weight_expertise: 0.2,
            k_neighbors: 5,
        }
    }
}

impl SimilarityParams {
    pub fn validate(&self) -> Result<(), ParamsError> {
        let w = [
            self.weight_college,
            self.weight_programs,
            self.weight_interests,
            self.weight_expertise,
        ];
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(ParamsError::NegativeWeight);
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(ParamsError::WeightSum(sum));
        }
        if self.k_neighbors == 0 {
            return Err(ParamsError::ZeroNeighbors);
        }
        Ok(())
    }
}

/// `|a ∩ b| / |a ∪ b|`, or `None` when both sets are empty.
pub fn jaccard(a: &TokenSet, b: &TokenSet) -> Option<f64> {
    if a.is_empty() && b.is_empty() {
        return None;
    }
    let shared = a.intersection(b).count();
    let union = a.len() + b.len() - shared;
    Some(shared as f64 / union as f64)
}

/// Weighted blend of college equality and per-attribute Jaccard indices.
///
/// An attribute that is empty on both sides carries no information and is
/// dropped, with the remaining weights rescaled to sum to one. When every
/// remaining weight is zero the college comparison decides alone.
pub fn profile_similarity(a: &FacultyProfile, b: &FacultyProfile, params: &SimilarityParams) -> f64 {
    let college = if a.college == b.college { 1.0 } else { 0.0 };
    let components = [
        (params.weight_college, Some(college)),
        (params.weight_programs, jaccard(&a.programs, &b.programs)),
        (params.weight_interests, jaccard(&a.interests, &b.interests)),
        (params.weight_expertise, jaccard(&a.expertise, &b.expertise)),
    ];
    let mut weighted = 0.0;
    let mut total = 0.0;
    for (w, score) in components {
        if let Some(s) = score {
            weighted += w * s;
            total += w;
        }
    }
    if total <= 0.0 {
        return college;
    }
    (weighted / total).clamp(0.0, 1.0)
}

/// Orders neighbors by similarity descending, then id ascending.
pub(crate) fn neighbor_order(a: &Neighbor, b: &Neighbor) -> Ordering {
    b.similarity
        .total_cmp(&a.similarity)
        .then_with(|| a.faculty_id.cmp(&b.faculty_id))
}

/// The `k_neighbors` most similar faculty with strictly positive
/// similarity. `user` itself is skipped by id if present in `population`.
pub fn nearest_neighbors(
    user: &FacultyProfile,
    population: &[FacultyProfile],
    params: &SimilarityParams,
) -> Vec<Neighbor> {
    let mut scored: Vec<Neighbor> = population
        .iter()
        .filter(|p| p.faculty_id != user.faculty_id)
        .filter_map(|p| {
            let similarity = profile_similarity(user, p, params);
            (similarity > 0.0).then(|| Neighbor {
                faculty_id: p.faculty_id.clone(),
                similarity,
            })
        })
        .collect();
    scored.sort_by(neighbor_order);
    scored.truncate(params.k_neighbors);
    scored
}
