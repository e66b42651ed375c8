//! Seeded synthetic populations.

use chrono::{Days, NaiveDate};
use serde::{Deserialize, Serialize};

use super::rng::{domain, Stream};
use super::EvalError;
use crate::fixtures::epoch;
use crate::model::{DedupKey, FacultyId, FacultyProfile, LikeEvent, StpItem, Token, TokenSet};
use crate::store::StateSnapshot;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub n_faculty: usize,
    pub n_items: usize,
    pub n_clusters: usize,
    pub like_prob: f64,
    pub vocab_per_cluster: usize,
    pub interests_per_faculty: usize,
    pub tags_per_item: usize,
}

impl SyntheticSpec {
    pub fn new(seed: u64, n_faculty: usize, n_items: usize, n_clusters: usize, like_prob: f64) -> Self {
        SyntheticSpec {
            seed,
            n_faculty,
            n_items,
            n_clusters,
            like_prob,
            vocab_per_cluster: 6,
            interests_per_faculty: 3,
            tags_per_item: 2,
        }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |m: &str| Err(EvalError::InvalidSpec(m.to_string()));
        if self.n_clusters == 0 {
            return bad("n_clusters must be at least 1");
        }
        if self.n_faculty < self.n_clusters {
            return bad("n_faculty must be at least n_clusters");
        }
        if self.n_items == 0 {
            return bad("n_items must be positive");
        }
        if !(0.0..=1.0).contains(&self.like_prob) {
            return bad("like_prob must lie in [0, 1]");
        }
        if self.vocab_per_cluster == 0 || self.interests_per_faculty == 0 || self.tags_per_item == 0 {
            return bad("vocabulary, interest and tag counts must be positive");
        }
        if self.interests_per_faculty > self.vocab_per_cluster || self.tags_per_item > self.vocab_per_cluster {
            return bad("cannot draw more distinct terms than a cluster vocabulary holds");
        }
        Ok(())
    }
}

fn cluster_vocab(cluster: usize, size: usize) -> Vec<Token> {
    (0..size)
        .map(|t| Token::new(&format!("c{cluster}-t{t}")).expect("non-empty"))
        .collect()
}

fn base_date() -> NaiveDate {
    NaiveDate::from_ymd_opt(2025, 1, 1).expect("valid date")
}

/// Clustered population: faculty and items are dealt round-robin to
/// clusters, draw their interests/tags from the cluster vocabulary, and
/// like same-cluster items with probability `like_prob` (cross-cluster
/// with `like_prob / 10`).
pub fn generate_population(spec: &SyntheticSpec) -> Result<StateSnapshot, EvalError> {
    spec.validate()?;
    let vocabs: Vec<Vec<Token>> = (0..spec.n_clusters)
        .map(|c| cluster_vocab(c, spec.vocab_per_cluster))
        .collect();

    let faculty: Vec<FacultyProfile> = (0..spec.n_faculty)
        .map(|i| {
            let cluster = i % spec.n_clusters;
            let mut draws = Stream::new(spec.seed, domain::INTERESTS, i as u64);
            let interests: TokenSet = draws
                .choose(&vocabs[cluster], spec.interests_per_faculty)
                .into_iter()
                .collect();
            FacultyProfile {
                faculty_id: FacultyId(format!("f{i:04}")),
                name: format!("Faculty {i:04}"),
                college: Token::new(&format!("college-{cluster}")).expect("non-empty"),
                programs: TokenSet::new(),
                interests,
                expertise: TokenSet::new(),
                created_at: epoch(),
                updated_at: epoch(),
            }
        })
        .collect();

    let items: Vec<StpItem> = (0..spec.n_items)
        .map(|j| {
            let cluster = j % spec.n_clusters;
            let mut draws = Stream::new(spec.seed, domain::TAGS, j as u64);
            let title = format!("Cluster {cluster} Program {j:05}");
            let start = base_date() + Days::new((j % 365) as u64);
            StpItem {
                stp_id: DedupKey::new(&title, start).stp_id(),
                title,
                provider: "Synthetic".into(),
                start_date: start,
                end_date: None,
                url: None,
                description: None,
                tags: draws.choose(&vocabs[cluster], spec.tags_per_item).into_iter().collect(),
                source: format!("synthetic-{}", spec.seed),
                ingested_at: epoch(),
            }
        })
        .collect();

    let mut likes = Vec::new();
    for (i, f) in faculty.iter().enumerate() {
        let mut draws = Stream::new(spec.seed, domain::LIKES, i as u64);
        for (j, item) in items.iter().enumerate() {
            let p = if i % spec.n_clusters == j % spec.n_clusters {
                spec.like_prob
            } else {
                spec.like_prob / 10.0
            };
            if draws.next_unit() < p {
                likes.push(LikeEvent {
                    faculty_id: f.faculty_id.clone(),
                    stp_id: item.stp_id.clone(),
                    liked_at: epoch(),
                });
            }
        }
    }

    let state = StateSnapshot {
        faculty,
        items,
        likes,
        ..StateSnapshot::default()
    }
    .canonical();
    debug_assert!(state.violations().is_empty());
    Ok(state)
}
