//! Hybrid recommender: content-tag matching blended with neighborhood
//! collaborative filtering over likes.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::exec::Exec;
use crate::model::{
    AttendanceRecord, FacultyId, FacultyProfile, LikeEvent, Neighbor, Recommendation, StpId,
    StpItem, Token, TokenSet,
};
use crate::similarity::{nearest_neighbors, ParamsError, SimilarityParams};
use crate::store::StateSnapshot;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecommendParams {
    /// Weight of the content component; `1 - alpha` goes to the
    /// collaborative component.
    pub alpha: f64,
    pub limit: usize,
    pub include_past_items: bool,
    pub similarity: SimilarityParams,
}

impl Default for RecommendParams {
    fn default() -> Self {
        RecommendParams {
            alpha: 0.5,
            limit: 10,
            include_past_items: false,
            similarity: SimilarityParams::default(),
        }
    }
}

impl RecommendParams {
    pub fn validate(&self) -> Result<(), ParamsError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(ParamsError::Alpha(self.alpha));
        }
        if self.limit == 0 {
            return Err(ParamsError::ZeroLimit);
        }
        self.similarity.validate()
    }
}

/// College, programs, interests and expertise of a profile as one set.
pub fn profile_terms(user: &FacultyProfile) -> TokenSet {
    let mut terms: TokenSet = user
        .programs
        .iter()
        .chain(&user.interests)
        .chain(&user.expertise)
        .cloned()
        .collect();
    terms.insert(user.college.clone());
    terms
}

fn matched_terms(terms: &TokenSet, item: &StpItem) -> Vec<Token> {
    item.tags.intersection(terms).cloned().collect()
}

fn content_from_terms(terms: &TokenSet, item: &StpItem) -> f64 {
    if item.tags.is_empty() {
        return 0.0;
    }
    let hits = item.tags.iter().filter(|t| terms.contains(*t)).count();
    hits as f64 / item.tags.len() as f64
}

/// Share of the item's tags found among the user's profile terms; zero for
/// untagged items.
pub fn content_score(user: &FacultyProfile, item: &StpItem) -> f64 {
    content_from_terms(&profile_terms(user), item)
}

/// Liked items per faculty member.
#[derive(Debug, Clone, Default)]
pub struct LikeIndex {
    by_faculty: HashMap<FacultyId, HashSet<StpId>>,
}

impl LikeIndex {
    pub fn from_events<'a>(likes: impl IntoIterator<Item = &'a LikeEvent>) -> Self {
        let mut by_faculty: HashMap<FacultyId, HashSet<StpId>> = HashMap::new();
        for like in likes {
            by_faculty
                .entry(like.faculty_id.clone())
                .or_default()
                .insert(like.stp_id.clone());
        }
        LikeIndex { by_faculty }
    }

    pub fn liked(&self, faculty: &FacultyId, item: &StpId) -> bool {
        self.by_faculty
            .get(faculty)
            .is_some_and(|items| items.contains(item))
    }

    pub fn liked_by(&self, faculty: &FacultyId) -> Option<&HashSet<StpId>> {
        self.by_faculty.get(faculty)
    }
}

/// Similarity-weighted fraction of the neighbors who liked the item; zero
/// without neighbors.
pub fn collab_score(item: &StpItem, neighbors: &[Neighbor], likes: &LikeIndex) -> f64 {
    let total: f64 = neighbors.iter().map(|n| n.similarity).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let liked: f64 = neighbors
        .iter()
        .filter(|n| likes.liked(&n.faculty_id, &item.stp_id))
        .map(|n| n.similarity)
        .sum();
    liked / total
}

pub fn blend(alpha: f64, content: f64, collab: f64) -> f64 {
    (alpha * content + (1.0 - alpha) * collab).min(1.0)
}

/// Feed order: score descending, then sooner start date, then id.
pub fn feed_order(a: (&Recommendation, NaiveDate), b: (&Recommendation, NaiveDate)) -> Ordering {
    b.0.score
        .total_cmp(&a.0.score)
        .then_with(|| a.1.cmp(&b.1))
        .then_with(|| a.0.stp_id.cmp(&b.0.stp_id))
}

/// Ranked output plus the number of candidates that were scored.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub recommendations: Vec<Recommendation>,
    pub candidates: usize,
}

/// Scoring context over one immutable state snapshot. Building it indexes
/// likes and attendance once so many users can be scored against it.
pub struct Recommender<'a> {
    catalog: &'a [StpItem],
    population: &'a [FacultyProfile],
    likes: LikeIndex,
    attended: HashMap<&'a FacultyId, HashSet<&'a StpId>>,
}

impl<'a> Recommender<'a> {
    pub fn new(
        catalog: &'a [StpItem],
        population: &'a [FacultyProfile],
        likes: &'a [LikeEvent],
        attendance: &'a [AttendanceRecord],
    ) -> Self {
        let mut attended: HashMap<&FacultyId, HashSet<&StpId>> = HashMap::new();
        for rec in attendance {
            attended.entry(&rec.faculty_id).or_default().insert(&rec.stp_id);
        }
        Recommender {
            catalog,
            population,
            likes: LikeIndex::from_events(likes),
            attended,
        }
    }

    pub fn from_snapshot(state: &'a StateSnapshot) -> Self {
        Self::new(&state.items, &state.faculty, &state.likes, &state.attendance)
    }

    pub fn likes(&self) -> &LikeIndex {
        &self.likes
    }

    pub fn catalog(&self) -> &'a [StpItem] {
        self.catalog
    }

    pub fn recommend(
        &self,
        user: &FacultyProfile,
        params: &RecommendParams,
        today: NaiveDate,
    ) -> Vec<Recommendation> {
        self.rank(user, None, params, today).recommendations
    }

    /// Scores every candidate for `user`. When `hidden` is given that like
    /// of the user's is treated as if it never happened.
    pub fn rank(
        &self,
        user: &FacultyProfile,
        hidden: Option<&StpId>,
        params: &RecommendParams,
        today: NaiveDate,
    ) -> Ranking {
        let own_likes = self.likes.liked_by(&user.faculty_id);
        let own_attended = self.attended.get(&user.faculty_id);
        let excluded = |id: &StpId| {
            let liked = own_likes.is_some_and(|s| s.contains(id)) && hidden != Some(id);
            liked || own_attended.is_some_and(|s| s.contains(id))
        };

        let terms = profile_terms(user);
        let neighbors = nearest_neighbors(user, self.population, &params.similarity);

        let mut candidates = 0;
        let mut scored: Vec<(Recommendation, NaiveDate)> = Vec::new();
        for item in self.catalog {
            if excluded(&item.stp_id) {
                continue;
            }
            if !params.include_past_items && item.start_date < today {
                continue;
            }
            candidates += 1;
            let content = content_from_terms(&terms, item);
            let collab = collab_score(item, &neighbors, &self.likes);
            let score = blend(params.alpha, content, collab);
            if score <= 0.0 {
                continue;
            }
            let contributing_neighbors = neighbors
                .iter()
                .filter(|n| self.likes.liked(&n.faculty_id, &item.stp_id))
                .cloned()
                .collect();
            scored.push((
                Recommendation {
                    stp_id: item.stp_id.clone(),
                    score,
                    content_component: content,
                    collab_component: collab,
                    matched_terms: matched_terms(&terms, item),
                    contributing_neighbors,
                },
                item.start_date,
            ));
        }
        scored.sort_by(|a, b| feed_order((&a.0, a.1), (&b.0, b.1)));
        scored.truncate(params.limit);
        Ranking {
            recommendations: scored.into_iter().map(|(r, _)| r).collect(),
            candidates,
        }
    }

    /// Feeds for every faculty member in the population, in population
    /// order.
    pub fn recommend_all(
        &self,
        params: &RecommendParams,
        today: NaiveDate,
        exec: Exec,
    ) -> Vec<(FacultyId, Vec<Recommendation>)>
    where
        Self: Sync,
    {
        exec.map(self.population, |u| {
            (u.faculty_id.clone(), self.recommend(u, params, today))
        })
    }
}

/// Ranks the catalog for `user`. Items the user already liked or attended
/// never appear; neither do items that started before `today` unless
/// `params.include_past_items` is set.
pub fn recommend(
    user: &FacultyProfile,
    catalog: &[StpItem],
    population: &[FacultyProfile],
    likes: &[LikeEvent],
    attendance: &[AttendanceRecord],
    params: &RecommendParams,
    today: NaiveDate,
) -> Vec<Recommendation> {
    Recommender::new(catalog, population, likes, attendance).recommend(user, params, today)
}

/// A recommendation joined with the catalog fields a reader needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedEntry {
    pub stp_id: StpId,
    pub title: String,
    pub provider: String,
    pub start_date: NaiveDate,
    pub end_date: Option<NaiveDate>,
    pub url: Option<String>,
    pub score: f64,
    pub content_component: f64,
    pub collab_component: f64,
    pub matched_terms: Vec<Token>,
    pub contributing_neighbors: Vec<Neighbor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feed {
    pub faculty_id: FacultyId,
    pub as_of: NaiveDate,
    pub recommendations: Vec<FeedEntry>,
}

impl Feed {
    pub fn build(
        faculty_id: FacultyId,
        as_of: NaiveDate,
        recs: Vec<Recommendation>,
        catalog: &[StpItem],
    ) -> Feed {
        let by_id: HashMap<&StpId, &StpItem> = catalog.iter().map(|i| (&i.stp_id, i)).collect();
        let recommendations = recs
            .into_iter()
            .filter_map(|r| {
                let item = by_id.get(&r.stp_id)?;
                Some(FeedEntry {
                    stp_id: r.stp_id,
                    title: item.title.clone(),
                    provider: item.provider.clone(),
                    start_date: item.start_date,
                    end_date: item.end_date,
                    url: item.url.clone(),
                    score: r.score,
                    content_component: r.content_component,
                    collab_component: r.collab_component,
                    matched_terms: r.matched_terms,
                    contributing_neighbors: r.contributing_neighbors,
                })
            })
            .collect();
        Feed {
            faculty_id,
            as_of,
            recommendations,
        }
    }
}
