//! Seminar and training program recommender for faculty.
//!
//! Faculty profiles and catalog items share one normalized token
//! vocabulary. [`recommend`] blends how well an item's tags match a
//! profile with how strongly the profile's nearest neighbors liked it.
//! Around that sit feed ingestion ([`ingest`]), a validated JSON snapshot
//! store ([`store`]), attendance reporting ([`report`]), Likert survey
//! tabulation ([`survey`]) and an offline evaluation harness ([`eval`]).

pub mod eval;
pub mod exec;
pub mod fixtures;
pub mod ingest;
pub mod model;
pub mod recommend;
pub mod report;
pub mod similarity;
pub mod store;
pub mod survey;

pub use exec::Exec;
pub use model::{
    normalize_token, AttendanceRecord, FacultyId, FacultyProfile, LikeEvent, ProfileInput,
    Recommendation, StpId, StpItem, Token,
};
pub use recommend::{RecommendParams, Recommender};
pub use similarity::SimilarityParams;
pub use store::{StateSnapshot, Store, StoreError};
