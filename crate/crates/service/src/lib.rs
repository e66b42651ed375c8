//! HTTP/JSON API for profiles, recommendations, likes, attendance,
//! reports and catalog ingestion.
//!
//! Reads run against the current snapshot under a shared lock; every
//! mutation goes through the single [`Store`] writer under an exclusive
//! lock and is on disk before it is acknowledged.

mod config;
mod error;
mod routes;

use std::sync::{Arc, RwLock, RwLockReadGuard, RwLockWriteGuard};

use chrono::{DateTime, NaiveDate, Utc};
use stp_core::ingest::TagVocabulary;
use stp_core::{RecommendParams, Store};

pub use config::{Config, ConfigError, SimilarityWeights};
pub use error::ApiError;
pub use routes::router;

pub type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

pub struct AppState {
    store: RwLock<Store>,
    vocab: TagVocabulary,
    defaults: RecommendParams,
    clock: Clock,
}

impl AppState {
    pub fn new(store: Store, vocab: TagVocabulary, defaults: RecommendParams) -> Self {
        AppState {
            store: RwLock::new(store),
            vocab,
            defaults,
            clock: Arc::new(Utc::now),
        }
    }

    /// Replaces the wall clock, e.g. to pin "today" in tests.
    pub fn with_clock(mut self, clock: Clock) -> Self {
        self.clock = clock;
        self
    }

    pub fn now(&self) -> DateTime<Utc> {
        (self.clock)()
    }

    pub fn today(&self) -> NaiveDate {
        self.now().date_naive()
    }

    pub fn defaults(&self) -> &RecommendParams {
        &self.defaults
    }

    pub fn read(&self) -> RwLockReadGuard<'_, Store> {
        self.store.read().unwrap_or_else(|p| p.into_inner())
    }

    fn write(&self) -> RwLockWriteGuard<'_, Store> {
        self.store.write().unwrap_or_else(|p| p.into_inner())
    }
}

/// Serves the API on an already-bound listener until the process exits.
pub async fn serve(listener: tokio::net::TcpListener, state: Arc<AppState>) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}
