use std::collections::HashMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use chrono::NaiveDate;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::json;
use stp_core::ingest::{ingest_feed, FeedFormat};
use stp_core::recommend::Feed;
use stp_core::report::{attendance_report, to_csv, ReportFilter};
use stp_core::store::SCHEMA_VERSION;
use stp_core::{
    AttendanceRecord, FacultyId, ProfileInput, RecommendParams, Recommender, StpId, Token,
};

use crate::{ApiError, AppState};

type Shared = State<Arc<AppState>>;
type Params = Query<HashMap<String, String>>;

const MAX_FEED_BYTES: usize = 32 * 1024 * 1024;

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/faculty", post(create_faculty).get(list_faculty))
        .route("/api/faculty/{id}", get(get_faculty).put(update_faculty))
        .route("/api/faculty/{id}/recommendations", get(recommendations))
        .route("/api/faculty/{id}/likes", post(add_like).get(list_likes))
        .route("/api/faculty/{id}/likes/{stp_id}", delete(remove_like))
        .route("/api/faculty/{id}/attendance", post(add_attendance))
        .route("/api/reports/attendance", get(report))
        .route("/api/stp", get(list_items))
        .route("/api/stp/{id}", get(get_item))
        .route("/api/admin/ingest", post(ingest))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        .method_not_allowed_fallback(|| async {
            ApiError::validation("method not allowed on this endpoint").with_status(StatusCode::METHOD_NOT_ALLOWED)
        })
        .layer(DefaultBodyLimit::max(MAX_FEED_BYTES))
        .with_state(state)
}

impl ApiError {
    fn with_status(mut self, status: StatusCode) -> Self {
        self.status = status;
        self
    }
}

fn json_body<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::parse(format!("invalid JSON body: {e}")))
}

fn param<T: std::str::FromStr>(q: &HashMap<String, String>, key: &str) -> Result<Option<T>, ApiError> {
    match q.get(key).map(|v| v.trim()).filter(|v| !v.is_empty()) {
        None => Ok(None),
        Some(raw) => raw
            .parse()
            .map(Some)
            .map_err(|_| ApiError::validation(format!("invalid value for {key}: {raw:?}"))),
    }
}

fn date_param(q: &HashMap<String, String>, key: &str) -> Result<Option<NaiveDate>, ApiError> {
    match q.get(key).map(|v| v.trim()).filter(|v| !v.is_empty()) {
        None => Ok(None),
        Some(raw) => NaiveDate::parse_from_str(raw, "%Y-%m-%d")
            .map(Some)
            .map_err(|_| ApiError::validation(format!("invalid date for {key}: {raw:?} (expected YYYY-MM-DD)"))),
    }
}

async fn health(State(app): Shared) -> Json<serde_json::Value> {
    let store = app.read();
    let s = store.state();
    Json(json!({
        "status": "ok",
        "schema_version": SCHEMA_VERSION,
        "counts": {
            "faculty": s.faculty.len(),
            "items": s.items.len(),
            "likes": s.likes.len(),
            "attendance": s.attendance.len(),
        }
    }))
}

async fn create_faculty(State(app): Shared, body: Bytes) -> Result<Response, ApiError> {
    let input: ProfileInput = json_body(&body)?;
    let now = app.now();
    let profile = app.write().create_faculty(input, now)?;
    Ok((StatusCode::CREATED, Json(profile)).into_response())
}

async fn list_faculty(State(app): Shared) -> Response {
    Json(app.read().list_faculty()).into_response()
}

async fn get_faculty(State(app): Shared, Path(id): Path<String>) -> Result<Response, ApiError> {
    let store = app.read();
    Ok(Json(store.get_faculty(&FacultyId(id))?).into_response())
}

async fn update_faculty(State(app): Shared, Path(id): Path<String>, body: Bytes) -> Result<Response, ApiError> {
    let input: ProfileInput = json_body(&body)?;
    let now = app.now();
    let profile = app.write().update_faculty(&FacultyId(id), input, now)?;
    Ok(Json(profile).into_response())
}

/// Parses `limit`, `alpha` and `include_past` over the service defaults.
pub(crate) fn recommend_params(defaults: &RecommendParams, q: &HashMap<String, String>) -> Result<RecommendParams, ApiError> {
    let mut p = *defaults;
    if let Some(limit) = param::<usize>(q, "limit")? {
        p.limit = limit;
    }
    if let Some(alpha) = param::<f64>(q, "alpha")? {
        p.alpha = alpha;
    }
    if let Some(past) = param::<bool>(q, "include_past")? {
        p.include_past_items = past;
    }
    p.validate().map_err(|e| ApiError::validation(e.to_string()))?;
    Ok(p)
}

async fn recommendations(State(app): Shared, Path(id): Path<String>, Query(q): Params) -> Result<Response, ApiError> {
    let params = recommend_params(app.defaults(), &q)?;
    let today = app.today();
    let store = app.read();
    let user = store.get_faculty(&FacultyId(id))?;
    let state = store.state();
    let recs = Recommender::from_snapshot(state).recommend(user, &params, today);
    let feed = Feed::build(user.faculty_id.clone(), today, recs, &state.items);
    Ok(Json(feed).into_response())
}

#[derive(Deserialize)]
struct LikeBody {
    stp_id: String,
}

async fn add_like(State(app): Shared, Path(id): Path<String>, body: Bytes) -> Result<Response, ApiError> {
    let body: LikeBody = json_body(&body)?;
    let now = app.now();
    let like = app.write().add_like(&FacultyId(id), &StpId(body.stp_id), now)?;
    Ok((StatusCode::CREATED, Json(like)).into_response())
}

async fn list_likes(State(app): Shared, Path(id): Path<String>) -> Result<Response, ApiError> {
    let store = app.read();
    let id = FacultyId(id);
    store.get_faculty(&id)?;
    Ok(Json(store.likes_of(&id)).into_response())
}

async fn remove_like(State(app): Shared, Path((id, stp_id)): Path<(String, String)>) -> Result<Response, ApiError> {
    app.write().remove_like(&FacultyId(id), &StpId(stp_id))?;
    Ok(StatusCode::NO_CONTENT.into_response())
}

#[derive(Deserialize)]
struct AttendanceBody {
    stp_id: String,
    date_attended: NaiveDate,
    #[serde(default)]
    remarks: Option<String>,
}

async fn add_attendance(State(app): Shared, Path(id): Path<String>, body: Bytes) -> Result<Response, ApiError> {
    let body: AttendanceBody = json_body(&body)?;
    let record = AttendanceRecord {
        faculty_id: FacultyId(id),
        stp_id: StpId(body.stp_id),
        date_attended: body.date_attended,
        remarks: body.remarks.filter(|r| !r.trim().is_empty()),
    };
    let record = app.write().add_attendance(record)?;
    Ok((StatusCode::CREATED, Json(record)).into_response())
}

enum ReportFormat {
    Json,
    Csv,
}

async fn report(State(app): Shared, Query(q): Params) -> Result<Response, ApiError> {
    let filter = ReportFilter {
        college: q.get("college").and_then(|c| Token::new(c).ok()),
        from: date_param(&q, "from")?,
        to: date_param(&q, "to")?,
    };
    let format = match q.get("format").map(String::as_str) {
        None | Some("") | Some("json") => ReportFormat::Json,
        Some("csv") => ReportFormat::Csv,
        Some(other) => return Err(ApiError::validation(format!("unknown format {other:?} (expected json or csv)"))),
    };
    let rows = attendance_report(app.read().state(), &filter)?;
    Ok(match format {
        ReportFormat::Json => Json(rows).into_response(),
        ReportFormat::Csv => (
            [
                (header::CONTENT_TYPE, "text/csv; charset=utf-8"),
                (header::CONTENT_DISPOSITION, "attachment; filename=\"attendance.csv\""),
            ],
            to_csv(&rows),
        )
            .into_response(),
    })
}

async fn list_items(State(app): Shared) -> Response {
    Json(app.read().list_items()).into_response()
}

async fn get_item(State(app): Shared, Path(id): Path<String>) -> Result<Response, ApiError> {
    let store = app.read();
    Ok(Json(store.get_item(&StpId(id))?).into_response())
}

async fn ingest(State(app): Shared, Query(q): Params, body: Bytes) -> Result<Response, ApiError> {
    let format = match q.get("format").filter(|f| !f.is_empty()) {
        Some(f) => f.parse::<FeedFormat>().map_err(ApiError::validation)?,
        None => FeedFormat::detect(&body),
    };
    let source = q.get("source").map(String::as_str).filter(|s| !s.trim().is_empty()).unwrap_or("api");
    let now = app.now();
    let mut store = app.write();
    let report = ingest_feed(&body, format, &app.vocab, &mut store, source, now)?;
    Ok(Json(report).into_response())
}
