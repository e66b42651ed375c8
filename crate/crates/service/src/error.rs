use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Serialize;
use stp_core::ingest::IngestError;
use stp_core::report::ReportError;
use stp_core::StoreError;

/// Body of every non-2xx response.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApiError {
    #[serde(serialize_with = "status_code")]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<Vec<String>>,
}

fn status_code<S: serde::Serializer>(s: &StatusCode, ser: S) -> Result<S::Ok, S::Error> {
    ser.serialize_u16(s.as_u16())
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status,
            code,
            message: message.into(),
            details: None,
        }
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "validation_failed", message)
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "parse_error", message)
    }

    pub fn duplicate(message: impl Into<String>) -> Self {
        Self::new(StatusCode::CONFLICT, "duplicate", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }

    pub fn with_details(mut self, details: Vec<String>) -> Self {
        self.details = Some(details);
        self
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let message = e.to_string();
        match e {
            StoreError::UnknownFaculty(_) | StoreError::UnknownItem(_) | StoreError::LikeNotFound(..) => {
                ApiError::not_found(message)
            }
            StoreError::DuplicateLike(..) | StoreError::DuplicateFaculty(_) => ApiError::duplicate(message),
            StoreError::InvalidProfile(errs) => ApiError::validation("invalid profile")
                .with_details(errs.iter().map(|e| e.to_string()).collect()),
            StoreError::Invalid(v) => ApiError::validation("state would become invalid").with_details(v),
            StoreError::Io { .. } | StoreError::Parse(_) | StoreError::UnsupportedVersion(_) => {
                tracing::error!("{message}");
                ApiError::internal(message)
            }
        }
    }
}

impl From<IngestError> for ApiError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Store(s) => s.into(),
            IngestError::Vocabulary(_) => ApiError::internal(e.to_string()),
            IngestError::NotUtf8 | IngestError::NotArray(_) => ApiError::parse(e.to_string()),
        }
    }
}

impl From<ReportError> for ApiError {
    fn from(e: ReportError) -> Self {
        ApiError::validation(e.to_string())
    }
}
