use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use formsense_core::api::{ErrorBody, ProductCoverage};
use formsense_core::geometry::GeometryError;
use formsense_core::model::{ModelError, SessionError};
use formsense_core::pipeline::PipelineError;

use crate::store::StoreError;

/// An error response: status plus an [`ErrorBody`].
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self { status, body: ErrorBody { error: code.into(), message: message.into(), under_covered: None } }
    }

    pub fn malformed(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "malformed", message)
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid", message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            tracing::error!(status = %self.status, "{}", self.body.message);
        }
        (self.status, Json(self.body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::NotFound(_) => Self::not_found(e.to_string()),
            StoreError::Exists(_) => Self::new(StatusCode::CONFLICT, "exists", e.to_string()),
            StoreError::InvalidId(_) => Self::malformed(e.to_string()),
            StoreError::Io { .. } | StoreError::Corrupt { .. } => Self::internal(e.to_string()),
        }
    }
}

impl From<ModelError> for ApiError {
    fn from(e: ModelError) -> Self {
        Self::invalid(e.to_string())
    }
}

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        let message = e.to_string();
        match e {
            SessionError::StageOrder { .. } => Self::new(StatusCode::CONFLICT, "protocol_order", message),
            SessionError::StageClosed(_) => Self::new(StatusCode::CONFLICT, "stage_closed", message),
            SessionError::Coverage(under) => {
                let mut err = Self::new(StatusCode::CONFLICT, "coverage", message);
                err.body.under_covered =
                    Some(under.into_iter().map(|(id, count)| ProductCoverage { id, count }).collect());
                err
            }
            SessionError::Invalid(m) => m.into(),
        }
    }
}

impl From<GeometryError> for ApiError {
    fn from(e: GeometryError) -> Self {
        Self::invalid(e.to_string())
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        if e.is_validation() {
            Self::invalid(e.to_string())
        } else {
            Self::internal(e.to_string())
        }
    }
}
