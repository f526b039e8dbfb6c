use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use pivotmodel::calc::{CalcError, RuleSetError};
use pivotmodel::io::IoError;
use pivotmodel::model::ModelError;
use pivotmodel::pivot::PivotError;
use pivotmodel::trace::TraceError;
use pivotmodel::view::ViewError;
use serde::Serialize;
use serde_json::Value;

use crate::registry::RegistryError;

/// Error body: `{code, message, detail}`.
#[derive(Debug, Clone, Serialize)]
pub struct ApiError {
    #[serde(skip)]
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub detail: Value,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into(), detail: Value::Null }
    }

    pub fn with_detail(mut self, detail: Value) -> Self {
        self.detail = detail;
        self
    }

    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "malformed_request", message)
    }

    pub fn invalid(code: &'static str, message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, code, message)
    }

    pub fn unknown_model(id: &str) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "unknown_model", format!("no model '{id}'"))
    }

    pub fn version_conflict(expected: u64, current: u64) -> Self {
        ApiError::new(
            StatusCode::CONFLICT,
            "version_conflict",
            format!("model is at version {current}, request was based on {expected}"),
        )
        .with_detail(serde_json::json!({ "expected": expected, "current": current }))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(&self)).into_response()
    }
}

fn from_model(err: &ModelError) -> ApiError {
    match err {
        ModelError::UnknownMember { .. } => ApiError::new(StatusCode::NOT_FOUND, "unknown_member", err.to_string()),
        ModelError::UnknownDimension(_) => ApiError::new(StatusCode::NOT_FOUND, "unknown_dimension", err.to_string()),
        _ => ApiError::invalid("invalid_address", err.to_string()),
    }
}

impl From<PivotError> for ApiError {
    fn from(err: PivotError) -> Self {
        let message = err.to_string();
        match &err {
            PivotError::Model(e) | PivotError::Calc(CalcError::Model(e)) | PivotError::Trace(TraceError::Model(e)) => {
                from_model(e)
            }
            PivotError::Calc(CalcError::RuleCovered { address }) => ApiError::invalid("rule_covered", message)
                .with_detail(serde_json::json!({ "address": address, "hint": "submit with mode \"override\"" })),
            PivotError::Calc(CalcError::NonFinite { .. }) => ApiError::invalid("non_finite", message),
            PivotError::View(ViewError::UnknownMember { .. } | ViewError::UnknownDimension(_)) => {
                ApiError::new(StatusCode::NOT_FOUND, "unknown_member", message)
            }
            PivotError::View(_) => ApiError::invalid("invalid_view", message),
            PivotError::Trace(TraceError::UnknownRule(_)) | PivotError::Rules(RuleSetError::UnknownRule(_)) => {
                ApiError::new(StatusCode::NOT_FOUND, "unknown_rule", message)
            }
            PivotError::Trace(_) => ApiError::invalid("invalid_trace", message),
            PivotError::Rules(_) => ApiError::invalid("invalid_rules", message),
            PivotError::Io(IoError::Json(_)) => ApiError::bad_request(message),
            PivotError::Io(IoError::Model(_) | IoError::Rule(_) | IoError::UnsupportedVersion(_)) => {
                ApiError::invalid("invalid_model", message)
            }
            PivotError::Io(IoError::Csv(_)) => ApiError::bad_request(message),
            PivotError::Io(IoError::File { .. } | IoError::Io(_)) => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage", message)
            }
            PivotError::Io(_) => ApiError::invalid("invalid_data", message),
        }
    }
}

impl From<RegistryError> for ApiError {
    fn from(err: RegistryError) -> Self {
        match err {
            RegistryError::Exists(id) => {
                ApiError::new(StatusCode::CONFLICT, "model_exists", format!("model '{id}' already exists"))
            }
            RegistryError::BadId(id) => ApiError::invalid("invalid_id", format!("'{id}' is not a usable model id")),
            RegistryError::Model(e) => e.into(),
            RegistryError::Storage { .. } | RegistryError::Snapshot { .. } => {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "storage", err.to_string())
            }
        }
    }
}
