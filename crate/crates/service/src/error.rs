use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use repweight_core::Error as CoreError;
use serde::Serialize;
use serde_json::Value;

/// The JSON error envelope returned by every endpoint.
#[derive(Debug, Serialize)]
pub struct ErrorBody {
    pub code: &'static str,
    pub message: String,
    pub details: Value,
}

#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                code,
                message: message.into(),
                details: Value::Null,
            },
        }
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.body.details = details;
        self
    }

    pub fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn not_found(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }

    pub fn loading() -> Self {
        Self::new(
            StatusCode::SERVICE_UNAVAILABLE,
            "loading",
            "datasets are still loading",
        )
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<CoreError> for ApiError {
    fn from(e: CoreError) -> Self {
        let message = e.to_string();
        match e {
            CoreError::MissingTable { variable, year } => {
                Self::not_found("variable_not_found", message).with_details(serde_json::json!({
                    "variable": variable,
                    "year": year,
                }))
            }
            CoreError::InvalidScenario(_) | CoreError::TooFewSeats { .. } => {
                Self::bad_request("invalid_scenario", message)
            }
            CoreError::MissingDistricts { states } => Self::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "scenario_unbuildable",
                message,
            )
            .with_details(serde_json::json!({ "states": states })),
            CoreError::UnknownFigureKind(kind) => {
                Self::not_found("unknown_figure_kind", message).with_details(serde_json::json!({ "kind": kind }))
            }
            _ => Self::new(StatusCode::UNPROCESSABLE_ENTITY, "computation_failed", message),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        if self.status.is_server_error() {
            tracing::error!(code = self.body.code, "{}", self.body.message);
        } else {
            tracing::debug!(status = %self.status, code = self.body.code, "{}", self.body.message);
        }
        (self.status, Json(self.body)).into_response()
    }
}

pub type ApiResult<T> = Result<T, ApiError>;
