use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde_json::{json, Value};

use valuescope_core::embed::EmbedError;
use valuescope_core::lexicon::LexiconError;
use valuescope_core::workspace::WorkspaceError;

/// An error response: `{"error": {"class", "message", "details"?}}`.
#[derive(Debug, thiserror::Error)]
#[error("{class}: {message}")]
pub struct ApiError {
    pub status: StatusCode,
    pub class: &'static str,
    pub message: String,
    pub details: Option<Value>,
}

impl ApiError {
    pub fn new(status: StatusCode, class: &'static str, message: impl Into<String>) -> ApiError {
        ApiError { status, class, message: message.into(), details: None }
    }

    pub fn with_details(mut self, details: Value) -> ApiError {
        self.details = Some(details);
        self
    }

    /// 400 naming the offending query or body field.
    pub fn field(field: &str, message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::BAD_REQUEST, "validation", message).with_details(json!({ "field": field }))
    }

    pub fn not_found(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    pub fn stale(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::CONFLICT, "stale", message)
    }

    pub fn internal(message: impl Into<String>) -> ApiError {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl From<WorkspaceError> for ApiError {
    fn from(err: WorkspaceError) -> ApiError {
        let message = err.to_string();
        match &err {
            WorkspaceError::Lexicon(LexiconError::Invalid(issues)) => {
                ApiError::new(StatusCode::BAD_REQUEST, "validation", message).with_details(json!({ "issues": issues }))
            }
            WorkspaceError::Lexicon(LexiconError::Collision { strategy, collisions }) => {
                ApiError::new(StatusCode::BAD_REQUEST, "validation", message)
                    .with_details(json!({ "strategy": strategy, "collisions": collisions }))
            }
            WorkspaceError::UnknownCorpus(id) => ApiError::not_found(message).with_details(json!({ "corpus": id })),
            WorkspaceError::Embed(EmbedError::OutOfVocabulary(token)) => {
                ApiError::new(StatusCode::BAD_REQUEST, "validation", message).with_details(json!({ "token": token }))
            }
            WorkspaceError::NoModels(_) | WorkspaceError::StaleModels { .. } => ApiError::stale(message),
            _ if err.is_validation() => ApiError::new(StatusCode::BAD_REQUEST, "validation", message),
            _ if err.is_io() => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "io", message),
            _ => ApiError::internal(message),
        }
    }
}

impl From<EmbedError> for ApiError {
    fn from(err: EmbedError) -> ApiError {
        WorkspaceError::from(err).into()
    }
}

impl From<valuescope_core::variation::VariationError> for ApiError {
    fn from(err: valuescope_core::variation::VariationError) -> ApiError {
        WorkspaceError::from(err).into()
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut error = json!({ "class": self.class, "message": self.message });
        if let Some(details) = self.details {
            error["details"] = details;
        }
        (self.status, Json(json!({ "error": error }))).into_response()
    }
}
