//! HTTP service over a valuescope workspace.
//!
//! Read routes answer from the current workspace snapshot and the caches and
//! never wait for jobs. Annotation and training run as jobs on a single
//! worker; a missing or outdated cache answers 409 until the job is done.
//! JSON responses are wrapped as `{lexicon_hash, strategy, model_digest?, data}`
//! and every response repeats these in `x-lexicon-hash`, `x-strategy` and
//! `x-model-digest` headers.

mod error;
mod handlers;
mod state;

use std::net::SocketAddr;
use std::path::{Component, Path, PathBuf};
use std::sync::Arc;

use axum::extract::{Request, State};
use axum::http::{header, HeaderValue, Uri};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::Router;

use valuescope_core::workspace::{Workspace, WorkspaceError};

pub use error::ApiError;
pub use state::{AppState, JobKind, JobStatus, JobView};

/// Environment variable naming the workspace root.
pub const WORKSPACE_ENV: &str = "VALUESCOPE_WORKSPACE";

#[derive(Debug, thiserror::Error)]
pub enum ServeError {
    #[error(transparent)]
    Workspace(#[from] WorkspaceError),
    #[error("cannot bind {addr}: {source}")]
    Bind {
        addr: String,
        #[source]
        source: std::io::Error,
    },
    #[error("server stopped: {0}")]
    Io(#[source] std::io::Error),
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/corpora", get(handlers::corpora))
        .route("/corpora/{id}/texts", get(handlers::corpus_texts))
        .route("/texts/{tid}", get(handlers::text))
        .route("/lexicon", get(handlers::lexicon).put(handlers::put_lexicon))
        .route("/heatmap", get(handlers::heatmap))
        .route("/venn", get(handlers::venn))
        .route("/jobs", get(handlers::jobs))
        .route("/jobs/annotate", axum::routing::post(handlers::post_annotate))
        .route("/jobs/train", axum::routing::post(handlers::post_train))
        .route("/jobs/{id}", get(handlers::job))
        .route("/similarity", get(handlers::similarity))
        .route("/clusters", get(handlers::clusters))
        .route("/clusters/compare", get(handlers::compare))
        .fallback(static_file)
        .layer(middleware::from_fn_with_state(Arc::clone(&state), lexicon_header))
        .with_state(state)
}

/// Adds `x-lexicon-hash` to responses that did not set it (errors, static files).
async fn lexicon_header(State(state): State<Arc<AppState>>, request: Request, next: Next) -> Response {
    let mut response = next.run(request).await;
    if !response.headers().contains_key("x-lexicon-hash") {
        let ws = state.workspace();
        if let Ok(v) = HeaderValue::from_str(ws.lexicon().version_hash()) {
            response.headers_mut().insert("x-lexicon-hash", v);
        }
    }
    response
}

fn content_type(path: &Path) -> &'static str {
    match path.extension().and_then(|e| e.to_str()) {
        Some("html") => "text/html; charset=utf-8",
        Some("js" | "mjs") => "text/javascript; charset=utf-8",
        Some("css") => "text/css; charset=utf-8",
        Some("json" | "map") => "application/json",
        Some("svg") => "image/svg+xml",
        Some("png") => "image/png",
        Some("ico") => "image/x-icon",
        Some("woff2") => "font/woff2",
        _ => "application/octet-stream",
    }
}

/// Serves the UI bundle; unknown paths fall back to `index.html`.
async fn static_file(State(state): State<Arc<AppState>>, uri: Uri) -> Response {
    let not_found = || ApiError::not_found(format!("no route for {}", uri.path())).into_response();
    let Some(root) = &state.ui_dir else { return not_found() };
    let relative = PathBuf::from(uri.path().trim_start_matches('/'));
    if relative.components().any(|c| !matches!(c, Component::Normal(_))) {
        return not_found();
    }
    let mut path = root.join(&relative);
    if !path.is_file() {
        path = root.join("index.html");
    }
    match tokio::fs::read(&path).await {
        Ok(bytes) => ([(header::CONTENT_TYPE, content_type(&path))], bytes).into_response(),
        Err(_) => not_found(),
    }
}

/// Opens the workspace at `root` and serves it on `bind` until the process exits.
pub async fn serve(root: &Path, bind: &str, ui_dir: Option<PathBuf>) -> Result<(), ServeError> {
    let workspace = Workspace::open(root)?;
    let state = AppState::new(workspace, ui_dir);
    let listener = tokio::net::TcpListener::bind(bind)
        .await
        .map_err(|source| ServeError::Bind { addr: bind.to_string(), source })?;
    let addr: Option<SocketAddr> = listener.local_addr().ok();
    if let Some(addr) = addr {
        eprintln!("valuescope: serving {} on http://{addr}", root.display());
    }
    axum::serve(listener, router(state)).await.map_err(ServeError::Io)
}
