use std::collections::BTreeMap;
use std::str::FromStr;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::Deserialize;
use serde_json::{json, Value};

use valuescope_core::annotate::{stem_presence, token_counts, GroupBy, Per};
use valuescope_core::embed::{cosine, nearest, Embedding, Hyperparams};
use valuescope_core::generalize::Strategy;
use valuescope_core::pipeline::{parse_marker, slice_graph, variation};
use valuescope_core::report;
use valuescope_core::variation::{community_set, DEFAULT_K, DEFAULT_THETA};
use valuescope_core::workspace::Workspace;

use crate::error::ApiError;
use crate::state::{AppState, JobKind};

type Params = Query<BTreeMap<String, String>>;
type Shared = State<Arc<AppState>>;

/// A response wrapped in the staleness envelope, or raw text with the same
/// information in headers only.
pub struct Reply {
    lexicon_hash: String,
    strategy: Strategy,
    model_digest: Option<String>,
    status: StatusCode,
    body: Body,
}

enum Body {
    Json(Value),
    Raw { content_type: &'static str, text: String },
}

impl Reply {
    fn json(ws: &Workspace, strategy: Strategy, data: Value) -> Reply {
        Reply {
            lexicon_hash: ws.lexicon().version_hash().to_string(),
            strategy,
            model_digest: None,
            status: StatusCode::OK,
            body: Body::Json(data),
        }
    }

    fn raw(ws: &Workspace, strategy: Strategy, content_type: &'static str, text: String) -> Reply {
        Reply { body: Body::Raw { content_type, text }, ..Reply::json(ws, strategy, Value::Null) }
    }

    fn model(mut self, digest: &str) -> Reply {
        self.model_digest = Some(digest.to_string());
        self
    }

    fn status(mut self, status: StatusCode) -> Reply {
        self.status = status;
        self
    }
}

impl IntoResponse for Reply {
    fn into_response(self) -> Response {
        let mut response = match self.body {
            Body::Json(data) => {
                let mut envelope = json!({ "lexicon_hash": self.lexicon_hash, "strategy": self.strategy });
                if let Some(digest) = &self.model_digest {
                    envelope["model_digest"] = json!(digest);
                }
                envelope["data"] = data;
                (self.status, Json(envelope)).into_response()
            }
            Body::Raw { content_type, text } => (self.status, [(header::CONTENT_TYPE, content_type)], text).into_response(),
        };
        let headers = response.headers_mut();
        let mut set = |name: &'static str, value: &str| {
            if let Ok(v) = HeaderValue::from_str(value) {
                headers.insert(name, v);
            }
        };
        set("x-lexicon-hash", &self.lexicon_hash);
        set("x-strategy", self.strategy.name());
        if let Some(digest) = &self.model_digest {
            set("x-model-digest", digest);
        }
        response
    }
}

type ApiResult = Result<Reply, ApiError>;

fn param<T: FromStr>(q: &BTreeMap<String, String>, name: &str) -> Result<Option<T>, ApiError>
where
    T::Err: std::fmt::Display,
{
    q.get(name)
        .map(|raw| raw.parse::<T>().map_err(|e| ApiError::field(name, format!("{name}: {e}"))))
        .transpose()
}

fn required(q: &BTreeMap<String, String>, name: &str) -> Result<String, ApiError> {
    q.get(name).cloned().ok_or_else(|| ApiError::field(name, format!("missing query parameter {name}")))
}

fn strategy(state: &AppState, q: &BTreeMap<String, String>) -> Result<Strategy, ApiError> {
    Ok(param(q, "strategy")?.unwrap_or(state.default_strategy))
}

fn format(q: &BTreeMap<String, String>, allowed: &[&str]) -> Result<String, ApiError> {
    let f = q.get("format").cloned().unwrap_or_else(|| "json".into());
    if allowed.contains(&f.as_str()) {
        Ok(f)
    } else {
        Err(ApiError::field("format", format!("format must be one of {}", allowed.join("|"))))
    }
}

fn theta_k(q: &BTreeMap<String, String>) -> Result<(f64, usize), ApiError> {
    let theta = param(q, "theta")?.unwrap_or(DEFAULT_THETA);
    let k = param(q, "k")?.unwrap_or(DEFAULT_K);
    if !(-1.0..=1.0).contains(&theta) {
        return Err(ApiError::field("theta", "theta must lie in [-1, 1]"));
    }
    if k < 2 {
        return Err(ApiError::field("k", "k must be at least 2"));
    }
    Ok((theta, k))
}

pub async fn corpora(State(state): Shared, Query(q): Params) -> ApiResult {
    let ws = state.workspace();
    let strategy = strategy(&state, &q)?;
    if format(&q, &["json", "csv"])? == "csv" {
        return Ok(Reply::raw(&ws, strategy, "text/csv", report::stats_csv(ws.corpora())));
    }
    let rows: Vec<Value> = report::stats_rows(ws.corpora())
        .into_iter()
        .zip(ws.corpora())
        .map(|(row, corpus)| {
            let mut v = json!(row);
            v["id"] = json!(corpus.id);
            v["digest"] = json!(corpus.digest());
            v
        })
        .collect();
    Ok(Reply::json(&ws, strategy, json!(rows)))
}

pub async fn corpus_texts(State(state): Shared, Path(id): Path<String>, Query(q): Params) -> ApiResult {
    let ws = state.workspace();
    let strategy = strategy(&state, &q)?;
    let corpus = ws.corpus(&id)?;
    let texts: Vec<Value> = corpus
        .texts
        .iter()
        .map(|t| json!({ "id": t.id, "title": t.title, "words": t.tokens.len() }))
        .collect();
    Ok(Reply::json(&ws, strategy, json!({ "corpus": id, "texts": texts })))
}

pub async fn text(State(state): Shared, Path(tid): Path<String>, Query(q): Params) -> ApiResult {
    let ws = state.workspace();
    let strategy = strategy(&state, &q)?;
    let candidates: Vec<_> = match q.get("corpus") {
        Some(c) => ws.corpus(c)?.text(&tid).into_iter().collect(),
        None => ws.corpora().iter().filter_map(|c| c.text(&tid)).collect(),
    };
    let text = match candidates[..] {
        [text] => text,
        [] => return Err(ApiError::not_found(format!("unknown text {tid:?}"))),
        _ => return Err(ApiError::field("corpus", format!("text id {tid:?} exists in several corpora; pass corpus"))),
    };
    let sets = state.annotations(&ws, strategy)?;
    let set = sets.iter().find(|s| s.corpus_id == text.corpus_id).expect("one set per corpus");
    let spans: Vec<_> = set.for_text(&text.id).collect();
    Ok(Reply::json(
        &ws,
        strategy,
        json!({ "corpus": text.corpus_id, "id": text.id, "title": text.title, "raw": text.raw, "annotations": spans }),
    ))
}

pub async fn lexicon(State(state): Shared, Query(q): Params) -> ApiResult {
    let ws = state.workspace();
    let strategy = strategy(&state, &q)?;
    let history: Vec<String> = ws
        .lexicon_history()
        .iter()
        .filter_map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
        .collect();
    Ok(Reply::json(
        &ws,
        strategy,
        json!({ "source": ws.lexicon_source(), "groups": ws.lexicon().groups(), "history": history }),
    ))
}

pub async fn put_lexicon(State(state): Shared, Query(q): Params, body: String) -> ApiResult {
    let strategy = strategy(&state, &q)?;
    state.replace_lexicon(body).await?;
    let ws = state.workspace();
    let data = json!({ "lexicon_hash": ws.lexicon().version_hash(), "groups": ws.lexicon().groups().len() });
    Ok(Reply::json(&ws, strategy, data))
}

pub async fn heatmap(State(state): Shared, Query(q): Params) -> ApiResult {
    let ws = state.workspace();
    let strategy = strategy(&state, &q)?;
    let group_by: GroupBy = param(&q, "group_by")?.unwrap_or(GroupBy::Label);
    let per: Per = param(&q, "per")?.unwrap_or(Per::Corpus);
    let format = format(&q, &["json", "csv"])?;
    let sets = state.annotations(&ws, strategy)?;
    let table = token_counts(&sets, ws.lexicon(), group_by, per);
    if format == "csv" {
        return Ok(Reply::raw(&ws, strategy, "text/csv", report::counts_csv(&table)));
    }
    Ok(Reply::json(&ws, strategy, json!(table)))
}

pub async fn venn(State(state): Shared, Query(q): Params) -> ApiResult {
    let ws = state.workspace();
    let strategy = strategy(&state, &q)?;
    let format = format(&q, &["json", "raw"])?;
    let sets = state.annotations(&ws, strategy)?;
    let partition = stem_presence(&sets).map_err(|e| ApiError::internal(e.to_string()))?;
    if format == "raw" {
        return Ok(Reply::raw(&ws, strategy, "application/json", report::venn_json(&partition)));
    }
    Ok(Reply::json(&ws, strategy, json!(partition)))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnotateRequest {
    strategy: Option<Strategy>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainRequest {
    strategy: Option<Strategy>,
    marker: Option<String>,
    #[serde(default)]
    hyperparams: Hyperparams,
}

fn json_body<T: for<'de> Deserialize<'de>>(body: &str) -> Result<T, ApiError> {
    let body = if body.trim().is_empty() { "{}" } else { body };
    serde_json::from_str(body).map_err(|e| ApiError::field("body", format!("invalid request body: {e}")))
}

pub async fn post_annotate(State(state): Shared, body: String) -> ApiResult {
    let request: AnnotateRequest = json_body(&body)?;
    let strategy = request.strategy.unwrap_or(state.default_strategy);
    let job = state.submit(JobKind::Annotate { strategy });
    Ok(Reply::json(&state.workspace(), strategy, json!(job)).status(StatusCode::ACCEPTED))
}

pub async fn post_train(State(state): Shared, body: String) -> ApiResult {
    let request: TrainRequest = json_body(&body)?;
    let strategy = request.strategy.unwrap_or(state.default_strategy);
    let marker = match request.marker.as_deref() {
        None | Some("literal") | Some("sentinel") => parse_marker(request.marker.as_deref().unwrap_or("literal")),
        Some(other) => return Err(ApiError::field("marker", format!("marker must be literal|sentinel, got {other:?}"))),
    };
    request
        .hyperparams
        .validate()
        .map_err(|e| ApiError::field("hyperparams", e.to_string()))?;
    let job = state.submit(JobKind::Train { strategy, marker, hyperparams: request.hyperparams });
    Ok(Reply::json(&state.workspace(), strategy, json!(job)).status(StatusCode::ACCEPTED))
}

pub async fn jobs(State(state): Shared, Query(q): Params) -> ApiResult {
    let strategy = strategy(&state, &q)?;
    Ok(Reply::json(&state.workspace(), strategy, json!(state.jobs())))
}

pub async fn job(State(state): Shared, Path(id): Path<String>, Query(q): Params) -> ApiResult {
    let strategy = strategy(&state, &q)?;
    let job = id
        .parse::<u64>()
        .ok()
        .and_then(|id| state.job(id))
        .ok_or_else(|| ApiError::not_found(format!("unknown job {id:?}")))?;
    Ok(Reply::json(&state.workspace(), strategy, json!(job)))
}

pub async fn similarity(State(state): Shared, Query(q): Params) -> ApiResult {
    let ws = state.workspace();
    let corpus = required(&q, "corpus")?;
    let a = required(&q, "a")?;
    let b = required(&q, "b")?;
    let k: usize = param(&q, "k")?.unwrap_or(10);
    ws.corpus(&corpus)?;
    let loaded = state.models(&ws)?;
    let slice = loaded.models.slice(&corpus)?;
    for (field, token) in [("a", &a), ("b", &b)] {
        if !slice.vocab().contains(token) {
            return Err(ApiError::field(field, format!("token {token:?} is not in the vocabulary"))
                .with_details(json!({ "field": field, "token": token })));
        }
    }
    let data = json!({
        "corpus": corpus,
        "a": a,
        "b": b,
        "cosine": cosine(slice, &a, &b)?,
        "neighbors": { "a": neighbors(slice, &a, k)?, "b": neighbors(slice, &b, k)? },
    });
    Ok(Reply::json(&ws, loaded.models.strategy, data).model(&loaded.digest))
}

fn neighbors(model: &impl Embedding, token: &str, k: usize) -> Result<Vec<Value>, ApiError> {
    Ok(nearest(model, token, k)?.into_iter().map(|(t, c)| json!({ "token": t, "cosine": c })).collect())
}

pub async fn clusters(State(state): Shared, Query(q): Params) -> ApiResult {
    let ws = state.workspace();
    let corpus = required(&q, "corpus")?;
    let (theta, k) = theta_k(&q)?;
    ws.corpus(&corpus)?;
    let loaded = state.models(&ws)?;
    let sets = state.annotations(&ws, loaded.models.strategy)?;
    let set = sets.iter().find(|s| s.corpus_id == corpus).expect("one set per corpus");
    let graph = slice_graph(&loaded.models, set, theta)?;
    let communities = community_set(&graph, k)?;
    Ok(Reply::json(&ws, loaded.models.strategy, json!({ "graph": graph, "communities": communities }))
        .model(&loaded.digest))
}

pub async fn compare(State(state): Shared, Query(q): Params) -> ApiResult {
    let ws = state.workspace();
    let seed = required(&q, "seed")?;
    let (theta, k) = theta_k(&q)?;
    let loaded = state.models(&ws)?;
    let sets = state.annotations(&ws, loaded.models.strategy)?;
    let output = variation(&loaded.models, &sets, theta, k, Some(&seed))?;
    let (_, partition) = output.comparison.expect("seed given");
    let neighborhoods: BTreeMap<&str, Vec<&Vec<String>>> = output
        .communities
        .iter()
        .map(|c| (c.corpus_id.as_str(), c.communities.iter().filter(|m| m.contains(&seed)).collect()))
        .collect();
    let data = json!({ "seed": seed, "theta": theta, "k": k, "partition": partition, "communities": neighborhoods });
    Ok(Reply::json(&ws, loaded.models.strategy, data).model(&loaded.digest))
}
