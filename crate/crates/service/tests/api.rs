use std::fs;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{HeaderMap, Method, Request, StatusCode};
use axum::Router;
use serde_json::{json, Value};
use tower::ServiceExt;

use valuescope_core::annotate::{annotate_corpus, token_counts, GroupBy, Per};
use valuescope_core::generalize::Strategy;
use valuescope_core::report;
use valuescope_core::workspace::Workspace;
use valuescope_service::{router, AppState};

const MINI: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/mini-workspace");

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            fs::copy(entry.path(), target).unwrap();
        }
    }
}

struct Harness {
    _dir: tempfile::TempDir,
    root: std::path::PathBuf,
    app: Router,
}

fn harness(ui: Option<&Path>) -> Harness {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path().join("ws");
    copy_dir(&Path::new(MINI).join("corpora"), &root.join("corpora"));
    let state = AppState::new(Workspace::open(&root).unwrap(), ui.map(Path::to_path_buf));
    Harness { _dir: dir, root, app: router(state) }
}

struct Reply {
    status: StatusCode,
    headers: HeaderMap,
    text: String,
}

impl Reply {
    fn json(&self) -> Value {
        serde_json::from_str(&self.text).unwrap_or_else(|e| panic!("{e}: {}", self.text))
    }

    fn header(&self, name: &str) -> Option<&str> {
        self.headers.get(name).map(|v| v.to_str().unwrap())
    }
}

async fn call(app: &Router, method: Method, uri: &str, body: &str) -> Reply {
    let request = Request::builder().method(method).uri(uri).body(Body::from(body.to_string())).unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let headers = response.headers().clone();
    let bytes = axum::body::to_bytes(response.into_body(), usize::MAX).await.unwrap();
    Reply { status, headers, text: String::from_utf8(bytes.to_vec()).unwrap() }
}

async fn get(app: &Router, uri: &str) -> Reply {
    call(app, Method::GET, uri, "").await
}

/// Submits a job and polls until it leaves the queue.
async fn run_job(app: &Router, uri: &str, body: &str) -> Value {
    let submitted = call(app, Method::POST, uri, body).await;
    assert_eq!(submitted.status, StatusCode::ACCEPTED, "{}", submitted.text);
    let id = submitted.json()["data"]["id"].as_u64().unwrap();
    for _ in 0..1200 {
        let job = get(app, &format!("/jobs/{id}")).await.json()["data"].clone();
        match job["status"].as_str().unwrap() {
            "done" | "failed" => return job,
            _ => tokio::time::sleep(Duration::from_millis(50)).await,
        }
    }
    panic!("job {id} did not finish");
}

const TRAIN: &str = r#"{"strategy":"snowball","hyperparams":{"dimension":20,"window":3,"negative":4,"epochs_compass":3,"epochs_slice":2,"min_count":1,"seed":7}}"#;

#[tokio::test]
async fn read_routes_and_envelope() {
    let h = harness(None);
    let ws = Workspace::open(&h.root).unwrap();
    let hash = ws.lexicon().version_hash().to_string();

    let corpora = get(&h.app, "/corpora").await;
    assert_eq!(corpora.status, StatusCode::OK);
    assert_eq!(corpora.header("x-lexicon-hash"), Some(hash.as_str()));
    assert_eq!(corpora.header("x-strategy"), Some("snowball"));
    let body = corpora.json();
    assert_eq!(body["lexicon_hash"], json!(hash));
    let ids: Vec<&str> = body["data"].as_array().unwrap().iter().map(|c| c["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["north", "south", "west"]);

    assert_eq!(get(&h.app, "/corpora?format=csv").await.text, report::stats_csv(ws.corpora()));

    let texts = get(&h.app, "/corpora/north/texts").await.json();
    assert_eq!(texts["data"]["texts"].as_array().unwrap().len(), 5);

    let missing = get(&h.app, "/corpora/atlantis/texts").await;
    assert_eq!(missing.status, StatusCode::NOT_FOUND);
    assert_eq!(missing.json()["error"]["class"], "not_found");
    assert_eq!(missing.header("x-lexicon-hash"), Some(hash.as_str()));

    let bad = get(&h.app, "/heatmap?strategy=mystery").await;
    assert_eq!(bad.status, StatusCode::BAD_REQUEST);
    assert_eq!(bad.json()["error"]["details"]["field"], "strategy");

    let lexicon = get(&h.app, "/lexicon").await.json();
    assert_eq!(lexicon["data"]["source"], json!(ws.lexicon_source()));
    assert_eq!(get(&h.app, "/jobs/99").await.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn annotation_reads_need_a_job_then_match_the_library() {
    let h = harness(None);
    let ws = Workspace::open(&h.root).unwrap();
    assert_eq!(get(&h.app, "/heatmap").await.status, StatusCode::CONFLICT);
    assert_eq!(get(&h.app, "/venn").await.json()["error"]["class"], "stale");

    let job = run_job(&h.app, "/jobs/annotate", r#"{"strategy":"snowball"}"#).await;
    assert_eq!(job["status"], "done", "{job}");
    assert!(job["log"].as_array().unwrap().iter().any(|l| l.as_str().unwrap().starts_with("north:")));

    let expected = token_counts(&ws.annotations(Strategy::Snowball).unwrap(), ws.lexicon(), GroupBy::Label, Per::Corpus);
    let heatmap = get(&h.app, "/heatmap?group_by=label&per=corpus").await;
    assert_eq!(heatmap.json()["data"], serde_json::to_value(&expected).unwrap());
    let csv = get(&h.app, "/heatmap?format=csv").await;
    assert_eq!(csv.header("content-type"), Some("text/csv"));
    assert_eq!(csv.text, report::counts_csv(&expected));
    assert_eq!(get(&h.app, "/heatmap").await.text, heatmap.text, "identical GETs differ");

    let corpus = ws.corpus("south").unwrap();
    let text = &corpus.texts[0];
    let direct = annotate_corpus(corpus, ws.lexicon(), Strategy::Snowball).unwrap();
    let expected_spans: Vec<_> = direct.for_text(&text.id).collect();
    let served = get(&h.app, &format!("/texts/{}?corpus=south", text.id)).await.json();
    assert_eq!(served["data"]["annotations"], serde_json::to_value(&expected_spans).unwrap());
    assert_eq!(served["data"]["raw"], json!(text.raw));
    assert_eq!(get(&h.app, "/texts/no-such-tale").await.status, StatusCode::NOT_FOUND);

    let venn = get(&h.app, "/venn").await.json();
    assert_eq!(venn["data"]["sets"], json!(["north", "south", "west"]));

    // Porter annotations are a separate cache entry.
    assert_eq!(get(&h.app, "/heatmap?strategy=porter").await.status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn lexicon_edits_are_all_or_nothing() {
    let h = harness(None);
    let before = get(&h.app, "/lexicon").await.json();

    let duplicate = "love,love;affection,Benevolence\nmother,mother,Tradition\nlove,devotion,Benevolence\n";
    let rejected = call(&h.app, Method::PUT, "/lexicon", duplicate).await;
    assert_eq!(rejected.status, StatusCode::BAD_REQUEST);
    let issues = rejected.json()["error"]["details"]["issues"].clone();
    assert_eq!(issues[0]["line"], 3);
    assert_eq!(issues[0]["first_line"], 1);
    assert_eq!(issues[0]["kind"], "duplicate_label");
    assert_eq!(get(&h.app, "/lexicon").await.json(), before);

    run_job(&h.app, "/jobs/annotate", "{}").await;
    let rows = get(&h.app, "/heatmap").await.json()["data"]["rows"].clone();
    assert!(rows.as_array().unwrap().contains(&json!("mother")));

    let source = before["data"]["source"].as_str().unwrap();
    let without_mother: String = source.lines().filter(|l| !l.starts_with("mother,")).map(|l| format!("{l}\n")).collect();
    let accepted = call(&h.app, Method::PUT, "/lexicon", &without_mother).await;
    assert_eq!(accepted.status, StatusCode::OK, "{}", accepted.text);
    let new_hash = accepted.json()["data"]["lexicon_hash"].as_str().unwrap().to_string();
    assert_ne!(new_hash, before["lexicon_hash"].as_str().unwrap());
    assert_eq!(get(&h.app, "/lexicon").await.json()["data"]["history"].as_array().unwrap().len(), 1);

    assert_eq!(get(&h.app, "/heatmap").await.status, StatusCode::CONFLICT);
    run_job(&h.app, "/jobs/annotate", "{}").await;
    let after = get(&h.app, "/heatmap").await;
    assert_eq!(after.header("x-lexicon-hash"), Some(new_hash.as_str()));
    assert!(!after.json()["data"]["rows"].as_array().unwrap().contains(&json!("mother")));
}

#[tokio::test]
async fn model_routes() {
    let h = harness(None);
    assert_eq!(get(&h.app, "/similarity?corpus=north&a=wolf&b=fox").await.status, StatusCode::CONFLICT);

    let bad = call(&h.app, Method::POST, "/jobs/train", r#"{"hyperparams":{"dimension":0}}"#).await;
    assert_eq!(bad.status, StatusCode::BAD_REQUEST);
    assert_eq!(bad.json()["error"]["details"]["field"], "hyperparams");
    let unknown = call(&h.app, Method::POST, "/jobs/train", r#"{"hyperparams":{"dimensions":10}}"#).await;
    assert_eq!(unknown.status, StatusCode::BAD_REQUEST);

    let job = run_job(&h.app, "/jobs/train", TRAIN).await;
    assert_eq!(job["status"], "done", "{job}");
    assert!(h.root.join(".valuescope/models/compass.meta.json").is_file());

    let sim = get(&h.app, "/similarity?corpus=north&a=wolf&b=fox&k=3").await;
    assert_eq!(sim.status, StatusCode::OK, "{}", sim.text);
    let digest = sim.header("x-model-digest").unwrap().to_string();
    let body = sim.json();
    assert_eq!(body["model_digest"], json!(digest));
    let c = body["data"]["cosine"].as_f64().unwrap();
    assert!((-1.0..=1.0).contains(&c));
    assert_eq!(body["data"]["neighbors"]["a"].as_array().unwrap().len(), 3);

    let oov = get(&h.app, "/similarity?corpus=north&a=wolf&b=zeppelin").await;
    assert_eq!(oov.status, StatusCode::BAD_REQUEST);
    assert!(oov.json()["error"]["message"].as_str().unwrap().contains("zeppelin"));
    assert_eq!(oov.json()["error"]["details"]["token"], "zeppelin");

    let all = get(&h.app, "/clusters?corpus=south&k=2&theta=-1").await.json();
    let communities = all["data"]["communities"]["communities"].as_array().unwrap();
    assert_eq!(communities.len(), 1);
    assert_eq!(communities[0], all["data"]["graph"]["nodes"]);
    assert_eq!(get(&h.app, "/clusters?corpus=south&theta=2").await.status, StatusCode::BAD_REQUEST);
    assert_eq!(get(&h.app, "/clusters?corpus=nowhere").await.status, StatusCode::NOT_FOUND);

    let compare = get(&h.app, "/clusters/compare?seed=mother&theta=-1").await;
    assert_eq!(compare.header("x-model-digest"), Some(digest.as_str()));
    assert_eq!(compare.json()["data"]["partition"]["sets"], json!(["north", "south", "west"]));
    assert_eq!(get(&h.app, "/clusters/compare?seed=mother&theta=-1").await.text, compare.text);

    // A lexicon change makes the models stale.
    let source = get(&h.app, "/lexicon").await.json()["data"]["source"].as_str().unwrap().to_string();
    let smaller: String = source.lines().filter(|l| !l.starts_with("love,")).map(|l| format!("{l}\n")).collect();
    assert_eq!(call(&h.app, Method::PUT, "/lexicon", &smaller).await.status, StatusCode::OK);
    assert_eq!(get(&h.app, "/similarity?corpus=north&a=wolf&b=fox").await.status, StatusCode::CONFLICT);
}

#[tokio::test]
async fn serves_the_ui_bundle() {
    let ui = tempfile::tempdir().unwrap();
    fs::write(ui.path().join("index.html"), "<html>ui</html>").unwrap();
    fs::write(ui.path().join("app.js"), "console.log(1)").unwrap();
    let h = harness(Some(ui.path()));
    let index = get(&h.app, "/").await;
    assert_eq!(index.text, "<html>ui</html>");
    assert!(index.header("content-type").unwrap().starts_with("text/html"));
    assert_eq!(get(&h.app, "/app.js").await.text, "console.log(1)");
    assert_eq!(get(&h.app, "/some/client/route").await.text, "<html>ui</html>");
    assert_eq!(get(&h.app, "/../secret").await.status, StatusCode::NOT_FOUND);
    assert_eq!(get(&h.app, "/corpora").await.status, StatusCode::OK);
}

#[test]
fn state_is_shareable() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<Arc<AppState>>();
}
