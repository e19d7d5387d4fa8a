//! Shared service state. Readers take a snapshot of the workspace and the
//! caches; every mutation (lexicon edits, annotation and training jobs) runs
//! on one worker thread in submission order.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc;
use std::sync::{Arc, Mutex, RwLock, Weak};
use std::thread;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use tokio::sync::oneshot;

use valuescope_core::annotate::{AnnotationSet, MarkerStyle};
use valuescope_core::embed::Hyperparams;
use valuescope_core::generalize::Strategy;
use valuescope_core::pipeline::{load_models, marker_name, train_all_into, ModelSet};
use valuescope_core::workspace::{Workspace, WorkspaceError};

use crate::error::ApiError;

const LOG_TAIL: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

#[derive(Debug, Clone)]
pub enum JobKind {
    Annotate { strategy: Strategy },
    Train { strategy: Strategy, marker: MarkerStyle, hyperparams: Hyperparams },
}

impl JobKind {
    fn name(&self) -> &'static str {
        match self {
            JobKind::Annotate { .. } => "annotate",
            JobKind::Train { .. } => "train",
        }
    }

    fn params(&self) -> Value {
        match self {
            JobKind::Annotate { strategy } => serde_json::json!({ "strategy": strategy }),
            JobKind::Train { strategy, marker, hyperparams } => serde_json::json!({
                "strategy": strategy,
                "marker": marker_name(*marker),
                "hyperparams": hyperparams,
            }),
        }
    }
}

/// What `GET /jobs/{id}` returns.
#[derive(Debug, Clone, Serialize)]
pub struct JobView {
    pub id: u64,
    pub kind: &'static str,
    pub params: Value,
    pub status: JobStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// The last lines of the job log.
    pub log: Vec<String>,
}

#[derive(Debug)]
struct JobRecord {
    kind: JobKind,
    status: JobStatus,
    error: Option<String>,
    log: Vec<String>,
}

enum Command {
    Job(u64),
    ReplaceLexicon(String, oneshot::Sender<Result<(), WorkspaceError>>),
}

/// Models loaded from disk together with the key they were loaded under.
pub struct LoadedModels {
    key: (String, String, u64),
    pub models: ModelSet,
    /// SHA-256 over the compass and slice metadata files.
    pub digest: String,
}

type AnnotationCache = HashMap<(Strategy, String), Arc<Vec<AnnotationSet>>>;

pub struct AppState {
    workspace: RwLock<Arc<Workspace>>,
    annotations: Mutex<AnnotationCache>,
    models: Mutex<Option<Arc<LoadedModels>>>,
    model_generation: AtomicU64,
    jobs: Mutex<BTreeMap<u64, JobRecord>>,
    next_job: AtomicU64,
    queue: Mutex<mpsc::Sender<Command>>,
    pub default_strategy: Strategy,
    pub ui_dir: Option<PathBuf>,
}

impl AppState {
    pub fn new(workspace: Workspace, ui_dir: Option<PathBuf>) -> Arc<AppState> {
        let (sender, receiver) = mpsc::channel();
        let state = Arc::new(AppState {
            workspace: RwLock::new(Arc::new(workspace)),
            annotations: Mutex::new(HashMap::new()),
            models: Mutex::new(None),
            model_generation: AtomicU64::new(0),
            jobs: Mutex::new(BTreeMap::new()),
            next_job: AtomicU64::new(1),
            queue: Mutex::new(sender),
            default_strategy: Strategy::Snowball,
            ui_dir,
        });
        let weak = Arc::downgrade(&state);
        thread::Builder::new()
            .name("valuescope-worker".into())
            .spawn(move || worker(weak, receiver))
            .expect("spawn worker thread");
        state
    }

    pub fn workspace(&self) -> Arc<Workspace> {
        Arc::clone(&self.workspace.read().expect("workspace lock"))
    }

    pub fn models_dir(ws: &Workspace) -> PathBuf {
        ws.state_dir().join("models")
    }

    /// Annotation sets for the current lexicon, from memory or the disk cache.
    /// Never computes: a miss is a 409 telling the client to run an annotate job.
    pub fn annotations(&self, ws: &Workspace, strategy: Strategy) -> Result<Arc<Vec<AnnotationSet>>, ApiError> {
        let key = (strategy, ws.lexicon().version_hash().to_string());
        if let Some(sets) = self.annotations.lock().expect("cache lock").get(&key) {
            return Ok(Arc::clone(sets));
        }
        let sets = ws.cached_annotations(strategy).ok_or_else(|| {
            ApiError::stale(format!("no {strategy} annotations for the current lexicon; run an annotate job"))
        })?;
        let sets = Arc::new(sets);
        self.annotations.lock().expect("cache lock").insert(key, Arc::clone(&sets));
        Ok(sets)
    }

    fn remember_annotations(&self, ws: &Workspace, strategy: Strategy, sets: Vec<AnnotationSet>) {
        let key = (strategy, ws.lexicon().version_hash().to_string());
        self.annotations.lock().expect("cache lock").insert(key, Arc::new(sets));
    }

    /// The trained models, loaded once per (lexicon, corpora, training run).
    pub fn models(&self, ws: &Workspace) -> Result<Arc<LoadedModels>, ApiError> {
        let key = (
            ws.lexicon().version_hash().to_string(),
            ws.union_digest(),
            self.model_generation.load(Ordering::SeqCst),
        );
        if let Some(loaded) = self.models.lock().expect("model lock").as_ref() {
            if loaded.key == key {
                return Ok(Arc::clone(loaded));
            }
        }
        let models = load_models(ws, &Self::models_dir(ws))?;
        let mut hasher = Sha256::new();
        for meta in models.compass_meta.iter().chain(&models.slice_metas) {
            hasher.update(meta.to_json().as_bytes());
        }
        let loaded = Arc::new(LoadedModels { key, models, digest: hex::encode(hasher.finalize()) });
        *self.models.lock().expect("model lock") = Some(Arc::clone(&loaded));
        Ok(loaded)
    }

    pub fn submit(&self, kind: JobKind) -> JobView {
        let id = self.next_job.fetch_add(1, Ordering::SeqCst);
        let record = JobRecord { kind, status: JobStatus::Queued, error: None, log: vec!["queued".into()] };
        self.jobs.lock().expect("job lock").insert(id, record);
        let _ = self.queue.lock().expect("queue lock").send(Command::Job(id));
        self.job(id).expect("just inserted")
    }

    pub fn job(&self, id: u64) -> Option<JobView> {
        self.jobs.lock().expect("job lock").get(&id).map(|r| view(id, r))
    }

    pub fn jobs(&self) -> Vec<JobView> {
        self.jobs.lock().expect("job lock").iter().map(|(id, r)| view(*id, r)).collect()
    }

    /// Queues a lexicon replacement behind any running jobs and waits for it.
    pub async fn replace_lexicon(&self, content: String) -> Result<(), ApiError> {
        let (reply, result) = oneshot::channel();
        self.queue
            .lock()
            .expect("queue lock")
            .send(Command::ReplaceLexicon(content, reply))
            .map_err(|_| ApiError::internal("worker stopped"))?;
        result.await.map_err(|_| ApiError::internal("worker stopped"))?.map_err(ApiError::from)
    }

    fn update(&self, id: u64, f: impl FnOnce(&mut JobRecord)) {
        if let Some(record) = self.jobs.lock().expect("job lock").get_mut(&id) {
            f(record);
        }
    }

    fn log(&self, id: u64, line: impl Into<String>) {
        let line = line.into();
        self.update(id, |r| r.log.push(line));
    }

    fn run_job(&self, id: u64) {
        let Some(kind) = self.jobs.lock().expect("job lock").get(&id).map(|r| r.kind.clone()) else {
            return;
        };
        self.update(id, |r| {
            r.status = JobStatus::Running;
            r.log.push("running".into());
        });
        let ws = self.workspace();
        let result = match kind {
            JobKind::Annotate { strategy } => self.annotate_job(id, &ws, strategy),
            JobKind::Train { strategy, marker, hyperparams } => self.train_job(id, &ws, strategy, marker, &hyperparams),
        };
        self.update(id, |r| match result {
            Ok(()) => {
                r.status = JobStatus::Done;
                r.log.push("done".into());
            }
            Err(e) => {
                r.status = JobStatus::Failed;
                r.log.push(format!("failed: {e}"));
                r.error = Some(e.to_string());
            }
        });
    }

    fn annotate_job(&self, id: u64, ws: &Workspace, strategy: Strategy) -> Result<(), WorkspaceError> {
        let sets = ws.annotations(strategy)?;
        for set in &sets {
            self.log(id, format!("{}: {} annotations", set.corpus_id, set.len()));
        }
        self.remember_annotations(ws, strategy, sets);
        Ok(())
    }

    fn train_job(
        &self,
        id: u64,
        ws: &Workspace,
        strategy: Strategy,
        marker: MarkerStyle,
        hp: &Hyperparams,
    ) -> Result<(), WorkspaceError> {
        let dir = Self::models_dir(ws);
        let tmp = ws.state_dir().join(format!("models.tmp-{id}"));
        let _ = fs::remove_dir_all(&tmp);
        self.log(id, format!("training compass and {} slices", ws.corpora().len()));
        let models = match train_all_into(ws, strategy, marker, hp, &tmp) {
            Ok(models) => models,
            Err(e) => {
                let _ = fs::remove_dir_all(&tmp);
                return Err(e);
            }
        };
        if let Some(loss) = models.compass.losses.last() {
            self.log(id, format!("compass final epoch loss {loss:.4}"));
        }
        for slice in &models.slices {
            if let Some(loss) = slice.losses.last() {
                self.log(id, format!("slice {} final epoch loss {loss:.4}", slice.corpus_id));
            }
        }
        install(&tmp, &dir, id)?;
        self.model_generation.fetch_add(1, Ordering::SeqCst);
        Ok(())
    }

    fn apply_lexicon(&self, content: &str) -> Result<(), WorkspaceError> {
        let mut next = (*self.workspace()).clone();
        next.replace_lexicon(content)?;
        *self.workspace.write().expect("workspace lock") = Arc::new(next);
        Ok(())
    }
}

/// Moves a freshly trained model directory into place, replacing the old one.
fn install(tmp: &Path, dir: &Path, id: u64) -> Result<(), WorkspaceError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| WorkspaceError::Io { path, source }
    };
    let old = dir.with_file_name(format!("models.old-{id}"));
    if dir.exists() {
        fs::rename(dir, &old).map_err(io(dir))?;
    }
    fs::rename(tmp, dir).map_err(io(tmp))?;
    let _ = fs::remove_dir_all(&old);
    Ok(())
}

fn view(id: u64, record: &JobRecord) -> JobView {
    let skip = record.log.len().saturating_sub(LOG_TAIL);
    JobView {
        id,
        kind: record.kind.name(),
        params: record.kind.params(),
        status: record.status,
        error: record.error.clone(),
        log: record.log[skip..].to_vec(),
    }
}

fn worker(state: Weak<AppState>, commands: mpsc::Receiver<Command>) {
    for command in commands {
        let Some(state) = state.upgrade() else { return };
        match command {
            Command::Job(id) => state.run_job(id),
            Command::ReplaceLexicon(content, reply) => {
                let _ = reply.send(state.apply_lexicon(&content));
            }
        }
    }
}
