//! Whole-pipeline steps shared by the CLI and the service: marked training
//! streams, compass and slice training, and variation analysis over slices.

use std::path::Path;
use std::sync::Arc;

use crate::annotate::{marked_documents, AnnotationSet, MarkerStyle};
use crate::embed::{
    load_compass, load_slice, save_compass, save_slice, train_compass, train_slice, CompassModel, Embedding,
    Hyperparams, ModelMeta, Provenance, SliceModel, StaticEmbedding,
};
use crate::generalize::Strategy;
use crate::variation::{
    cocluster_stability, community_set, compare_across, label_graph, threshold_sweep, CommunitySet, SimilarityGraph,
    StabilityCell, SweepRow,
};
use crate::annotate::PresencePartition;
use crate::workspace::{Workspace, WorkspaceError};

pub fn marker_name(style: MarkerStyle) -> &'static str {
    match style {
        MarkerStyle::Literal => "literal",
        MarkerStyle::Sentinel => "sentinel",
    }
}

pub fn parse_marker(name: &str) -> MarkerStyle {
    if name == "sentinel" {
        MarkerStyle::Sentinel
    } else {
        MarkerStyle::Literal
    }
}

/// Marked token streams, one list of documents per corpus.
pub fn marked_corpora(
    ws: &Workspace,
    sets: &[AnnotationSet],
    style: MarkerStyle,
) -> Result<Vec<Vec<Vec<String>>>, WorkspaceError> {
    ws.corpora()
        .iter()
        .zip(sets)
        .map(|(corpus, set)| Ok(marked_documents(corpus, set, style)?))
        .collect()
}

#[derive(Debug, Clone)]
pub struct ModelSet {
    pub compass: Arc<CompassModel>,
    pub compass_meta: Option<ModelMeta>,
    pub slices: Vec<SliceModel>,
    pub slice_metas: Vec<ModelMeta>,
    pub strategy: Strategy,
    pub marker: MarkerStyle,
}

impl ModelSet {
    pub fn slice(&self, corpus_id: &str) -> Result<&SliceModel, WorkspaceError> {
        self.slices
            .iter()
            .find(|s| s.corpus_id == corpus_id)
            .ok_or_else(|| WorkspaceError::UnknownCorpus(corpus_id.to_string()))
    }
}

fn provenance(ws: &Workspace, digest: String, strategy: Strategy, style: MarkerStyle) -> Provenance {
    Provenance {
        corpus_digest: digest,
        lexicon_hash: ws.lexicon().version_hash().to_string(),
        strategy: strategy.to_string(),
        marker: marker_name(style).to_string(),
    }
}

/// Trains the compass on every corpus, then one slice per corpus.
pub fn train_all(
    ws: &Workspace,
    strategy: Strategy,
    style: MarkerStyle,
    hp: &Hyperparams,
) -> Result<ModelSet, WorkspaceError> {
    let sets = ws.annotations(strategy)?;
    let marked = marked_corpora(ws, &sets, style)?;
    let union: Vec<Vec<String>> = marked.iter().flatten().cloned().collect();
    let compass = Arc::new(train_compass(&union, hp)?);
    let slices = ws
        .corpora()
        .iter()
        .zip(&marked)
        .map(|(corpus, docs)| train_slice(&compass, &corpus.id, docs, hp))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ModelSet { compass, compass_meta: None, slices, slice_metas: Vec::new(), strategy, marker: style })
}

/// Trains only the compass and writes it to `dir`.
pub fn train_compass_into(
    ws: &Workspace,
    strategy: Strategy,
    style: MarkerStyle,
    hp: &Hyperparams,
    dir: &Path,
) -> Result<ModelMeta, WorkspaceError> {
    let sets = ws.annotations(strategy)?;
    let marked = marked_corpora(ws, &sets, style)?;
    let union: Vec<Vec<String>> = marked.into_iter().flatten().collect();
    let compass = train_compass(&union, hp)?;
    Ok(save_compass(dir, &compass, &provenance(ws, ws.union_digest(), strategy, style))?)
}

/// Trains one slice against the compass stored in `dir` and writes it there.
pub fn train_slice_into(ws: &Workspace, corpus_id: &str, hp: &Hyperparams, dir: &Path) -> Result<ModelMeta, WorkspaceError> {
    let (compass, meta) = load_compass_checked(ws, dir)?;
    let strategy: Strategy = meta.provenance.strategy.parse().map_err(|_| stale(dir, "unknown strategy in metadata"))?;
    let style = parse_marker(&meta.provenance.marker);
    let corpus = ws.corpus(corpus_id)?;
    let index = ws.corpora().iter().position(|c| c.id == corpus_id).expect("corpus exists");
    let sets = ws.annotations(strategy)?;
    let docs = marked_documents(corpus, &sets[index], style)?;
    let compass = Arc::new(compass);
    let slice = train_slice(&compass, corpus_id, &docs, hp)?;
    Ok(save_slice(dir, &slice, &provenance(ws, corpus.digest(), strategy, style))?)
}

/// Trains everything and writes it to `dir`.
pub fn train_all_into(
    ws: &Workspace,
    strategy: Strategy,
    style: MarkerStyle,
    hp: &Hyperparams,
    dir: &Path,
) -> Result<ModelSet, WorkspaceError> {
    let mut models = train_all(ws, strategy, style, hp)?;
    models.compass_meta = Some(save_compass(dir, &models.compass, &provenance(ws, ws.union_digest(), strategy, style))?);
    for (slice, corpus) in models.slices.iter().zip(ws.corpora()) {
        models.slice_metas.push(save_slice(dir, slice, &provenance(ws, corpus.digest(), strategy, style))?);
    }
    Ok(models)
}

fn stale(dir: &Path, reason: &str) -> WorkspaceError {
    WorkspaceError::StaleModels { dir: dir.to_path_buf(), reason: reason.to_string() }
}

fn load_compass_checked(ws: &Workspace, dir: &Path) -> Result<(CompassModel, ModelMeta), WorkspaceError> {
    if !dir.join("compass.meta.json").is_file() {
        return Err(WorkspaceError::NoModels(dir.to_path_buf()));
    }
    let (compass, meta) = load_compass(dir)?;
    if meta.provenance.lexicon_hash != ws.lexicon().version_hash() {
        return Err(stale(dir, "trained with a different lexicon"));
    }
    if meta.provenance.corpus_digest != ws.union_digest() {
        return Err(stale(dir, "trained on different corpora"));
    }
    Ok((compass, meta))
}

/// Loads the compass and every slice present in `dir`, checking that they were
/// trained on the current corpora and lexicon.
pub fn load_models(ws: &Workspace, dir: &Path) -> Result<ModelSet, WorkspaceError> {
    let (compass, meta) = load_compass_checked(ws, dir)?;
    let strategy: Strategy = meta.provenance.strategy.parse().map_err(|_| stale(dir, "unknown strategy in metadata"))?;
    let marker = parse_marker(&meta.provenance.marker);
    let compass = Arc::new(compass);
    let mut slices = Vec::new();
    let mut slice_metas = Vec::new();
    for corpus in ws.corpora() {
        if !dir.join(format!("slice-{}.meta.json", corpus.id)).is_file() {
            continue;
        }
        let (slice, slice_meta) = load_slice(dir, &compass, &corpus.id)?;
        if slice_meta.provenance.corpus_digest != corpus.digest() {
            return Err(stale(dir, &format!("slice {} trained on a different corpus", corpus.id)));
        }
        slices.push(slice);
        slice_metas.push(slice_meta);
    }
    Ok(ModelSet { compass, compass_meta: Some(meta), slices, slice_metas, strategy, marker })
}

/// Labels annotated at least once in `set`, sorted.
pub fn observed_labels(set: &AnnotationSet) -> Vec<String> {
    set.labels().into_iter().collect()
}

/// Vectors of `labels` taken from the marker tokens of `model`.
fn label_view(model: &impl Embedding, labels: &[String], style: MarkerStyle) -> StaticEmbedding {
    StaticEmbedding::from_rows(
        labels
            .iter()
            .filter_map(|l| model.vector(&style.marker(l)).ok().map(|v| (l.clone(), v.to_vec())))
            .collect(),
    )
}

fn missing_labels(model: &impl Embedding, labels: &[String], style: MarkerStyle) -> Vec<String> {
    labels.iter().filter(|l| !model.vocab().contains(&style.marker(l))).cloned().collect()
}

pub fn slice_graph(models: &ModelSet, set: &AnnotationSet, theta: f64) -> Result<SimilarityGraph, WorkspaceError> {
    let slice = models.slice(&set.corpus_id)?;
    let labels = observed_labels(set);
    let missing = missing_labels(slice, &labels, models.marker);
    if !missing.is_empty() {
        return Err(crate::variation::VariationError::MissingLabels(missing).into());
    }
    Ok(label_graph(&label_view(slice, &labels, models.marker), &set.corpus_id, &labels, theta)?)
}

#[derive(Debug, Clone)]
pub struct VariationOutput {
    pub graphs: Vec<SimilarityGraph>,
    pub communities: Vec<CommunitySet>,
    pub comparison: Option<(String, PresencePartition)>,
}

/// Graph and communities for every slice, plus the cross-corpus comparison
/// around `seed_label` when given.
pub fn variation(
    models: &ModelSet,
    sets: &[AnnotationSet],
    theta: f64,
    k: usize,
    seed_label: Option<&str>,
) -> Result<VariationOutput, WorkspaceError> {
    let mut graphs = Vec::new();
    let mut communities = Vec::new();
    for set in sets {
        let graph = slice_graph(models, set, theta)?;
        communities.push(community_set(&graph, k)?);
        graphs.push(graph);
    }
    let comparison = match seed_label {
        Some(seed) => Some((seed.to_string(), compare_across(&communities, seed)?)),
        None => None,
    };
    Ok(VariationOutput { graphs, communities, comparison })
}

pub fn sweep(models: &ModelSet, sets: &[AnnotationSet], grid: &[f64]) -> Result<Vec<(String, SweepRow)>, WorkspaceError> {
    let mut rows = Vec::new();
    for set in sets {
        let slice = models.slice(&set.corpus_id)?;
        let labels = observed_labels(set);
        let missing = missing_labels(slice, &labels, models.marker);
        if !missing.is_empty() {
            return Err(crate::variation::VariationError::MissingLabels(missing).into());
        }
        let view = label_view(slice, &labels, models.marker);
        for row in threshold_sweep(&view, &set.corpus_id, &labels, grid)? {
            rows.push((set.corpus_id.clone(), row));
        }
    }
    Ok(rows)
}

/// Retrains compass and slices once per seed and reports how often each
/// `(corpus, label, partner)` query lands in one community.
#[allow(clippy::too_many_arguments)]
pub fn stability(
    ws: &Workspace,
    strategy: Strategy,
    style: MarkerStyle,
    hp: &Hyperparams,
    seeds: &[u64],
    theta: f64,
    k: usize,
    queries: &[(&str, &str, &str)],
) -> Result<Vec<StabilityCell>, WorkspaceError> {
    let sets = ws.annotations(strategy)?;
    let mut runs = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let models = train_all(ws, strategy, style, &Hyperparams { seed, ..hp.clone() })?;
        runs.push(variation(&models, &sets, theta, k, None)?.communities);
    }
    Ok(cocluster_stability(&runs, queries))
}
