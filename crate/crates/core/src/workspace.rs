//! On-disk workspace: `corpora/<id>/*.txt`, an optional `lexicon.csv`, and a
//! `.valuescope/` directory with annotation caches and lexicon history.

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::annotate::{annotate_with, AnnotateError, AnnotationSet};
use crate::corpus::{load_corpora, Corpus, CorpusError};
use crate::embed::EmbedError;
use crate::generalize::Strategy;
use crate::lexicon::{compile_lexicon, default_lexicon_source, parse_lexicon, LexiconError, ValueLexicon};
use crate::variation::VariationError;

#[derive(Debug, thiserror::Error)]
pub enum WorkspaceError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Annotate(#[from] AnnotateError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Variation(#[from] VariationError),
    #[error("unknown corpus {0:?}")]
    UnknownCorpus(String),
    #[error("no trained models in {0}")]
    NoModels(PathBuf),
    #[error("models in {dir} are stale: {reason}")]
    StaleModels { dir: PathBuf, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl WorkspaceError {
    /// Input problems the caller can fix, as opposed to I/O or internal faults.
    pub fn is_validation(&self) -> bool {
        match self {
            WorkspaceError::Lexicon(_)
            | WorkspaceError::Variation(_)
            | WorkspaceError::UnknownCorpus(_)
            | WorkspaceError::Annotate(AnnotateError::Lexicon(_)) => true,
            WorkspaceError::Embed(e) => !matches!(e, EmbedError::Io { .. } | EmbedError::Format { .. }),
            _ => false,
        }
    }

    pub fn is_io(&self) -> bool {
        matches!(
            self,
            WorkspaceError::Io { .. }
                | WorkspaceError::Corpus(_)
                | WorkspaceError::NoModels(_)
                | WorkspaceError::Embed(EmbedError::Io { .. } | EmbedError::Format { .. })
        )
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> WorkspaceError + '_ {
    move |source| WorkspaceError::Io { path: path.to_path_buf(), source }
}

/// Writes through a temporary sibling and a rename, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, content: &str) -> Result<(), WorkspaceError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, content).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

#[derive(Debug, Clone)]
pub struct Workspace {
    root: PathBuf,
    corpora: Vec<Corpus>,
    lexicon: ValueLexicon,
    lexicon_source: String,
}

impl Workspace {
    pub fn open(root: &Path) -> Result<Workspace, WorkspaceError> {
        let corpora = load_corpora(&root.join("corpora"))?;
        let lexicon_path = root.join("lexicon.csv");
        let lexicon_source = if lexicon_path.is_file() {
            fs::read_to_string(&lexicon_path).map_err(io_err(&lexicon_path))?
        } else {
            default_lexicon_source().to_string()
        };
        let lexicon = parse_lexicon(&lexicon_source)?;
        Ok(Workspace { root: root.to_path_buf(), corpora, lexicon, lexicon_source })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn corpora(&self) -> &[Corpus] {
        &self.corpora
    }

    pub fn corpus(&self, id: &str) -> Result<&Corpus, WorkspaceError> {
        self.corpora
            .iter()
            .find(|c| c.id == id)
            .ok_or_else(|| WorkspaceError::UnknownCorpus(id.to_string()))
    }

    pub fn corpus_ids(&self) -> Vec<String> {
        self.corpora.iter().map(|c| c.id.clone()).collect()
    }

    pub fn lexicon(&self) -> &ValueLexicon {
        &self.lexicon
    }

    /// The lexicon file as written, comments included.
    pub fn lexicon_source(&self) -> &str {
        &self.lexicon_source
    }

    pub fn state_dir(&self) -> PathBuf {
        self.root.join(".valuescope")
    }

    /// Digest over every corpus digest, for models trained on the union.
    pub fn union_digest(&self) -> String {
        let mut hasher = Sha256::new();
        for corpus in &self.corpora {
            hasher.update(corpus.digest().as_bytes());
            hasher.update(b"\n");
        }
        hex::encode(hasher.finalize())
    }

    fn cache_path(&self, corpus: &Corpus, strategy: Strategy) -> PathBuf {
        let digest = corpus.digest();
        self.state_dir().join("annotations").join(format!(
            "{}-{}-{}-{}.json",
            corpus.id,
            &digest[..16],
            &self.lexicon.version_hash()[..16],
            strategy
        ))
    }

    /// Annotation sets for every corpus, read from the cache when an entry
    /// for the same corpus digest, lexicon hash and strategy exists.
    pub fn annotations(&self, strategy: Strategy) -> Result<Vec<AnnotationSet>, WorkspaceError> {
        let mut compiled = None;
        let mut out = Vec::with_capacity(self.corpora.len());
        for corpus in &self.corpora {
            let path = self.cache_path(corpus, strategy);
            let set = match self.read_cache(corpus, strategy) {
                Some(set) => set,
                None => {
                    if compiled.is_none() {
                        compiled = Some(compile_lexicon(&self.lexicon, strategy)?);
                    }
                    let set = annotate_with(corpus, compiled.as_ref().expect("compiled above"));
                    write_atomic(&path, &serde_json::to_string(&set).expect("annotation set serializes"))?;
                    set
                }
            };
            out.push(set);
        }
        Ok(out)
    }

    /// Annotation sets from the disk cache only; `None` when any corpus lacks
    /// a valid entry for the current lexicon and `strategy`.
    pub fn cached_annotations(&self, strategy: Strategy) -> Option<Vec<AnnotationSet>> {
        self.corpora
            .iter()
            .map(|corpus| self.read_cache(corpus, strategy))
            .collect()
    }

    fn read_cache(&self, corpus: &Corpus, strategy: Strategy) -> Option<AnnotationSet> {
        fs::read_to_string(self.cache_path(corpus, strategy))
            .ok()
            .and_then(|s| serde_json::from_str::<AnnotationSet>(&s).ok())
            .filter(|set| {
                set.corpus_digest == corpus.digest()
                    && set.lexicon_hash == self.lexicon.version_hash()
                    && set.strategy == strategy
            })
    }

    /// Validates `content`; on success snapshots the current lexicon into the
    /// history, writes the new file, swaps it in and drops caches built from
    /// other lexicon versions. On failure nothing changes.
    pub fn replace_lexicon(&mut self, content: &str) -> Result<&ValueLexicon, WorkspaceError> {
        let lexicon = parse_lexicon(content)?;
        let history = self.state_dir().join("lexicon-history");
        fs::create_dir_all(&history).map_err(io_err(&history))?;
        let n = fs::read_dir(&history).map_err(io_err(&history))?.count();
        let snapshot = history.join(format!("{:04}-{}.csv", n + 1, &self.lexicon.version_hash()[..16]));
        write_atomic(&snapshot, &self.lexicon_source)?;
        write_atomic(&self.root.join("lexicon.csv"), content)?;

        let keep = format!("-{}-", &lexicon.version_hash()[..16]);
        if let Ok(entries) = fs::read_dir(self.state_dir().join("annotations")) {
            for entry in entries.flatten() {
                if !entry.file_name().to_string_lossy().contains(&keep) {
                    let _ = fs::remove_file(entry.path());
                }
            }
        }
        self.lexicon = lexicon;
        self.lexicon_source = content.to_string();
        Ok(&self.lexicon)
    }

    /// Snapshots of earlier lexicon versions, oldest first.
    pub fn lexicon_history(&self) -> Vec<PathBuf> {
        let mut paths: Vec<PathBuf> = fs::read_dir(self.state_dir().join("lexicon-history"))
            .map(|entries| entries.flatten().map(|e| e.path()).collect())
            .unwrap_or_default();
        paths.sort();
        paths
    }
}
