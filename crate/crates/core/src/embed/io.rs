//! Text model files: a `V d` header line, then `token v1 .. vd` per row, values
//! written as 32-bit decimals with a '.' separator. A JSON metadata file sits
//! next to each model.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::matrix::Matrix;
use super::model::{CompassModel, SliceModel, StaticEmbedding};
use super::vocab::Vocabulary;
use super::{EmbedError, Hyperparams, TrainingMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Compass,
    Slice,
}

/// Where the training tokens came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub corpus_digest: String,
    pub lexicon_hash: String,
    pub strategy: String,
    /// `literal` or `sentinel`: how group labels appear in the vocabulary.
    #[serde(default = "literal")]
    pub marker: String,
}

fn literal() -> String {
    "literal".to_string()
}

impl Default for Provenance {
    fn default() -> Self {
        Provenance { corpus_digest: String::new(), lexicon_hash: String::new(), strategy: String::new(), marker: literal() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub role: Role,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub corpus_id: Option<String>,
    pub hyperparams: Hyperparams,
    pub seed: u64,
    pub mode: TrainingMode,
    pub reproducible: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
    pub vocab_size: usize,
    pub dimension: usize,
    #[serde(flatten)]
    pub provenance: Provenance,
    pub target_digest: String,
    pub frozen_context_digest: String,
}

impl ModelMeta {
    fn new(role: Role, corpus_id: Option<String>, hp: &Hyperparams, target: &Matrix, context: &Matrix, provenance: &Provenance) -> Self {
        ModelMeta {
            role,
            corpus_id,
            hyperparams: hp.clone(),
            seed: hp.seed,
            mode: hp.mode,
            reproducible: hp.mode.reproducible(),
            note: (!hp.mode.reproducible()).then(|| "fast mode: parallel unsynchronized updates, not reproducible".to_string()),
            vocab_size: target.rows(),
            dimension: target.cols(),
            provenance: provenance.clone(),
            target_digest: target.digest(),
            frozen_context_digest: context.digest(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metadata serializes") + "\n"
    }

    /// SHA-256 of the serialized metadata; identifies a trained model.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> EmbedError + '_ {
    move |source| EmbedError::Io { path: path.display().to_string(), source }
}

fn format_err(path: &Path, reason: impl Into<String>) -> EmbedError {
    EmbedError::Format { path: path.display().to_string(), reason: reason.into() }
}

pub fn format_vectors(tokens: &[String], matrix: &Matrix) -> String {
    let mut out = format!("{} {}\n", matrix.rows(), matrix.cols());
    for (i, token) in tokens.iter().enumerate() {
        out.push_str(token);
        for v in matrix.row(i) {
            write!(out, " {}", *v as f32).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_vectors(path: &Path, tokens: &[String], matrix: &Matrix) -> Result<(), EmbedError> {
    fs::write(path, format_vectors(tokens, matrix)).map_err(io_err(path))
}

/// Rows in file order.
fn parse_vectors(path: &Path) -> Result<Vec<(String, Vec<f64>)>, EmbedError> {
    let content = fs::read_to_string(path).map_err(io_err(path))?;
    let mut lines = content.lines();
    let header = lines.next().ok_or_else(|| format_err(path, "empty file"))?;
    let dims: Vec<usize> = header
        .split(' ')
        .map(str::parse)
        .collect::<Result<_, _>>()
        .map_err(|_| format_err(path, format!("bad header {header:?}")))?;
    let [rows, cols] = dims[..] else {
        return Err(format_err(path, format!("bad header {header:?}")));
    };
    let mut out = Vec::with_capacity(rows);
    for (n, line) in lines.enumerate() {
        let mut parts = line.split(' ');
        let token = parts.next().unwrap_or_default().to_string();
        let values: Vec<f64> = parts
            .map(|p| p.parse::<f32>().map(f64::from))
            .collect::<Result<_, _>>()
            .map_err(|_| format_err(path, format!("line {}: bad number", n + 2)))?;
        if token.is_empty() || values.len() != cols {
            return Err(format_err(path, format!("line {}: expected a token and {cols} values", n + 2)));
        }
        out.push((token, values));
    }
    if out.len() != rows {
        return Err(format_err(path, format!("header says {rows} rows, found {}", out.len())));
    }
    Ok(out)
}

/// Loads a vector file without counts or metadata.
pub fn read_vectors(path: &Path) -> Result<StaticEmbedding, EmbedError> {
    Ok(StaticEmbedding::from_rows(parse_vectors(path)?))
}

fn matrix_in_vocab_order(path: &Path, vocab: &Vocabulary, rows: Vec<(String, Vec<f64>)>) -> Result<Matrix, EmbedError> {
    if rows.len() != vocab.len() {
        return Err(format_err(path, "row count differs from vocabulary"));
    }
    let cols = rows.first().map_or(0, |r| r.1.len());
    let mut matrix = Matrix::zeros(rows.len(), cols);
    for (i, (token, values)) in rows.into_iter().enumerate() {
        if vocab.token(i as u32) != token {
            return Err(format_err(path, format!("row {} is {token:?}, vocabulary has {:?}", i + 1, vocab.token(i as u32))));
        }
        matrix.row_mut(i).copy_from_slice(&values);
    }
    Ok(matrix)
}

pub fn compass_paths(dir: &Path) -> [PathBuf; 4] {
    [
        dir.join("compass.vec"),
        dir.join("compass.context.vec"),
        dir.join("compass.vocab.tsv"),
        dir.join("compass.meta.json"),
    ]
}

pub fn slice_paths(dir: &Path, corpus_id: &str) -> [PathBuf; 2] {
    [dir.join(format!("slice-{corpus_id}.vec")), dir.join(format!("slice-{corpus_id}.meta.json"))]
}

/// Writes the compass into `dir` and returns its metadata.
pub fn save_compass(dir: &Path, model: &CompassModel, provenance: &Provenance) -> Result<ModelMeta, EmbedError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let [target, context, vocab, meta_path] = compass_paths(dir);
    let tokens = model.vocab.tokens();
    write_vectors(&target, tokens, &model.target)?;
    write_vectors(&context, tokens, &model.context)?;
    let mut counts = String::new();
    for (i, token) in tokens.iter().enumerate() {
        writeln!(counts, "{token}\t{}", model.vocab.count(i as u32)).unwrap();
    }
    fs::write(&vocab, counts).map_err(io_err(&vocab))?;
    let meta = ModelMeta::new(Role::Compass, None, &model.hyperparams, &model.target, &model.context, provenance);
    fs::write(&meta_path, meta.to_json()).map_err(io_err(&meta_path))?;
    Ok(meta)
}

pub fn save_slice(dir: &Path, model: &SliceModel, provenance: &Provenance) -> Result<ModelMeta, EmbedError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let [target, meta_path] = slice_paths(dir, &model.corpus_id);
    write_vectors(&target, model.compass.vocab.tokens(), &model.target)?;
    let meta = ModelMeta::new(
        Role::Slice,
        Some(model.corpus_id.clone()),
        &model.hyperparams,
        &model.target,
        model.context(),
        provenance,
    );
    fs::write(&meta_path, meta.to_json()).map_err(io_err(&meta_path))?;
    Ok(meta)
}

fn read_meta(path: &Path) -> Result<ModelMeta, EmbedError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| format_err(path, e.to_string()))
}

pub fn load_compass(dir: &Path) -> Result<(CompassModel, ModelMeta), EmbedError> {
    let [target_path, context_path, vocab_path, meta_path] = compass_paths(dir);
    let meta = read_meta(&meta_path)?;
    let counts = fs::read_to_string(&vocab_path).map_err(io_err(&vocab_path))?;
    let mut entries = Vec::new();
    for (n, line) in counts.lines().enumerate() {
        let parsed = line.split_once('\t').and_then(|(t, c)| Some((t.to_string(), c.parse::<u64>().ok()?)));
        entries.push(parsed.ok_or_else(|| format_err(&vocab_path, format!("line {}", n + 1)))?);
    }
    let vocab = Vocabulary::from_counts(entries);
    let target = matrix_in_vocab_order(&target_path, &vocab, parse_vectors(&target_path)?)?;
    let context = matrix_in_vocab_order(&context_path, &vocab, parse_vectors(&context_path)?)?;
    if context.digest() != meta.frozen_context_digest {
        return Err(format_err(&context_path, "context matrix does not match its metadata digest"));
    }
    let model = CompassModel { vocab, target, context, hyperparams: meta.hyperparams.clone(), losses: Vec::new() };
    Ok((model, meta))
}

pub fn load_slice(dir: &Path, compass: &Arc<CompassModel>, corpus_id: &str) -> Result<(SliceModel, ModelMeta), EmbedError> {
    let [target_path, meta_path] = slice_paths(dir, corpus_id);
    let meta = read_meta(&meta_path)?;
    if meta.frozen_context_digest != compass.context.digest() {
        return Err(format_err(&meta_path, "slice was trained against a different compass"));
    }
    let target = matrix_in_vocab_order(&target_path, &compass.vocab, parse_vectors(&target_path)?)?;
    let model = SliceModel {
        corpus_id: corpus_id.to_string(),
        target,
        compass: Arc::clone(compass),
        hyperparams: meta.hyperparams.clone(),
        losses: Vec::new(),
    };
    Ok((model, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vector_text_format() {
        let m = Matrix::from_vec(2, 2, vec![0.5, -1.0, 1e-3, 0.1]);
        let text = format_vectors(&["a".into(), "b".into()], &m);
        assert_eq!(text, "2 2\na 0.5 -1\nb 0.001 0.1\n");
    }

    #[test]
    fn read_back_and_reject_malformed() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.vec");
        let m = Matrix::from_vec(2, 3, vec![0.25, 1.0 / 3.0, -2.0, 7.0, 0.0, 1e-8]);
        write_vectors(&path, &["x".into(), "y".into()], &m).unwrap();
        let back = read_vectors(&path).unwrap();
        assert_eq!(back.vectors.digest(), m.digest());

        fs::write(&path, "2 2\na 1 2\n").unwrap();
        assert!(read_vectors(&path).unwrap_err().to_string().contains("found 1"));
        fs::write(&path, "1 2\na 1 x\n").unwrap();
        assert!(read_vectors(&path).unwrap_err().to_string().contains("line 2"));
    }
}
