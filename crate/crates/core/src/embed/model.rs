use std::sync::Arc;

use super::matrix::{dot, norm, Matrix};
use super::vocab::Vocabulary;
use super::{EmbedError, Hyperparams};

#[derive(Debug, Clone)]
pub struct CompassModel {
    pub vocab: Vocabulary,
    pub target: Matrix,
    pub context: Matrix,
    pub hyperparams: Hyperparams,
    /// Mean example loss per epoch.
    pub losses: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SliceModel {
    pub corpus_id: String,
    pub target: Matrix,
    pub compass: Arc<CompassModel>,
    pub hyperparams: Hyperparams,
    pub losses: Vec<f64>,
}

impl SliceModel {
    /// The frozen context matrix, shared with the compass.
    pub fn context(&self) -> &Matrix {
        &self.compass.context
    }
}

/// Anything with a vocabulary and one target vector per token.
pub trait Embedding {
    fn vocab(&self) -> &Vocabulary;
    fn vectors(&self) -> &Matrix;

    fn vector(&self, token: &str) -> Result<&[f64], EmbedError> {
        let id = self.vocab().id(token).ok_or_else(|| EmbedError::OutOfVocabulary(token.to_string()))?;
        Ok(self.vectors().row(id as usize))
    }
}

impl Embedding for CompassModel {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn vectors(&self) -> &Matrix {
        &self.target
    }
}

impl Embedding for SliceModel {
    fn vocab(&self) -> &Vocabulary {
        &self.compass.vocab
    }

    fn vectors(&self) -> &Matrix {
        &self.target
    }
}

/// Plain vectors, e.g. loaded from a file or set by hand.
#[derive(Debug, Clone)]
pub struct StaticEmbedding {
    pub vocab: Vocabulary,
    pub vectors: Matrix,
}

impl Embedding for StaticEmbedding {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn vectors(&self) -> &Matrix {
        &self.vectors
    }
}

impl StaticEmbedding {
    /// Every token gets count 1.
    pub fn from_rows(rows: Vec<(String, Vec<f64>)>) -> StaticEmbedding {
        let dim = rows.first().map_or(0, |r| r.1.len());
        let n = rows.len();
        // Equal counts order the vocabulary by token; rows follow their ids.
        let vocab = Vocabulary::from_counts(rows.iter().map(|(t, _)| (t.clone(), 1)).collect());
        let mut vectors = Matrix::zeros(n, dim);
        for (token, values) in rows {
            let id = vocab.id(&token).expect("token just inserted") as usize;
            vectors.row_mut(id).copy_from_slice(&values);
        }
        StaticEmbedding { vocab, vectors }
    }
}

/// Cosine of two raw vectors; 0 when either is zero.
pub fn cosine_vectors(a: &[f64], b: &[f64]) -> f64 {
    let denominator = norm(a) * norm(b);
    if denominator == 0.0 {
        0.0
    } else {
        (dot(a, b) / denominator).clamp(-1.0, 1.0)
    }
}

/// Cosine of two target vectors; 0 when either vector is zero.
pub fn cosine(model: &impl Embedding, a: &str, b: &str) -> Result<f64, EmbedError> {
    Ok(cosine_vectors(model.vector(a)?, model.vector(b)?))
}

/// The `k` most similar tokens to `token`, most similar first. Ties go to the
/// lower vocabulary index; the query itself is never returned.
pub fn nearest(model: &impl Embedding, token: &str, k: usize) -> Result<Vec<(String, f64)>, EmbedError> {
    if k == 0 {
        return Err(EmbedError::ZeroK);
    }
    let query_id = model.vocab().id(token).ok_or_else(|| EmbedError::OutOfVocabulary(token.to_string()))?;
    let vectors = model.vectors();
    let query = vectors.row(query_id as usize);
    let mut scored: Vec<(usize, f64)> = (0..vectors.rows())
        .filter(|&i| i != query_id as usize)
        .map(|i| (i, cosine_vectors(query, vectors.row(i))))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scored.truncate(k);
    Ok(scored
        .into_iter()
        .map(|(i, s)| (model.vocab().token(i as u32).to_string(), s))
        .collect())
}
