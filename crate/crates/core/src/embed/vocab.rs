use std::collections::HashMap;

use rand::Rng;

use super::EmbedError;

/// Token index with frequency counts, ordered by count descending then token.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
    /// Running sums of `count^0.75`.
    cumulative: Vec<f64>,
}

impl Vocabulary {
    /// Builds from explicit `(token, count)` pairs; order is normalized.
    pub fn from_counts(mut entries: Vec<(String, u64)>) -> Vocabulary {
        entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let mut total = 0.0;
        let cumulative = entries
            .iter()
            .map(|(_, c)| {
                total += (*c as f64).powf(0.75);
                total
            })
            .collect();
        let index = entries.iter().enumerate().map(|(i, (t, _))| (t.clone(), i as u32)).collect();
        let (tokens, counts) = entries.into_iter().unzip();
        Vocabulary { tokens, counts, index, cumulative }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: u32) -> &str {
        &self.tokens[id as usize]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Unnormalized negative-sampling weight, `count^0.75`.
    pub fn sampling_weight(&self, id: u32) -> f64 {
        (self.counts[id as usize] as f64).powf(0.75)
    }

    /// Draws one id from the `count^0.75` distribution.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> u32 {
        let total = *self.cumulative.last().expect("non-empty vocabulary");
        let x = rng.random::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= x);
        i.min(self.len() - 1) as u32
    }

    /// Maps a token stream to ids, dropping tokens outside the vocabulary.
    pub fn encode<S: AsRef<str>>(&self, doc: &[S]) -> Vec<u32> {
        doc.iter().filter_map(|t| self.id(t.as_ref())).collect()
    }
}

/// Counts every token of `docs` and keeps those seen at least `min_count` times.
pub fn build_vocab<S: AsRef<str>>(docs: &[Vec<S>], min_count: usize) -> Result<Vocabulary, EmbedError> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for token in docs.iter().flatten() {
        *counts.entry(token.as_ref()).or_default() += 1;
    }
    if counts.is_empty() {
        return Err(EmbedError::EmptyStream);
    }
    let entries: Vec<(String, u64)> = counts
        .into_iter()
        .filter(|(_, c)| *c >= min_count as u64)
        .map(|(t, c)| (t.to_string(), c))
        .collect();
    if entries.is_empty() {
        return Err(EmbedError::EmptyVocabulary(min_count));
    }
    Ok(Vocabulary::from_counts(entries))
}
