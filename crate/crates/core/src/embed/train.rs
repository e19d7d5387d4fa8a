use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::matrix::{Matrix, SharedMatrix};
use super::model::{CompassModel, SliceModel};
use super::objective::{apply, compute, Example, Scratch};
use super::vocab::{build_vocab, Vocabulary};
use super::{Architecture, EmbedError, Hyperparams, TrainingMode};

/// RNG streams: 0 initializes the compass, compass documents start at 1,
/// slice documents start at `SLICE_STREAMS`.
const SLICE_STREAMS: u64 = 1 << 48;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Trains the shared model on every document of every corpus.
pub fn train_compass<S: AsRef<str>>(docs: &[Vec<S>], hp: &Hyperparams) -> Result<CompassModel, EmbedError> {
    hp.validate()?;
    let vocab = build_vocab(docs, hp.min_count)?;
    let encoded: Vec<Vec<u32>> = docs.iter().map(|d| vocab.encode(d)).collect();
    check_size(&encoded, hp)?;

    let (v, d) = (vocab.len(), hp.dimension);
    let mut rng = rng_for(hp.seed, 0);
    let bound = 0.5 / d as f64;
    let target = Matrix::from_vec(v, d, (0..v * d).map(|_| rng.random_range(-bound..bound)).collect());
    let context = Matrix::zeros(v, d);

    let u = SharedMatrix::from_matrix(&target);
    let c = SharedMatrix::from_matrix(&context);
    let losses = Run::new(&vocab, hp, &encoded, hp.epochs_compass, 1).execute(&u, &c, true);
    Ok(CompassModel {
        vocab,
        target: u.into_matrix(),
        context: c.into_matrix(),
        hyperparams: hp.clone(),
        losses,
    })
}

/// Retrains a copy of the compass target matrix on one corpus with the
/// compass context matrix frozen. Tokens outside the compass vocabulary
/// (below `min_count` in the union) are skipped.
pub fn train_slice<S: AsRef<str>>(
    compass: &Arc<CompassModel>,
    corpus_id: &str,
    docs: &[Vec<S>],
    hp: &Hyperparams,
) -> Result<SliceModel, EmbedError> {
    hp.validate()?;
    if hp.dimension != compass.target.cols() {
        return Err(EmbedError::InvalidHyperparams(format!(
            "slice dimension {} differs from compass dimension {}",
            hp.dimension,
            compass.target.cols()
        )));
    }
    let encoded: Vec<Vec<u32>> = docs.iter().map(|d| compass.vocab.encode(d)).collect();
    check_size(&encoded, hp)?;

    let u = SharedMatrix::from_matrix(&compass.target);
    let c = SharedMatrix::from_matrix(&compass.context);
    let losses = Run::new(&compass.vocab, hp, &encoded, hp.epochs_slice, SLICE_STREAMS).execute(&u, &c, false);
    debug_assert!(c.into_matrix() == compass.context);
    Ok(SliceModel {
        corpus_id: corpus_id.to_string(),
        target: u.into_matrix(),
        compass: Arc::clone(compass),
        hyperparams: hp.clone(),
        losses,
    })
}

fn check_size(encoded: &[Vec<u32>], hp: &Hyperparams) -> Result<(), EmbedError> {
    let tokens: usize = encoded.iter().map(Vec::len).sum();
    if tokens < hp.window + 1 {
        return Err(EmbedError::Degenerate { tokens, needed: hp.window + 1 });
    }
    Ok(())
}

struct Run<'a> {
    vocab: &'a Vocabulary,
    hp: &'a Hyperparams,
    docs: &'a [Vec<u32>],
    epochs: usize,
    stream_base: u64,
    keep: Vec<f64>,
    /// Token offset of each document within one epoch.
    offsets: Vec<u64>,
    total: u64,
}

impl<'a> Run<'a> {
    fn new(vocab: &'a Vocabulary, hp: &'a Hyperparams, docs: &'a [Vec<u32>], epochs: usize, stream_base: u64) -> Self {
        let mut counts = vec![0u64; vocab.len()];
        let mut offsets = Vec::with_capacity(docs.len());
        let mut total = 0u64;
        for doc in docs {
            offsets.push(total);
            total += doc.len() as u64;
            for &id in doc {
                counts[id as usize] += 1;
            }
        }
        // word2vec's keep probability: (sqrt(f / tN) + 1) * tN / f.
        let threshold = hp.subsample * total as f64;
        let keep = counts
            .iter()
            .map(|&f| {
                if threshold <= 0.0 || f == 0 {
                    1.0
                } else {
                    let f = f as f64;
                    ((f / threshold).sqrt() + 1.0) * threshold / f
                }
            })
            .collect();
        Run { vocab, hp, docs, epochs, stream_base, keep, offsets, total }
    }

    /// Returns the mean example loss of each epoch.
    fn execute(&self, u: &SharedMatrix, c: &SharedMatrix, update_context: bool) -> Vec<f64> {
        let dim = self.hp.dimension;
        (0..self.epochs)
            .map(|epoch| {
                let (loss, n) = match self.hp.mode {
                    TrainingMode::Deterministic => {
                        let mut scratch = Scratch::new(dim);
                        (0..self.docs.len()).fold((0.0, 0u64), |acc, d| {
                            let (l, n) = self.document(epoch, d, u, c, update_context, &mut scratch);
                            (acc.0 + l, acc.1 + n)
                        })
                    }
                    TrainingMode::Fast => (0..self.docs.len())
                        .into_par_iter()
                        .map_init(
                            || Scratch::new(dim),
                            |scratch, d| self.document(epoch, d, u, c, update_context, scratch),
                        )
                        .reduce(|| (0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1)),
                };
                if n == 0 {
                    0.0
                } else {
                    loss / n as f64
                }
            })
            .collect()
    }

    fn document(
        &self,
        epoch: usize,
        d: usize,
        u: &SharedMatrix,
        c: &SharedMatrix,
        update_context: bool,
        scratch: &mut Scratch,
    ) -> (f64, u64) {
        let hp = self.hp;
        let stream = self.stream_base + (epoch * self.docs.len() + d) as u64;
        let mut rng = rng_for(hp.seed, stream);

        let mut kept: Vec<(u32, u64)> = Vec::with_capacity(self.docs[d].len());
        for (i, &id) in self.docs[d].iter().enumerate() {
            if self.keep[id as usize] >= rng.random::<f64>() {
                kept.push((id, i as u64));
            }
        }

        let schedule_len = (self.epochs as u64 * self.total) as f64;
        let base = epoch as u64 * self.total + self.offsets[d];
        let mut inputs: Vec<u32> = Vec::with_capacity(2 * hp.window);
        let mut negatives: Vec<u32> = Vec::with_capacity(hp.negative);
        let (mut loss, mut examples) = (0.0, 0u64);

        for i in 0..kept.len() {
            let (center, position) = kept[i];
            let progress = (base + position) as f64 / schedule_len;
            let lr = hp.learning_rate * (1.0 - progress).max(1e-4);
            let reach = hp.window - rng.random_range(0..hp.window);
            let lo = i.saturating_sub(reach);
            let hi = (i + reach + 1).min(kept.len());
            inputs.clear();
            inputs.extend((lo..hi).filter(|&j| j != i).map(|j| kept[j].0));
            if inputs.is_empty() {
                continue;
            }
            match hp.architecture {
                Architecture::Cbow => {
                    self.draw_negatives(&mut rng, center, &mut negatives);
                    let example = Example { inputs: &inputs, positive: center, negatives: &negatives };
                    loss += compute(u, c, &example, scratch);
                    apply(u, c, update_context, &example, lr, scratch);
                    examples += 1;
                }
                Architecture::SkipGram => {
                    for &word in &inputs {
                        self.draw_negatives(&mut rng, word, &mut negatives);
                        let center = [center];
                        let example = Example { inputs: &center, positive: word, negatives: &negatives };
                        loss += compute(u, c, &example, scratch);
                        apply(u, c, update_context, &example, lr, scratch);
                        examples += 1;
                    }
                }
            }
        }
        (loss, examples)
    }

    /// Draws `negative` ids, discarding any that equal the positive.
    fn draw_negatives(&self, rng: &mut ChaCha8Rng, positive: u32, out: &mut Vec<u32>) {
        out.clear();
        for _ in 0..self.hp.negative {
            let id = self.vocab.sample(rng);
            if id != positive {
                out.push(id);
            }
        }
    }
}
