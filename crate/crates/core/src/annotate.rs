//! Lexicon matching over corpora, marker insertion for embedding training,
//! count tables and cross-corpus presence partitions.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Text};
use crate::generalize::Strategy;
use crate::lexicon::{compile_lexicon, CompiledLexicon, LexiconError, SchwartzValue, ValueLexicon};

#[derive(Debug, thiserror::Error)]
pub enum AnnotateError {
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error("annotation index {index} out of range for text {text_id:?} with {len} tokens")]
    IndexOutOfRange { text_id: String, index: usize, len: usize },
    #[error("annotation sets disagree on {0}")]
    Mismatch(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Annotation {
    pub text_id: String,
    pub token_index: usize,
    pub surface: String,
    pub stem: String,
    pub label: String,
    pub value: SchwartzValue,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationSet {
    pub corpus_id: String,
    pub strategy: Strategy,
    pub lexicon_hash: String,
    pub corpus_digest: String,
    /// Every text of the corpus, annotated or not, in corpus order.
    pub text_ids: Vec<String>,
    /// Sorted by (text order, token index).
    pub annotations: Vec<Annotation>,
}

impl AnnotationSet {
    pub fn len(&self) -> usize {
        self.annotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.annotations.is_empty()
    }

    pub fn for_text<'a>(&'a self, text_id: &'a str) -> impl Iterator<Item = &'a Annotation> + 'a {
        self.annotations.iter().filter(move |a| a.text_id == text_id)
    }

    pub fn stems(&self) -> BTreeSet<String> {
        self.annotations.iter().map(|a| a.stem.clone()).collect()
    }

    pub fn labels(&self) -> BTreeSet<String> {
        self.annotations.iter().map(|a| a.label.clone()).collect()
    }

    /// One JSON object per line with text_id, token_index, surface, stem,
    /// label, value, start and end.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for annotation in &self.annotations {
            out.push_str(&serde_json::to_string(annotation).expect("annotation serializes"));
            out.push('\n');
        }
        out
    }
}

pub fn annotate_text(text: &Text, compiled: &CompiledLexicon) -> Vec<Annotation> {
    let strategy = compiled.strategy();
    let mut keys: HashMap<&str, String> = HashMap::new();
    let mut out = Vec::new();
    for (index, token) in text.tokens.iter().enumerate() {
        let key = keys
            .entry(token.text.as_str())
            .or_insert_with(|| strategy.generalize(&token.text));
        if let Some(group) = compiled.lookup(key) {
            out.push(Annotation {
                text_id: text.id.clone(),
                token_index: index,
                surface: token.text.clone(),
                stem: key.clone(),
                label: group.label.clone(),
                value: group.value,
                start: token.start,
                end: token.end,
            });
        }
    }
    out
}

pub fn annotate_with(corpus: &Corpus, compiled: &CompiledLexicon) -> AnnotationSet {
    let per_text: Vec<Vec<Annotation>> = corpus.texts.par_iter().map(|t| annotate_text(t, compiled)).collect();
    AnnotationSet {
        corpus_id: corpus.id.clone(),
        strategy: compiled.strategy(),
        lexicon_hash: compiled.lexicon_hash().to_string(),
        corpus_digest: corpus.digest(),
        text_ids: corpus.texts.iter().map(|t| t.id.clone()).collect(),
        annotations: per_text.into_iter().flatten().collect(),
    }
}

pub fn annotate_corpus(
    corpus: &Corpus,
    lexicon: &ValueLexicon,
    strategy: Strategy,
) -> Result<AnnotationSet, AnnotateError> {
    let compiled = compile_lexicon(lexicon, strategy)?;
    Ok(annotate_with(corpus, &compiled))
}

/// How a group label is written into the training stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkerStyle {
    /// The label itself, e.g. `law`.
    #[default]
    Literal,
    /// The label wrapped as `⟨law⟩`, distinct from natural occurrences of the word.
    Sentinel,
}

impl MarkerStyle {
    pub fn marker(self, label: &str) -> String {
        match self {
            MarkerStyle::Literal => label.to_string(),
            MarkerStyle::Sentinel => format!("\u{27e8}{label}\u{27e9}"),
        }
    }
}

/// Surrounds every annotated token with its group's marker.
pub fn mark_tokens<'a, S: AsRef<str>>(
    tokens: &[S],
    annotations: impl IntoIterator<Item = &'a Annotation>,
    style: MarkerStyle,
) -> Result<Vec<String>, AnnotateError> {
    let mut labels: BTreeMap<usize, &str> = BTreeMap::new();
    for annotation in annotations {
        if annotation.token_index >= tokens.len() {
            return Err(AnnotateError::IndexOutOfRange {
                text_id: annotation.text_id.clone(),
                index: annotation.token_index,
                len: tokens.len(),
            });
        }
        labels.insert(annotation.token_index, &annotation.label);
    }
    let mut out = Vec::with_capacity(tokens.len() + 2 * labels.len());
    for (i, token) in tokens.iter().enumerate() {
        match labels.get(&i) {
            Some(label) => {
                let marker = style.marker(label);
                out.push(marker.clone());
                out.push(token.as_ref().to_string());
                out.push(marker);
            }
            None => out.push(token.as_ref().to_string()),
        }
    }
    Ok(out)
}

/// One marked token stream per text of `corpus`.
pub fn marked_documents(
    corpus: &Corpus,
    set: &AnnotationSet,
    style: MarkerStyle,
) -> Result<Vec<Vec<String>>, AnnotateError> {
    let mut by_text: HashMap<&str, Vec<&Annotation>> = HashMap::new();
    for annotation in &set.annotations {
        by_text.entry(annotation.text_id.as_str()).or_default().push(annotation);
    }
    corpus
        .texts
        .iter()
        .map(|text| {
            let tokens: Vec<&str> = text.token_texts().collect();
            let annotations = by_text.get(text.id.as_str()).map(Vec::as_slice).unwrap_or_default();
            mark_tokens(&tokens, annotations.iter().copied(), style)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupBy {
    Label,
    Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Per {
    Text,
    Corpus,
}

impl std::str::FromStr for GroupBy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "label" => Ok(GroupBy::Label),
            "value" => Ok(GroupBy::Value),
            other => Err(format!("group_by must be label|value, got {other:?}")),
        }
    }
}

impl std::str::FromStr for Per {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "text" => Ok(Per::Text),
            "corpus" => Ok(Per::Corpus),
            other => Err(format!("per must be text|corpus, got {other:?}")),
        }
    }
}

/// Dense count grid. Text columns are named `<corpus>/<text id>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    pub group_by: GroupBy,
    pub per: Per,
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl CountTable {
    pub fn get(&self, row: &str, column: &str) -> Option<u64> {
        let r = self.rows.iter().position(|x| x == row)?;
        let c = self.columns.iter().position(|x| x == column)?;
        Some(self.counts[r][c])
    }

    pub fn row_total(&self, row: &str) -> Option<u64> {
        let r = self.rows.iter().position(|x| x == row)?;
        Some(self.counts[r].iter().sum())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

pub fn token_counts(sets: &[AnnotationSet], lexicon: &ValueLexicon, group_by: GroupBy, per: Per) -> CountTable {
    let rows: Vec<String> = match group_by {
        GroupBy::Label => lexicon.labels().map(str::to_string).collect(),
        GroupBy::Value => SchwartzValue::ALL.iter().map(|v| v.name().to_string()).collect(),
    };
    let columns: Vec<String> = match per {
        Per::Corpus => sets.iter().map(|s| s.corpus_id.clone()).collect(),
        Per::Text => sets
            .iter()
            .flat_map(|s| s.text_ids.iter().map(move |t| format!("{}/{}", s.corpus_id, t)))
            .collect(),
    };
    let row_index: HashMap<&str, usize> = rows.iter().enumerate().map(|(i, r)| (r.as_str(), i)).collect();
    let column_index: HashMap<&str, usize> = columns.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    let mut counts = vec![vec![0u64; columns.len()]; rows.len()];

    for set in sets {
        for annotation in &set.annotations {
            let row_key = match group_by {
                GroupBy::Label => annotation.label.as_str(),
                GroupBy::Value => annotation.value.name(),
            };
            let column_key = match per {
                Per::Corpus => set.corpus_id.clone(),
                Per::Text => format!("{}/{}", set.corpus_id, annotation.text_id),
            };
            if let (Some(&r), Some(&c)) = (row_index.get(row_key), column_index.get(column_key.as_str())) {
                counts[r][c] += 1;
            }
        }
    }
    CountTable { group_by, per, rows, columns, counts }
}

/// Members of N sets split by exact membership pattern. Region keys are
/// bitmasks where bit `i` means "present in set `i`".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PresencePartition {
    pub sets: Vec<String>,
    pub regions: BTreeMap<u32, Vec<String>>,
}

impl PresencePartition {
    pub fn build(names: Vec<String>, members: &[BTreeSet<String>]) -> PresencePartition {
        assert!(names.len() == members.len() && names.len() < 32);
        let mut masks: BTreeMap<&str, u32> = BTreeMap::new();
        for (i, set) in members.iter().enumerate() {
            for item in set {
                *masks.entry(item).or_default() |= 1 << i;
            }
        }
        let mut regions: BTreeMap<u32, Vec<String>> = BTreeMap::new();
        for (item, mask) in masks {
            regions.entry(mask).or_default().push(item.to_string());
        }
        PresencePartition { sets: names, regions }
    }

    pub fn region(&self, mask: u32) -> &[String] {
        self.regions.get(&mask).map(Vec::as_slice).unwrap_or_default()
    }

    /// Items present in set `name` and nowhere else.
    pub fn only_in(&self, name: &str) -> &[String] {
        match self.sets.iter().position(|s| s == name) {
            Some(i) => self.region(1 << i),
            None => &[],
        }
    }

    /// Items present in every set.
    pub fn shared_by_all(&self) -> &[String] {
        self.region((1u32 << self.sets.len()) - 1)
    }
}

/// Partitions observed stems by the exact set of corpora they occur in.
pub fn stem_presence(sets: &[AnnotationSet]) -> Result<PresencePartition, AnnotateError> {
    if let Some(first) = sets.first() {
        for set in &sets[1..] {
            if set.lexicon_hash != first.lexicon_hash {
                return Err(AnnotateError::Mismatch(format!(
                    "lexicon ({} vs {})",
                    first.corpus_id, set.corpus_id
                )));
            }
            if set.strategy != first.strategy {
                return Err(AnnotateError::Mismatch(format!(
                    "strategy ({} vs {})",
                    first.strategy, set.strategy
                )));
            }
        }
    }
    let names = sets.iter().map(|s| s.corpus_id.clone()).collect();
    let members: Vec<BTreeSet<String>> = sets.iter().map(AnnotationSet::stems).collect();
    Ok(PresencePartition::build(names, &members))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::parse_lexicon;

    fn royal_lexicon() -> ValueLexicon {
        parse_lexicon("law,king;queen,Power\nlove,love,Benevolence\n").unwrap()
    }

    fn corpus(id: &str, texts: &[(&str, &str)]) -> Corpus {
        Corpus::new(id, texts.iter().map(|(t, raw)| Text::new(id, t, raw.to_string())).collect()).unwrap()
    }

    #[test]
    fn annotates_by_hand_example() {
        let c = corpus("c", &[("t", "the king loved the queen")]);
        let set = annotate_corpus(&c, &royal_lexicon(), Strategy::Snowball).unwrap();
        let found: Vec<_> = set.annotations.iter().map(|a| (a.token_index, a.label.as_str(), a.stem.as_str())).collect();
        assert_eq!(found, [(1, "law", "king"), (2, "love", "love"), (4, "law", "queen")]);
        assert_eq!(set.annotations[1].surface, "loved");

        let table = token_counts(&[set], &royal_lexicon(), GroupBy::Label, Per::Corpus);
        assert_eq!(table.get("law", "c"), Some(2));
        assert_eq!(table.get("love", "c"), Some(1));
    }

    #[test]
    fn exact_strategy_skips_inflections() {
        let c = corpus("c", &[("t", "the king loved the queen")]);
        let set = annotate_corpus(&c, &royal_lexicon(), Strategy::Exact).unwrap();
        assert_eq!(set.len(), 2);
    }

    #[test]
    fn empty_lexicon_gives_empty_set() {
        let c = corpus("c", &[("t", "the king")]);
        let empty = ValueLexicon::new(vec![]).unwrap();
        let set = annotate_corpus(&c, &empty, Strategy::Snowball).unwrap();
        assert!(set.is_empty());
        let table = token_counts(&[set], &royal_lexicon(), GroupBy::Value, Per::Text);
        assert_eq!(table.total(), 0);
        assert_eq!(table.rows.len(), 10);
        assert_eq!(table.columns, ["c/t"]);
    }

    #[test]
    fn offsets_reproduce_surface() {
        let c = corpus("c", &[("t", "The KING's Daughter married the Queen.")]);
        let lexicon = parse_lexicon("law,king;queen,Power\nlove,married,Benevolence\n").unwrap();
        let set = annotate_corpus(&c, &lexicon, Strategy::Snowball).unwrap();
        assert_eq!(set.len(), 3);
        for a in &set.annotations {
            assert_eq!(c.texts[0].span(a.start, a.end).to_lowercase(), a.surface);
            assert_eq!(Strategy::Snowball.generalize(&a.surface), a.stem);
        }
    }

    fn annotation(index: usize, label: &str) -> Annotation {
        Annotation {
            text_id: "t".into(),
            token_index: index,
            surface: String::new(),
            stem: String::new(),
            label: label.into(),
            value: SchwartzValue::Power,
            start: 0,
            end: 0,
        }
    }

    #[test]
    fn marks_tokens() {
        let a = [annotation(1, "law")];
        assert_eq!(
            mark_tokens(&["the", "king", "spoke"], &a, MarkerStyle::Literal).unwrap(),
            ["the", "law", "king", "law", "spoke"]
        );
        assert_eq!(mark_tokens(&["a", "b"], &[], MarkerStyle::Literal).unwrap(), ["a", "b"]);
        let adjacent = [annotation(0, "law"), annotation(1, "law")];
        assert_eq!(
            mark_tokens(&["king", "queen"], &adjacent, MarkerStyle::Literal).unwrap(),
            ["law", "king", "law", "law", "queen", "law"]
        );
        assert_eq!(
            mark_tokens(&["king"], &[annotation(0, "law")], MarkerStyle::Sentinel).unwrap(),
            ["⟨law⟩", "king", "⟨law⟩"]
        );
        assert!(matches!(
            mark_tokens(&["king"], &[annotation(3, "law")], MarkerStyle::Literal),
            Err(AnnotateError::IndexOutOfRange { index: 3, len: 1, .. })
        ));
    }

    #[test]
    fn presence_regions() {
        let lexicon = royal_lexicon();
        let a = annotate_corpus(&corpus("a", &[("t", "king love")]), &lexicon, Strategy::Snowball).unwrap();
        let b = annotate_corpus(&corpus("b", &[("t", "king queen")]), &lexicon, Strategy::Snowball).unwrap();
        let p = stem_presence(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(p.only_in("a"), ["love"]);
        assert_eq!(p.only_in("b"), ["queen"]);
        assert_eq!(p.shared_by_all(), ["king"]);

        let single = stem_presence(std::slice::from_ref(&a)).unwrap();
        assert_eq!(single.regions.len(), 1);
        assert_eq!(single.region(1), ["king", "love"]);

        let mut other = b.clone();
        other.strategy = Strategy::Porter;
        assert!(stem_presence(&[a, other]).is_err());
    }

    #[test]
    fn partition_json_uses_mask_keys() {
        let p = PresencePartition::build(
            vec!["x".into(), "y".into()],
            &[["a".to_string()].into(), ["a".to_string(), "b".to_string()].into()],
        );
        let json = serde_json::to_string(&p).unwrap();
        assert_eq!(json, r#"{"sets":["x","y"],"regions":{"2":["b"],"3":["a"]}}"#);
    }
}
