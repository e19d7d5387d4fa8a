//! Plain-text corpora: one directory per corpus, one UTF-8 `.txt` file per text.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("corpus directory {0} does not exist")]
    MissingDirectory(PathBuf),
    #[error("no texts found in {0}")]
    Empty(PathBuf),
    #[error("{0} is not valid UTF-8")]
    NotUtf8(PathBuf),
    #[error("texts {first:?} and {second:?} both map to id {id:?}")]
    DuplicateTextId { id: String, first: String, second: String },
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A lowercase word token with its character span in the raw text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    /// Offsets count Unicode scalar values, not bytes.
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Text {
    pub id: String,
    pub title: String,
    pub corpus_id: String,
    pub raw: String,
    pub tokens: Vec<Token>,
}

impl Text {
    pub fn new(corpus_id: &str, title: &str, raw: String) -> Text {
        let tokens = tokenize(&raw);
        Text {
            id: slug(title),
            title: title.to_string(),
            corpus_id: corpus_id.to_string(),
            raw,
            tokens,
        }
    }

    /// The raw characters in `[start, end)`.
    pub fn span(&self, start: usize, end: usize) -> String {
        self.raw.chars().skip(start).take(end.saturating_sub(start)).collect()
    }

    pub fn token_texts(&self) -> impl Iterator<Item = &str> {
        self.tokens.iter().map(|t| t.text.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    pub id: String,
    pub texts: Vec<Text>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CorpusStats {
    pub text_count: usize,
    pub symbol_count: usize,
    pub word_count: usize,
}

impl Corpus {
    pub fn new(id: &str, texts: Vec<Text>) -> Result<Corpus, CorpusError> {
        let mut seen: Vec<(&str, &str)> = Vec::with_capacity(texts.len());
        for text in &texts {
            if let Some((_, first)) = seen.iter().find(|(id, _)| *id == text.id) {
                return Err(CorpusError::DuplicateTextId {
                    id: text.id.clone(),
                    first: first.to_string(),
                    second: text.title.clone(),
                });
            }
            seen.push((&text.id, &text.title));
        }
        Ok(Corpus { id: id.to_string(), texts })
    }

    pub fn text(&self, id: &str) -> Option<&Text> {
        self.texts.iter().find(|t| t.id == id)
    }

    pub fn stats(&self) -> CorpusStats {
        corpus_stats(self)
    }

    /// SHA-256 over the corpus id and every text's id and content, hex-encoded.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.id.as_bytes());
        for text in &self.texts {
            hasher.update([0u8]);
            hasher.update(text.id.as_bytes());
            hasher.update([0u8]);
            hasher.update(text.raw.as_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    CorpusStats {
        text_count: corpus.texts.len(),
        symbol_count: corpus.texts.iter().map(|t| t.raw.chars().count()).sum(),
        word_count: corpus.texts.iter().map(|t| t.tokens.len()).sum(),
    }
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Splits `raw` into lowercase runs of letters. An apostrophe between two
/// letters stays inside the token and is normalized to `'`.
pub fn tokenize(raw: &str) -> Vec<Token> {
    let chars: Vec<char> = raw.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if !chars[i].is_alphabetic() {
            i += 1;
            continue;
        }
        let start = i;
        let mut text = String::new();
        while i < chars.len() {
            let c = chars[i];
            if c.is_alphabetic() {
                text.extend(c.to_lowercase());
            } else if is_apostrophe(c) && chars.get(i + 1).is_some_and(|n| n.is_alphabetic()) {
                text.push('\'');
            } else {
                break;
            }
            i += 1;
        }
        tokens.push(Token { text, start, end: i });
    }
    tokens
}

/// Lowercase ASCII-alphanumeric slug: "The Frog King" -> "the-frog-king".
pub fn slug(title: &str) -> String {
    let mut out = String::new();
    for c in title.chars().flat_map(char::to_lowercase) {
        if c.is_alphanumeric() {
            out.push(c);
        } else if !out.is_empty() && !out.ends_with('-') {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    out
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io { path: path.to_path_buf(), source }
}

/// Loads `root/<corpus_id>/*.txt`, ordered by file name.
pub fn load_corpus(root: &Path, corpus_id: &str) -> Result<Corpus, CorpusError> {
    let dir = root.join(corpus_id);
    if !dir.is_dir() {
        return Err(CorpusError::MissingDirectory(dir));
    }
    let mut files: Vec<PathBuf> = fs::read_dir(&dir)
        .map_err(io_error(&dir))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "txt"))
        .collect();
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    if files.is_empty() {
        return Err(CorpusError::Empty(dir));
    }

    let mut texts = Vec::with_capacity(files.len());
    for path in files {
        let bytes = fs::read(&path).map_err(io_error(&path))?;
        let raw = String::from_utf8(bytes).map_err(|_| CorpusError::NotUtf8(path.clone()))?;
        let raw = raw.replace("\r\n", "\n");
        let title = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
        texts.push(Text::new(corpus_id, title, raw));
    }
    Corpus::new(corpus_id, texts)
}

/// Every subdirectory of `root` holding at least one `.txt` file, by id.
pub fn load_corpora(root: &Path) -> Result<Vec<Corpus>, CorpusError> {
    if !root.is_dir() {
        return Err(CorpusError::MissingDirectory(root.to_path_buf()));
    }
    let mut ids: Vec<String> = fs::read_dir(root)
        .map_err(io_error(root))?
        .filter_map(|entry| entry.ok())
        .filter(|e| e.path().is_dir())
        .filter_map(|e| e.file_name().to_str().map(str::to_string))
        .filter(|id| !id.starts_with('.'))
        .collect();
    ids.sort();
    let corpora = ids
        .iter()
        .map(|id| load_corpus(root, id))
        .collect::<Result<Vec<_>, _>>()?;
    if corpora.is_empty() {
        return Err(CorpusError::Empty(root.to_path_buf()));
    }
    Ok(corpora)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(raw: &str) -> Vec<String> {
        tokenize(raw).into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(words("Faithful Johannes!"), ["faithful", "johannes"]);
        assert!(words("").is_empty());
        let tokens = tokenize("the king's daughter");
        assert_eq!(words("the king's daughter"), ["the", "king's", "daughter"]);
        assert_eq!((tokens[1].start, tokens[1].end), (4, 10));
        assert_eq!((tokens[2].start, tokens[2].end), (11, 19));
    }

    #[test]
    fn apostrophes_only_inside_words() {
        assert_eq!(words("'tis the kings' hall"), ["tis", "the", "kings", "hall"]);
        assert_eq!(words("Fitcher\u{2019}s Bird"), ["fitcher's", "bird"]);
        assert_eq!(words("well-known 42 times"), ["well", "known", "times"]);
    }

    #[test]
    fn offsets_are_character_based() {
        let raw = "Über die Brücke";
        let text = Text::new("c", "t", raw.to_string());
        for token in &text.tokens {
            assert_eq!(text.span(token.start, token.end).to_lowercase(), token.text);
        }
        assert_eq!(text.tokens[2].start, 9);
    }

    #[test]
    fn slugs() {
        assert_eq!(slug("The Frog King"), "the-frog-king");
        assert_eq!(slug("Fitcher's Bird"), "fitcher-s-bird");
        assert_eq!(slug("  Hansel And Grethel "), "hansel-and-grethel");
    }

    #[test]
    fn stats_by_hand() {
        let corpus = Corpus::new(
            "x",
            vec![Text::new("x", "one", "a b.".into()), Text::new("x", "two", "c".into())],
        )
        .unwrap();
        assert_eq!(
            corpus_stats(&corpus),
            CorpusStats { text_count: 2, symbol_count: 5, word_count: 3 }
        );
        let empty = Corpus::new("y", vec![Text::new("y", "e", String::new())]).unwrap();
        assert_eq!(corpus_stats(&empty), CorpusStats { text_count: 1, symbol_count: 0, word_count: 0 });
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = Corpus::new(
            "x",
            vec![Text::new("x", "The Cat", String::new()), Text::new("x", "the cat", String::new())],
        )
        .unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateTextId { .. }));
    }

    #[test]
    fn load_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path();
        fs::create_dir(root.join("germany")).unwrap();
        fs::write(root.join("germany/The Frog King.txt"), "The frog\r\nking.").unwrap();
        fs::write(root.join("germany/Allerleirauh.txt"), "Fur").unwrap();
        fs::write(root.join("germany/notes.md"), "ignored").unwrap();
        let corpus = load_corpus(root, "germany").unwrap();
        let ids: Vec<_> = corpus.texts.iter().map(|t| t.id.as_str()).collect();
        assert_eq!(ids, ["allerleirauh", "the-frog-king"]);
        assert_eq!(corpus.texts[1].raw, "The frog\nking.");
        assert_eq!(load_corpus(root, "germany").unwrap(), corpus);

        fs::create_dir(root.join("empty")).unwrap();
        let err = load_corpus(root, "empty").unwrap_err();
        assert!(err.to_string().starts_with("no texts found"));
        assert!(matches!(load_corpus(root, "nowhere"), Err(CorpusError::MissingDirectory(_))));

        fs::create_dir(root.join("bad")).unwrap();
        fs::write(root.join("bad/Broken.txt"), [0xffu8, 0xfe, 0x41]).unwrap();
        let err = load_corpus(root, "bad").unwrap_err();
        assert!(err.to_string().contains("Broken.txt"));
    }
}
