//! Small helpers shared by the rule-based stemmers, which all work on `char` buffers.

pub(crate) fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

pub(crate) fn ends_with(w: &[char], suffix: &str) -> bool {
    let n = suffix.chars().count();
    w.len() >= n && w[w.len() - n..].iter().copied().eq(suffix.chars())
}

pub(crate) fn starts_with(w: &[char], prefix: &str) -> bool {
    let n = prefix.chars().count();
    w.len() >= n && w[..n].iter().copied().eq(prefix.chars())
}

/// Drops the last `remove` chars and appends `replacement`.
pub(crate) fn replace_suffix(w: &mut Vec<char>, remove: usize, replacement: &str) {
    let n = w.len() - remove;
    w.truncate(n);
    w.extend(replacement.chars());
}
