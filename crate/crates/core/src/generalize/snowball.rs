//! English Snowball stemmer (Porter2), following the current `english.sbl`
//! rule set including its prefix and `-ing` exception lists.

use super::chars::{ends_with, is_vowel, replace_suffix, starts_with};

const REGION_PREFIXES: [&str; 9] = [
    "arsen", "commun", "emerg", "gener", "inter", "later", "organ", "past", "univers",
];

/// Words stemmed as a whole before any rule runs.
fn exceptional_form(word: &str) -> Option<&'static str> {
    Some(match word {
        "andes" => "andes",
        "atlas" => "atlas",
        "bias" => "bias",
        "cosmos" => "cosmos",
        "howe" => "howe",
        "news" => "news",
        "sky" => "sky",
        "early" => "earli",
        "gently" => "gentl",
        "idly" => "idl",
        "only" => "onli",
        "singly" => "singl",
        "skies" => "sky",
        "skis" => "ski",
        "ugly" => "ugli",
        _ => return None,
    })
}

/// Stems that stop `-ing` removal when they make up the whole remaining word.
const ING_KEEP: [&str; 6] = ["even", "cann", "inn", "earr", "herr", "out"];

const EED_KEEP: [&str; 3] = ["succ", "proc", "exc"];

const STEP2: [(&str, &str); 23] = [
    ("ization", "ize"),
    ("ational", "ate"),
    ("iveness", "ive"),
    ("fulness", "ful"),
    ("ousness", "ous"),
    ("tional", "tion"),
    ("biliti", "ble"),
    ("lessli", "less"),
    ("entli", "ent"),
    ("ation", "ate"),
    ("alism", "al"),
    ("aliti", "al"),
    ("ousli", "ous"),
    ("iviti", "ive"),
    ("fulli", "ful"),
    ("ogist", "og"),
    ("enci", "ence"),
    ("anci", "ance"),
    ("abli", "able"),
    ("izer", "ize"),
    ("ator", "ate"),
    ("alli", "al"),
    ("bli", "ble"),
];

const STEP3: [(&str, &str); 8] = [
    ("ational", "ate"),
    ("tional", "tion"),
    ("alize", "al"),
    ("icate", "ic"),
    ("iciti", "ic"),
    ("ical", "ic"),
    ("ness", ""),
    ("ful", ""),
];

// Longest first, so the first hit is the longest matching suffix.
const STEP4: [&str; 18] = [
    "ement", "ance", "ence", "able", "ible", "ment", "ate", "ive", "ize", "iti", "ism", "ion",
    "ous", "ant", "ent", "ic", "al", "er",
];

fn is_vowel_wxy(c: char) -> bool {
    is_vowel(c) || matches!(c, 'w' | 'x' | 'Y')
}

fn is_valid_li(c: char) -> bool {
    matches!(c, 'c' | 'd' | 'e' | 'g' | 'h' | 'k' | 'm' | 'n' | 'r' | 't')
}

/// Position just past the first non-vowel that follows a vowel, searching from `from`.
fn after_vowel_consonant(w: &[char], from: usize) -> Option<usize> {
    let vowel = from + w[from..].iter().position(|&c| is_vowel(c))?;
    let consonant = vowel + w[vowel..].iter().position(|&c| !is_vowel(c))?;
    Some(consonant + 1)
}

fn ends_in_short_syllable(w: &[char]) -> bool {
    let n = w.len();
    if n >= 3 && !is_vowel_wxy(w[n - 1]) && is_vowel(w[n - 2]) && !is_vowel(w[n - 3]) {
        return true;
    }
    if n == 2 && is_vowel(w[0]) && !is_vowel(w[1]) {
        return true;
    }
    ends_with(w, "past")
}

struct Word {
    w: Vec<char>,
    p1: usize,
    p2: usize,
}

impl Word {
    fn new(mut w: Vec<char>) -> Self {
        if w.first() == Some(&'\'') {
            w.remove(0);
        }
        if w.first() == Some(&'y') {
            w[0] = 'Y';
        }
        for i in 1..w.len() {
            if w[i] == 'y' && is_vowel(w[i - 1]) {
                w[i] = 'Y';
            }
        }

        let n = w.len();
        let r1_start = REGION_PREFIXES
            .iter()
            .filter(|p| starts_with(&w, p))
            .map(|p| p.len())
            .max()
            .or_else(|| after_vowel_consonant(&w, 0));
        let (p1, p2) = match r1_start {
            Some(p1) => (p1, after_vowel_consonant(&w, p1).unwrap_or(n)),
            None => (n, n),
        };
        Word { w, p1, p2 }
    }

    fn has_vowel_before(&self, end: usize) -> bool {
        self.w[..end].iter().any(|&c| is_vowel(c))
    }

    fn step_1a(&mut self) {
        for suffix in ["'s'", "'s", "'"] {
            if ends_with(&self.w, suffix) {
                let n = self.w.len() - suffix.len();
                self.w.truncate(n);
                break;
            }
        }

        let n = self.w.len();
        if ends_with(&self.w, "sses") {
            replace_suffix(&mut self.w, 4, "ss");
        } else if ends_with(&self.w, "ied") || ends_with(&self.w, "ies") {
            let replacement = if n - 3 >= 2 { "i" } else { "ie" };
            replace_suffix(&mut self.w, 3, replacement);
        } else if ends_with(&self.w, "ss") || ends_with(&self.w, "us") {
        } else if ends_with(&self.w, "s") && n >= 2 && self.has_vowel_before(n - 2) {
            self.w.truncate(n - 1);
        }
    }

    fn step_1b(&mut self) {
        let n = self.w.len();
        let (start, kind) = if ends_with(&self.w, "eedly") {
            (n - 5, Suffix1b::Eed)
        } else if ends_with(&self.w, "ingly") {
            (n - 5, Suffix1b::Ed)
        } else if ends_with(&self.w, "edly") {
            (n - 4, Suffix1b::Ed)
        } else if ends_with(&self.w, "eed") {
            (n - 3, Suffix1b::Eed)
        } else if ends_with(&self.w, "ing") {
            (n - 3, Suffix1b::Ing)
        } else if ends_with(&self.w, "ed") {
            (n - 2, Suffix1b::Ed)
        } else {
            return;
        };

        match kind {
            Suffix1b::Eed => {
                if start >= self.p1 && !EED_KEEP.iter().any(|k| self.w[..start].iter().copied().eq(k.chars())) {
                    replace_suffix(&mut self.w, n - start, "ee");
                }
                return;
            }
            Suffix1b::Ing => {
                let stem = &self.w[..start];
                if stem.len() == 2 && stem[1] == 'y' && !is_vowel(stem[0]) {
                    replace_suffix(&mut self.w, 4, "ie");
                    return;
                }
                if ING_KEEP.iter().any(|k| stem.iter().copied().eq(k.chars())) {
                    return;
                }
            }
            Suffix1b::Ed => {}
        }

        if !self.has_vowel_before(start) {
            return;
        }
        self.w.truncate(start);

        if ["at", "bl", "iz"].iter().any(|s| ends_with(&self.w, s)) {
            self.w.push('e');
            return;
        }
        let m = self.w.len();
        let doubled = m >= 2
            && self.w[m - 1] == self.w[m - 2]
            && matches!(self.w[m - 1], 'b' | 'd' | 'f' | 'g' | 'm' | 'n' | 'p' | 'r' | 't');
        if doubled {
            if !(m == 3 && matches!(self.w[0], 'a' | 'e' | 'o')) {
                self.w.pop();
            }
            return;
        }
        if m == self.p1 && ends_in_short_syllable(&self.w) {
            self.w.push('e');
        }
    }

    fn step_1c(&mut self) {
        let n = self.w.len();
        if n >= 3 && matches!(self.w[n - 1], 'y' | 'Y') && !is_vowel(self.w[n - 2]) {
            self.w[n - 1] = 'i';
        }
    }

    fn step_2(&mut self) {
        let n = self.w.len();
        if let Some((suffix, replacement)) = STEP2.iter().find(|(s, _)| ends_with(&self.w, s)) {
            // "ogi" and "li" are shorter than every table entry they could shadow.
            if n - suffix.len() >= self.p1 {
                replace_suffix(&mut self.w, suffix.len(), replacement);
            }
            return;
        }
        if ends_with(&self.w, "ogi") {
            if n - 3 >= self.p1 && n >= 4 && self.w[n - 4] == 'l' {
                replace_suffix(&mut self.w, 3, "og");
            }
        } else if ends_with(&self.w, "li") && n - 2 >= self.p1 && n >= 3 && is_valid_li(self.w[n - 3]) {
            self.w.truncate(n - 2);
        }
    }

    fn step_3(&mut self) {
        let n = self.w.len();
        if ends_with(&self.w, "ative") {
            // "ative" is the longest match for any word ending in it.
            if n - 5 >= self.p2 {
                self.w.truncate(n - 5);
            }
            return;
        }
        if let Some((suffix, replacement)) = STEP3.iter().find(|(s, _)| ends_with(&self.w, s)) {
            if n - suffix.len() >= self.p1 {
                replace_suffix(&mut self.w, suffix.len(), replacement);
            }
        }
    }

    fn step_4(&mut self) {
        let n = self.w.len();
        let Some(suffix) = STEP4.iter().find(|s| ends_with(&self.w, s)) else {
            return;
        };
        let start = n - suffix.len();
        if start < self.p2 {
            return;
        }
        if *suffix == "ion" && !(start >= 1 && matches!(self.w[start - 1], 's' | 't')) {
            return;
        }
        self.w.truncate(start);
    }

    fn step_5(&mut self) {
        let n = self.w.len();
        match self.w.last() {
            Some('e') => {
                let start = n - 1;
                if start >= self.p2 || (start >= self.p1 && !ends_in_short_syllable(&self.w[..start])) {
                    self.w.truncate(start);
                }
            }
            Some('l') if n > self.p2 && n >= 2 && self.w[n - 2] == 'l' => {
                self.w.truncate(n - 1);
            }
            _ => {}
        }
    }

    fn finish(self) -> String {
        self.w.into_iter().map(|c| if c == 'Y' { 'y' } else { c }).collect()
    }
}

enum Suffix1b {
    Eed,
    Ed,
    Ing,
}

pub fn stem(word: &str) -> String {
    if let Some(form) = exceptional_form(word) {
        return form.to_string();
    }
    let chars: Vec<char> = word.chars().collect();
    if chars.len() < 3 {
        return word.to_string();
    }
    let mut w = Word::new(chars);
    w.step_1a();
    w.step_1b();
    w.step_1c();
    w.step_2();
    w.step_3();
    w.step_4();
    w.step_5();
    w.finish()
}
