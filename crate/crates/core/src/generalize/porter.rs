//! The original Porter stemmer, in the R1/R2 formulation (measure `m > 0` is
//! "inside R1", `m > 1` is "inside R2").

use super::chars::{ends_with, is_vowel, replace_suffix};

const STEP2: [(&str, &str); 20] = [
    ("ational", "ate"),
    ("ization", "ize"),
    ("iveness", "ive"),
    ("fulness", "ful"),
    ("ousness", "ous"),
    ("tional", "tion"),
    ("biliti", "ble"),
    ("ousli", "ous"),
    ("entli", "ent"),
    ("aliti", "al"),
    ("iviti", "ive"),
    ("alism", "al"),
    ("ation", "ate"),
    ("anci", "ance"),
    ("enci", "ence"),
    ("abli", "able"),
    ("alli", "al"),
    ("izer", "ize"),
    ("ator", "ate"),
    ("eli", "e"),
];

const STEP3: [(&str, &str); 7] = [
    ("icate", "ic"),
    ("ative", ""),
    ("alize", "al"),
    ("iciti", "ic"),
    ("ical", "ic"),
    ("ness", ""),
    ("ful", ""),
];

const STEP4: [&str; 19] = [
    "ement", "ance", "ence", "able", "ible", "ment", "ate", "ive", "ize", "iti", "ism", "ion",
    "ous", "ant", "ent", "ic", "al", "er", "ou",
];

fn region_start(w: &[char], from: usize) -> Option<usize> {
    let vowel = from + w[from..].iter().position(|&c| is_vowel(c))?;
    let consonant = vowel + w[vowel..].iter().position(|&c| !is_vowel(c))?;
    Some(consonant + 1)
}

/// consonant-vowel-consonant ending, where the last consonant is not w, x or Y.
fn ends_cvc(w: &[char]) -> bool {
    let n = w.len();
    n >= 3
        && !(is_vowel(w[n - 1]) || matches!(w[n - 1], 'w' | 'x' | 'Y'))
        && is_vowel(w[n - 2])
        && !is_vowel(w[n - 3])
}

fn apply_table(w: &mut Vec<char>, table: &[(&str, &str)], region: usize) {
    if let Some((suffix, replacement)) = table.iter().find(|(s, _)| ends_with(w, s)) {
        if w.len() - suffix.len() >= region {
            replace_suffix(w, suffix.len(), replacement);
        }
    }
}

pub fn stem(word: &str) -> String {
    let mut w: Vec<char> = word.chars().collect();
    if w.first() == Some(&'y') {
        w[0] = 'Y';
    }
    for i in 1..w.len() {
        if w[i] == 'y' && is_vowel(w[i - 1]) {
            w[i] = 'Y';
        }
    }
    let n = w.len();
    let (p1, p2) = match region_start(&w, 0) {
        Some(p1) => (p1, region_start(&w, p1).unwrap_or(n)),
        None => (n, n),
    };

    // Step 1a
    if ends_with(&w, "sses") {
        replace_suffix(&mut w, 4, "ss");
    } else if ends_with(&w, "ies") {
        replace_suffix(&mut w, 3, "i");
    } else if !ends_with(&w, "ss") && ends_with(&w, "s") {
        w.pop();
    }

    // Step 1b
    let n = w.len();
    if ends_with(&w, "eed") {
        if n - 3 >= p1 {
            w.pop();
        }
    } else if let Some(len) = ["ed", "ing"].iter().find(|s| ends_with(&w, s)).map(|s| s.len()) {
        let start = n - len;
        if w[..start].iter().any(|&c| is_vowel(c)) {
            w.truncate(start);
            let m = w.len();
            if ["at", "bl", "iz"].iter().any(|s| ends_with(&w, s)) {
                w.push('e');
            } else if m >= 2
                && w[m - 1] == w[m - 2]
                && matches!(w[m - 1], 'b' | 'd' | 'f' | 'g' | 'm' | 'n' | 'p' | 'r' | 't')
            {
                w.pop();
            } else if m == p1 && ends_cvc(&w) {
                w.push('e');
            }
        }
    }

    // Step 1c
    let n = w.len();
    if n >= 1 && matches!(w[n - 1], 'y' | 'Y') && w[..n - 1].iter().any(|&c| is_vowel(c)) {
        w[n - 1] = 'i';
    }

    apply_table(&mut w, &STEP2, p1);
    apply_table(&mut w, &STEP3, p1);

    // Step 4
    if let Some(suffix) = STEP4.iter().find(|s| ends_with(&w, s)) {
        let start = w.len() - suffix.len();
        let allowed = *suffix != "ion" || (start >= 1 && matches!(w[start - 1], 's' | 't'));
        if start >= p2 && allowed {
            w.truncate(start);
        }
    }

    // Step 5a
    let n = w.len();
    if w.last() == Some(&'e') {
        let start = n - 1;
        if start >= p2 || (start >= p1 && !ends_cvc(&w[..start])) {
            w.pop();
        }
    }
    // Step 5b
    let n = w.len();
    if n >= 2 && w[n - 1] == 'l' && w[n - 2] == 'l' && n > p2 {
        w.pop();
    }

    w.into_iter().map(|c| if c == 'Y' { 'y' } else { c }).collect()
}
