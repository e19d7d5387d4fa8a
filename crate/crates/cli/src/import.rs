//! Cuts selected tales out of a plain-text book.
//!
//! A heading is a short line after a blank line that is either written in
//! capitals or matches one of the wanted titles. A tale runs from its heading
//! to the next heading. Titles are compared after lowercasing, dropping
//! apostrophes, turning other punctuation into spaces and removing a leading
//! number ("XII.", "12.").

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ImportError {
    #[error("titles not found in the source: {}", .0.join("; "))]
    Missing(Vec<String>),
    #[error("title list is empty")]
    NoTitles,
}

pub fn normalize(title: &str) -> String {
    let mut cleaned = String::new();
    for c in title.chars().flat_map(char::to_lowercase) {
        match c {
            '\'' | '\u{2019}' | '\u{2018}' => {}
            c if c.is_alphanumeric() => cleaned.push(c),
            _ => cleaned.push(' '),
        }
    }
    let mut words: Vec<&str> = cleaned.split_whitespace().collect();
    let numeral = |w: &str| w.chars().all(|c| c.is_ascii_digit()) || w.chars().all(|c| "ivxlc".contains(c));
    if words.len() > 1 && numeral(words[0]) {
        words.remove(0);
    }
    words.join(" ")
}

/// The part of a Project Gutenberg file between its START and END markers,
/// or the whole text when the markers are absent.
pub fn strip_gutenberg(book: &str) -> &str {
    let start = book.find("*** START OF").and_then(|i| book[i..].find('\n').map(|j| i + j + 1)).unwrap_or(0);
    let end = book[start..].find("*** END OF").map_or(book.len(), |i| start + i);
    &book[start..end]
}

fn is_heading(line: &str, previous_blank: bool, wanted: &[String]) -> bool {
    let line = line.trim();
    if line.is_empty() || !previous_blank || line.split_whitespace().count() > 14 {
        return false;
    }
    let capitals = line.chars().any(char::is_alphabetic) && !line.chars().any(char::is_lowercase);
    capitals || wanted.contains(&normalize(line))
}

/// `(title, body)` for every wanted title, in list order.
pub fn split_tales(book: &str, titles: &[String]) -> Result<Vec<(String, String)>, ImportError> {
    if titles.is_empty() {
        return Err(ImportError::NoTitles);
    }
    let wanted: Vec<String> = titles.iter().map(|t| normalize(t)).collect();
    let lines: Vec<&str> = strip_gutenberg(book).lines().collect();
    let mut headings = Vec::new();
    for (i, line) in lines.iter().enumerate() {
        let previous_blank = i == 0 || lines[i - 1].trim().is_empty();
        if is_heading(line, previous_blank, &wanted) {
            headings.push(i);
        }
    }
    let mut found = Vec::new();
    let mut missing = Vec::new();
    for (title, key) in titles.iter().zip(&wanted) {
        let position = headings.iter().position(|&h| normalize(lines[h]) == *key);
        match position {
            Some(p) => {
                let end = headings.get(p + 1).copied().unwrap_or(lines.len());
                let body = lines[headings[p] + 1..end].join("\n").trim().to_string() + "\n";
                found.push((title.clone(), body));
            }
            None => missing.push(title.clone()),
        }
    }
    if missing.is_empty() {
        Ok(found)
    } else {
        Err(ImportError::Missing(missing))
    }
}

/// One title per line; blank lines and `#` comments are skipped.
pub fn parse_titles(content: &str) -> Vec<String> {
    content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const BOOK: &str = "Header junk\n*** START OF THE PROJECT GUTENBERG EBOOK X ***\n\nCONTENTS\n\n\
        THE FROG-KING, OR IRON HENRY\n\nIn olden times when wishing still helped.\n\nMore text.\n\n\
        XII. FITCHER'S BIRD\n\nThere was once a wizard.\n\n\
        Rapunzel\n\nThere were once a man and a woman.\n\n\
        THE END\n\n*** END OF THE PROJECT GUTENBERG EBOOK X ***\nlicense\n";

    #[test]
    fn normalization() {
        assert_eq!(normalize("THE FROG-KING, OR IRON HENRY"), "the frog king or iron henry");
        assert_eq!(normalize("XII. Fitcher's Bird"), "fitchers bird");
        assert_eq!(normalize("The Two Kings' Children"), "the two kings children");
        assert_eq!(normalize("12. The Hearth-cat"), "the hearth cat");
    }

    #[test]
    fn splits_on_headings() {
        let titles = parse_titles("# germany\nThe Frog King Or Iron Henry\nFitcher's Bird\n\nRapunzel\n");
        let tales = split_tales(BOOK, &titles).unwrap();
        assert_eq!(tales.len(), 3);
        assert_eq!(tales[0].1, "In olden times when wishing still helped.\n\nMore text.\n");
        assert_eq!(tales[1].1, "There was once a wizard.\n");
        assert_eq!(tales[2].1, "There were once a man and a woman.\n");
    }

    #[test]
    fn reports_missing_titles() {
        let err = split_tales(BOOK, &["Rapunzel".into(), "Old Sultan".into()]).unwrap_err();
        assert_eq!(err, ImportError::Missing(vec!["Old Sultan".into()]));
    }
}
