//! Value lexicons: labeled groups of synonym words, each mapped to one of the
//! ten Schwartz basic values.
//!
//! File format, one group per line:
//!
//! ```text
//! # comment
//! justic,justice;judge;trial;fairness;just,Universalism
//! ```
//!
//! Blank lines and `#` comments are ignored. Group order is preserved.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::generalize::Strategy;

const DEFAULT_LEXICON: &str = include_str!("default_lexicon.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SchwartzValue {
    Security,
    Tradition,
    Conformity,
    #[serde(rename = "Self-Direction")]
    SelfDirection,
    Stimulation,
    Hedonism,
    Achievement,
    Power,
    Benevolence,
    Universalism,
}

impl SchwartzValue {
    pub const ALL: [SchwartzValue; 10] = [
        SchwartzValue::Security,
        SchwartzValue::Tradition,
        SchwartzValue::Conformity,
        SchwartzValue::SelfDirection,
        SchwartzValue::Stimulation,
        SchwartzValue::Hedonism,
        SchwartzValue::Achievement,
        SchwartzValue::Power,
        SchwartzValue::Benevolence,
        SchwartzValue::Universalism,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchwartzValue::Security => "Security",
            SchwartzValue::Tradition => "Tradition",
            SchwartzValue::Conformity => "Conformity",
            SchwartzValue::SelfDirection => "Self-Direction",
            SchwartzValue::Stimulation => "Stimulation",
            SchwartzValue::Hedonism => "Hedonism",
            SchwartzValue::Achievement => "Achievement",
            SchwartzValue::Power => "Power",
            SchwartzValue::Benevolence => "Benevolence",
            SchwartzValue::Universalism => "Universalism",
        }
    }
}

impl fmt::Display for SchwartzValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchwartzValue {
    type Err = String;

    /// Case-insensitive match on the canonical names.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchwartzValue::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenGroup {
    pub label: String,
    pub synonyms: Vec<String>,
    pub value: SchwartzValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IssueKind {
    Malformed { reason: String },
    EmptyLabel,
    EmptySynonyms,
    MultiWordSynonym { synonym: String },
    UnknownValue { value: String },
    DuplicateLabel { label: String, first_line: usize },
}

/// One validation problem, tied to a 1-based line of the lexicon file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconIssue {
    pub line: usize,
    #[serde(flatten)]
    pub kind: IssueKind,
}

impl fmt::Display for LexiconIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: ", self.line)?;
        match &self.kind {
            IssueKind::Malformed { reason } => write!(f, "malformed line ({reason})"),
            IssueKind::EmptyLabel => write!(f, "empty label"),
            IssueKind::EmptySynonyms => write!(f, "empty synonym list"),
            IssueKind::MultiWordSynonym { synonym } => {
                write!(f, "synonym {synonym:?} is not a single word")
            }
            IssueKind::UnknownValue { value } => write!(f, "unknown value {value:?}"),
            IssueKind::DuplicateLabel { label, first_line } => {
                write!(f, "duplicate label {label:?} (first defined on line {first_line})")
            }
        }
    }
}

/// Two groups whose words generalize to the same key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StemCollision {
    pub stem: String,
    pub first_group: String,
    pub second_group: String,
}

impl fmt::Display for StemCollision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "stem {:?} claimed by groups {:?} and {:?}",
            self.stem, self.first_group, self.second_group
        )
    }
}

fn join_lines<T: fmt::Display>(items: &[T]) -> String {
    items.iter().map(T::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LexiconError {
    #[error("invalid lexicon: {}", join_lines(.0))]
    Invalid(Vec<LexiconIssue>),
    #[error("ambiguous lexicon under {strategy}: {}", join_lines(.collisions))]
    Collision { strategy: Strategy, collisions: Vec<StemCollision> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValueLexicon {
    groups: Vec<TokenGroup>,
    version_hash: String,
}

impl ValueLexicon {
    /// Validates `groups` as if they were written one per line, in order.
    pub fn new(groups: Vec<TokenGroup>) -> Result<ValueLexicon, LexiconError> {
        let mut issues = Vec::new();
        let mut first_seen: BTreeMap<&str, usize> = BTreeMap::new();
        for (i, group) in groups.iter().enumerate() {
            let line = i + 1;
            issues.extend(group_issues(group).into_iter().map(|kind| LexiconIssue { line, kind }));
            if let Some(&first_line) = first_seen.get(group.label.as_str()) {
                issues.push(LexiconIssue {
                    line,
                    kind: IssueKind::DuplicateLabel { label: group.label.clone(), first_line },
                });
            } else {
                first_seen.insert(&group.label, line);
            }
        }
        if !issues.is_empty() {
            return Err(LexiconError::Invalid(issues));
        }
        let version_hash = hex::encode(Sha256::digest(serialize_groups(&groups).as_bytes()));
        Ok(ValueLexicon { groups, version_hash })
    }

    pub fn groups(&self) -> &[TokenGroup] {
        &self.groups
    }

    pub fn group(&self, label: &str) -> Option<&TokenGroup> {
        self.groups.iter().find(|g| g.label == label)
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.groups.iter().map(|g| g.label.as_str())
    }

    pub fn version_hash(&self) -> &str {
        &self.version_hash
    }

    /// Canonical file form: comments dropped, one group per line.
    pub fn serialize(&self) -> String {
        serialize_groups(&self.groups)
    }

    pub fn without_group(&self, label: &str) -> ValueLexicon {
        let groups = self.groups.iter().filter(|g| g.label != label).cloned().collect();
        ValueLexicon::new(groups).expect("removing a group keeps a lexicon valid")
    }
}

fn group_issues(group: &TokenGroup) -> Vec<IssueKind> {
    let mut issues = Vec::new();
    if group.label.trim().is_empty() {
        issues.push(IssueKind::EmptyLabel);
    } else if group.label.chars().any(|c| c.is_whitespace() || c == ',' || c == ';') {
        issues.push(IssueKind::Malformed { reason: format!("label {:?} is not a single word", group.label) });
    }
    if group.synonyms.is_empty() {
        issues.push(IssueKind::EmptySynonyms);
    }
    for synonym in &group.synonyms {
        if synonym.is_empty() || synonym.chars().any(|c| c.is_whitespace() || c == ',' || c == ';') {
            issues.push(IssueKind::MultiWordSynonym { synonym: synonym.clone() });
        }
    }
    issues
}

fn serialize_groups(groups: &[TokenGroup]) -> String {
    let mut out = String::new();
    for g in groups {
        out.push_str(&g.label);
        out.push(',');
        out.push_str(&g.synonyms.join(";"));
        out.push(',');
        out.push_str(g.value.name());
        out.push('\n');
    }
    out
}

/// Parses the lexicon file format, reporting every problem with its line number.
pub fn parse_lexicon(content: &str) -> Result<ValueLexicon, LexiconError> {
    let mut groups = Vec::new();
    let mut lines = Vec::new();
    let mut issues = Vec::new();

    for (i, raw_line) in content.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw_line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            issues.push(LexiconIssue {
                line,
                kind: IssueKind::Malformed {
                    reason: format!("expected 3 comma-separated fields, found {}", fields.len()),
                },
            });
            continue;
        }
        let value = match fields[2].parse::<SchwartzValue>() {
            Ok(value) => value,
            Err(value) => {
                issues.push(LexiconIssue { line, kind: IssueKind::UnknownValue { value } });
                continue;
            }
        };
        let synonyms: Vec<String> = fields[1]
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_string)
            .collect();
        groups.push(TokenGroup { label: fields[0].to_string(), synonyms, value });
        lines.push(line);
    }

    // Re-run structural validation so issues carry file line numbers.
    let mut first_seen: BTreeMap<&str, usize> = BTreeMap::new();
    for (group, &line) in groups.iter().zip(&lines) {
        issues.extend(group_issues(group).into_iter().map(|kind| LexiconIssue { line, kind }));
        if let Some(&first_line) = first_seen.get(group.label.as_str()) {
            issues.push(LexiconIssue {
                line,
                kind: IssueKind::DuplicateLabel { label: group.label.clone(), first_line },
            });
        } else {
            first_seen.insert(&group.label, line);
        }
    }
    if !issues.is_empty() {
        issues.sort_by_key(|issue| issue.line);
        return Err(LexiconError::Invalid(issues));
    }
    ValueLexicon::new(groups)
}

/// The 29 groups used for the fairy-tale study.
pub fn default_lexicon() -> ValueLexicon {
    parse_lexicon(DEFAULT_LEXICON).expect("bundled lexicon is valid")
}

pub fn default_lexicon_source() -> &'static str {
    DEFAULT_LEXICON
}

/// Lookup from generalized key to owning group, for one strategy.
#[derive(Debug, Clone)]
pub struct CompiledLexicon {
    strategy: Strategy,
    lexicon_hash: String,
    groups: Vec<TokenGroup>,
    entries: BTreeMap<String, usize>,
}

impl CompiledLexicon {
    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn lexicon_hash(&self) -> &str {
        &self.lexicon_hash
    }

    pub fn lookup(&self, key: &str) -> Option<&TokenGroup> {
        self.entries.get(key).map(|&i| &self.groups[i])
    }

    /// `(key, group label)` pairs in key order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, &i)| (k.as_str(), self.groups[i].label.as_str()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Generalizes every label and synonym with `strategy`. Two groups claiming
/// the same key is an error listing every such key.
pub fn compile_lexicon(lexicon: &ValueLexicon, strategy: Strategy) -> Result<CompiledLexicon, LexiconError> {
    let mut entries: BTreeMap<String, usize> = BTreeMap::new();
    let mut collisions = Vec::new();
    for (i, group) in lexicon.groups.iter().enumerate() {
        let words = std::iter::once(&group.label).chain(&group.synonyms);
        for word in words {
            let key = strategy.generalize(&word.to_lowercase());
            match entries.get(&key) {
                Some(&owner) if owner != i => {
                    let collision = StemCollision {
                        stem: key.clone(),
                        first_group: lexicon.groups[owner].label.clone(),
                        second_group: group.label.clone(),
                    };
                    if !collisions.contains(&collision) {
                        collisions.push(collision);
                    }
                }
                Some(_) => {}
                None => {
                    entries.insert(key, i);
                }
            }
        }
    }
    if !collisions.is_empty() {
        return Err(LexiconError::Collision { strategy, collisions });
    }
    Ok(CompiledLexicon {
        strategy,
        lexicon_hash: lexicon.version_hash.clone(),
        groups: lexicon.groups.clone(),
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generalize::Strategy;
    use proptest::prelude::{prop_assert_eq, proptest, Strategy as _};

    #[test]
    fn parses_table_rows() {
        let lexicon = parse_lexicon(
            "# header\n\njustic,justice;judge;trial;fairness;just,Universalism\ncooper,help;together,Benevolence\n",
        )
        .unwrap();
        let justic = lexicon.group("justic").unwrap();
        assert_eq!(justic.synonyms.len(), 5);
        assert_eq!(justic.value, SchwartzValue::Universalism);
        let cooper = lexicon.group("cooper").unwrap();
        assert_eq!(cooper.synonyms, ["help", "together"]);
        assert_eq!(cooper.value, SchwartzValue::Benevolence);
    }

    #[test]
    fn duplicate_label_names_both_lines() {
        let err = parse_lexicon("love,love,Benevolence\n# c\nlove,wife,Benevolence\n").unwrap_err();
        let LexiconError::Invalid(issues) = &err else { panic!("{err}") };
        assert_eq!(
            issues,
            &[LexiconIssue {
                line: 3,
                kind: IssueKind::DuplicateLabel { label: "love".into(), first_line: 1 }
            }]
        );
        assert!(err.to_string().contains("line 3") && err.to_string().contains("line 1"));
    }

    #[test]
    fn reports_every_issue_with_its_line() {
        let err = parse_lexicon("a,b,Kindness\nb,,Power\nc,two words,Power\nd;e\n").unwrap_err();
        let LexiconError::Invalid(issues) = err else { panic!() };
        let lines: Vec<_> = issues.iter().map(|i| i.line).collect();
        assert_eq!(lines, [1, 2, 3, 4]);
        assert!(matches!(issues[0].kind, IssueKind::UnknownValue { .. }));
        assert_eq!(issues[1].kind, IssueKind::EmptySynonyms);
        assert!(matches!(issues[2].kind, IssueKind::MultiWordSynonym { .. }));
        assert!(matches!(issues[3].kind, IssueKind::Malformed { .. }));
    }

    #[test]
    fn default_lexicon_rows() {
        let lexicon = default_lexicon();
        assert_eq!(lexicon.groups().len(), 29);
        let pieti = lexicon.group("pieti").unwrap();
        assert_eq!(pieti.synonyms, ["piety", "pious", "god", "virgin", "saint", "angel", "pray"]);
        assert_eq!(pieti.value, SchwartzValue::Tradition);
        assert_eq!(lexicon.group("love").unwrap().value, SchwartzValue::Benevolence);
        assert_eq!(lexicon.group("law").unwrap().value, SchwartzValue::Power);
    }

    #[test]
    fn default_lexicon_compiles_under_every_strategy() {
        for strategy in Strategy::ALL {
            compile_lexicon(&default_lexicon(), strategy).unwrap();
        }
    }

    #[test]
    fn snowball_keys() {
        let compiled = compile_lexicon(&default_lexicon(), Strategy::Snowball).unwrap();
        assert_eq!(compiled.lookup("pieti").unwrap().label, "pieti");
        assert_eq!(compiled.lookup("marri").unwrap().label, "love");
        assert_eq!(compiled.lookup("marriag").unwrap().label, "love");
        assert!(compiled.lookup("married").is_none());
    }

    #[test]
    fn collisions_are_errors() {
        // Snowball maps both "equality" and "equal" to "equal".
        let lexicon = parse_lexicon("equality,equality,Universalism\nsame,equal,Benevolence\n").unwrap();
        let err = compile_lexicon(&lexicon, Strategy::Snowball).unwrap_err();
        assert_eq!(
            err,
            LexiconError::Collision {
                strategy: Strategy::Snowball,
                collisions: vec![StemCollision {
                    stem: "equal".into(),
                    first_group: "equality".into(),
                    second_group: "same".into(),
                }],
            }
        );
        // Without stemming the two words stay distinct.
        assert_eq!(compile_lexicon(&lexicon, Strategy::Exact).unwrap().len(), 3);
    }

    #[test]
    fn hash_ignores_comments_and_tracks_content() {
        let a = parse_lexicon("# x\nlove,love,Benevolence\n").unwrap();
        let b = parse_lexicon("love , love ,benevolence").unwrap();
        assert_eq!(a.version_hash(), b.version_hash());
        let c = parse_lexicon("love,love;wife,Benevolence").unwrap();
        assert_ne!(a.version_hash(), c.version_hash());
        assert_eq!(a.version_hash().len(), 64);
    }

    fn arb_group() -> impl proptest::strategy::Strategy<Value = TokenGroup> {
        (
            "[a-z]{1,8}",
            proptest::collection::vec("[a-z']{1,10}", 1..5),
            proptest::sample::select(SchwartzValue::ALL.to_vec()),
        )
            .prop_map(|(label, synonyms, value)| TokenGroup { label, synonyms, value })
    }

    proptest! {
        #[test]
        fn serialize_round_trips(groups in proptest::collection::vec(arb_group(), 0..8)) {
            let mut seen = std::collections::BTreeSet::new();
            let groups: Vec<_> = groups.into_iter().filter(|g| seen.insert(g.label.clone())).collect();
            let lexicon = ValueLexicon::new(groups).unwrap();
            let reparsed = parse_lexicon(&lexicon.serialize()).unwrap();
            prop_assert_eq!(reparsed, lexicon);
        }
    }
}
