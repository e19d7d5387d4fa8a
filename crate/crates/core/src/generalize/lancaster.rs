//! Lancaster (Paice/Husk) stemmer driven by the standard 115-rule table.
//!
//! Each rule is written `<reversed ending>[*]<remove count>[<append>](>|.)`:
//! `*` restricts the rule to words no rule has touched yet, `>` continues
//! stemming after the rule fires and `.` stops.

use std::collections::HashMap;
use std::sync::OnceLock;

const RULES: [&str; 115] = [
    "ai*2.", "a*1.", "bb1.", "city3s.", "ci2>", "cn1t>", "dd1.", "dei3y>", "deec2ss.", "dee1.",
    "de2>", "dooh4>", "e1>", "feil1v.", "fi2>", "gni3>", "gai3y.", "ga2>", "gg1.", "ht*2.",
    "hsiug5ct.", "hsi3>", "i*1.", "i1y>", "ji1d.", "juf1s.", "ju1d.", "jo1d.", "jeh1r.",
    "jrev1t.", "jsim2t.", "jn1d.", "j1s.", "lbaifi6.", "lbai4y.", "lba3>", "lbi3.", "lib2l>",
    "lc1.", "lufi4y.", "luf3>", "lu2.", "lai3>", "lau3>", "la2>", "ll1.", "mui3.", "mu*2.",
    "msi3>", "mm1.", "nois4j>", "noix4ct.", "noi3>", "nai3>", "na2>", "nee0.", "ne2>", "nn1.",
    "pihs4>", "pp1.", "re2>", "rae0.", "ra2.", "ro2>", "ru2>", "rr1.", "rt1>", "rei3y>",
    "sei3y>", "sis2.", "si2>", "ssen4>", "ss0.", "suo3>", "su*2.", "s*1>", "s0.", "tacilp4y.",
    "ta2>", "tnem4>", "tne3>", "tna3>", "tpir2b.", "tpro2b.", "tcud1.", "tpmus2.", "tpec2iv.",
    "tulo2v.", "tsis0.", "tsi3>", "tt1.", "uqi3.", "ugo1.", "vis3j>", "vie0.", "vi2>", "ylb1>",
    "yli3y>", "ylp0.", "yl2>", "ygo1.", "yhp1.", "ymo1.", "ypo1.", "yti3>", "yte3>", "ytl2.",
    "yrtsi5.", "yra3>", "yro3>", "yfi3.", "ycn2t>", "yca3>", "zi2>", "zy1s.",
];

#[derive(Debug, Clone, PartialEq, Eq)]
struct Rule {
    ending: Vec<char>,
    intact_only: bool,
    remove: usize,
    append: String,
    continues: bool,
}

impl Rule {
    fn parse(spec: &str) -> Rule {
        let digit = spec.find(|c: char| c.is_ascii_digit()).expect("rule has a remove count");
        let (head, tail) = spec.split_at(digit);
        let intact_only = head.ends_with('*');
        let ending: Vec<char> = head.trim_end_matches('*').chars().rev().collect();
        let remove = tail[..1].parse().expect("single-digit remove count");
        let rest = &tail[1..];
        let continues = rest.ends_with('>');
        let append = rest.trim_end_matches(['>', '.']).to_string();
        Rule { ending, intact_only, remove, append, continues }
    }
}

fn rule_index() -> &'static HashMap<char, Vec<Rule>> {
    static INDEX: OnceLock<HashMap<char, Vec<Rule>>> = OnceLock::new();
    INDEX.get_or_init(|| {
        let mut index: HashMap<char, Vec<Rule>> = HashMap::new();
        for spec in RULES {
            let key = spec.chars().next().expect("non-empty rule");
            index.entry(key).or_default().push(Rule::parse(spec));
        }
        index
    })
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

/// A stem must keep two letters when it starts with a vowel, otherwise three
/// letters with a vowel in the second or third position.
fn acceptable(w: &[char], remove: usize) -> bool {
    let Some(remaining) = w.len().checked_sub(remove) else {
        return false;
    };
    if is_vowel(w[0]) {
        remaining >= 2
    } else {
        remaining >= 3 && (is_vowel(w[1]) || is_vowel(w[2]))
    }
}

pub fn stem(word: &str) -> String {
    let intact: Vec<char> = word.chars().collect();
    let mut w = intact.clone();
    let index = rule_index();
    // Rules are keyed on the last letter of the leading alphabetic run.
    while let Some(last) = w.iter().position(|c| !c.is_alphabetic()).unwrap_or(w.len()).checked_sub(1) {
        let Some(rules) = index.get(&w[last]) else {
            break;
        };
        let fired = rules.iter().find(|rule| {
            w.ends_with(&rule.ending)
                && (!rule.intact_only || w == intact)
                && acceptable(&w, rule.remove)
        });
        let Some(rule) = fired else {
            break;
        };
        let keep = w.len() - rule.remove;
        w.truncate(keep);
        w.extend(rule.append.chars());
        if !rule.continues {
            break;
        }
    }
    w.into_iter().collect()
}
