//! Agreement of the three stemmers with reference output on a bundled
//! 30k-word vocabulary (`tests/data/stemmer_reference.tsv`: word, snowball,
//! porter, lancaster).

use valuescope_core::generalize::Strategy;

const REFERENCE: &str = include_str!("data/stemmer_reference.tsv");

fn agreement(column: usize, strategy: Strategy) -> (usize, usize, Vec<String>) {
    let mut total = 0;
    let mut agree = 0;
    let mut misses = Vec::new();
    for line in REFERENCE.lines() {
        let fields: Vec<&str> = line.split('\t').collect();
        let (word, expected) = (fields[0], fields[column]);
        let got = strategy.generalize(word);
        total += 1;
        if got == expected {
            agree += 1;
        } else if misses.len() < 20 {
            misses.push(format!("{word}: expected {expected}, got {got}"));
        }
    }
    (agree, total, misses)
}

fn check(column: usize, strategy: Strategy) {
    let (agree, total, misses) = agreement(column, strategy);
    assert!(total >= 30_000);
    let rate = agree as f64 / total as f64;
    println!("{strategy}: {agree}/{total} = {rate:.5}");
    assert!(rate >= 0.999, "{strategy} agreement {rate}: {misses:#?}");
}

#[test]
fn snowball_matches_reference() {
    check(1, Strategy::Snowball);
}

#[test]
fn porter_matches_reference() {
    check(2, Strategy::Porter);
}

#[test]
fn lancaster_matches_reference() {
    check(3, Strategy::Lancaster);
}
