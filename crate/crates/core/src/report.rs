//! Renderers for every report artifact. The CLI writes these strings to disk
//! and the service returns them as response bodies, so both produce the
//! same bytes.

use serde::Serialize;

use crate::annotate::{CountTable, GroupBy, PresencePartition};
use crate::corpus::Corpus;
use crate::variation::{StabilityCell, SweepRow};

fn csv_string(records: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    for record in records {
        writer.write_record(&record).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv output is UTF-8")
}

/// Pretty JSON with a trailing newline.
pub fn json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("report value serializes") + "\n"
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StatsRow {
    pub corpus: String,
    pub texts: usize,
    pub symbols: usize,
    pub words: usize,
}

pub fn stats_rows(corpora: &[Corpus]) -> Vec<StatsRow> {
    corpora
        .iter()
        .map(|c| {
            let s = c.stats();
            StatsRow { corpus: c.id.clone(), texts: s.text_count, symbols: s.symbol_count, words: s.word_count }
        })
        .collect()
}

pub fn stats_csv(corpora: &[Corpus]) -> String {
    let header = ["corpus", "texts", "symbols", "words"].map(String::from).to_vec();
    csv_string(std::iter::once(header).chain(
        stats_rows(corpora)
            .into_iter()
            .map(|r| vec![r.corpus, r.texts.to_string(), r.symbols.to_string(), r.words.to_string()]),
    ))
}

pub fn counts_csv(table: &CountTable) -> String {
    let first = match table.group_by {
        GroupBy::Label => "label",
        GroupBy::Value => "value",
    };
    let header = std::iter::once(first.to_string()).chain(table.columns.iter().cloned()).collect();
    let rows = table
        .rows
        .iter()
        .zip(&table.counts)
        .map(|(row, counts)| std::iter::once(row.clone()).chain(counts.iter().map(u64::to_string)).collect());
    csv_string(std::iter::once(header).chain(rows))
}

pub fn venn_json(partition: &PresencePartition) -> String {
    json(partition)
}

pub fn sweep_csv(rows: &[(String, SweepRow)]) -> String {
    let header = ["corpus", "theta", "edges", "components"].map(String::from).to_vec();
    csv_string(std::iter::once(header).chain(rows.iter().map(|(corpus, r)| {
        vec![corpus.clone(), r.theta.to_string(), r.edges.to_string(), r.components.to_string()]
    })))
}

pub fn stability_csv(cells: &[StabilityCell]) -> String {
    let header = ["corpus", "label", "partner", "together", "runs", "frequency"].map(String::from).to_vec();
    csv_string(std::iter::once(header).chain(cells.iter().map(|c| {
        vec![
            c.corpus_id.clone(),
            c.label.clone(),
            c.partner.clone(),
            c.together.to_string(),
            c.runs.to_string(),
            format!("{:.2}", c.frequency),
        ]
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Text;

    #[test]
    fn stats_by_hand() {
        let corpus = Corpus::new("x", vec![Text::new("x", "a", "one two.".into())]).unwrap();
        assert_eq!(stats_csv(&[corpus]), "corpus,texts,symbols,words\nx,1,8,2\n");
    }

    #[test]
    fn counts_layout() {
        let table = CountTable {
            group_by: GroupBy::Value,
            per: crate::annotate::Per::Corpus,
            rows: vec!["Power".into(), "Self-Direction".into()],
            columns: vec!["a".into(), "b".into()],
            counts: vec![vec![1, 0], vec![2, 3]],
        };
        assert_eq!(counts_csv(&table), "value,a,b\nPower,1,0\nSelf-Direction,2,3\n");
    }

    #[test]
    fn sweep_layout() {
        let rows = vec![("x".to_string(), SweepRow { theta: 0.5, edges: 3, components: 2 })];
        assert_eq!(sweep_csv(&rows), "corpus,theta,edges,components\nx,0.5,3,2\n");
    }
}
