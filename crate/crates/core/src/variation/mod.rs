//! Label similarity graphs per slice, clique-percolation communities, and
//! their comparison across corpora.

mod cpm;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::annotate::PresencePartition;
use crate::embed::Embedding;

pub const DEFAULT_THETA: f64 = 0.5;
pub const DEFAULT_K: usize = 2;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum VariationError {
    #[error("labels missing from the vocabulary: {}", .0.join(", "))]
    MissingLabels(Vec<String>),
    #[error("theta {0} outside [-1, 1]")]
    InvalidTheta(f64),
    #[error("k must be at least 2, got {0}")]
    InvalidK(usize),
    #[error("threshold grid must be non-empty and ascending")]
    InvalidGrid,
    #[error("inconsistent parameters across slices: {0}")]
    Inconsistent(String),
    #[error("edge endpoint {0:?} is not a node")]
    UnknownNode(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: String,
    pub target: String,
    pub weight: f64,
}

/// Undirected, no self-loops; `source < target` within each edge and edges
/// sorted, so equal graphs serialize identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityGraph {
    pub corpus_id: String,
    pub theta: f64,
    pub nodes: Vec<String>,
    pub edges: Vec<Edge>,
}

impl SimilarityGraph {
    /// Builds a graph from explicit edges; self-loops and duplicates are dropped.
    pub fn from_edges(
        corpus_id: &str,
        theta: f64,
        nodes: Vec<String>,
        edges: impl IntoIterator<Item = (String, String, f64)>,
    ) -> Result<SimilarityGraph, VariationError> {
        let known: BTreeSet<&str> = nodes.iter().map(String::as_str).collect();
        let mut unique: BTreeMap<(String, String), f64> = BTreeMap::new();
        for (a, b, w) in edges {
            for end in [&a, &b] {
                if !known.contains(end.as_str()) {
                    return Err(VariationError::UnknownNode(end.clone()));
                }
            }
            if a != b {
                let key = if a < b { (a, b) } else { (b, a) };
                unique.entry(key).or_insert(w);
            }
        }
        let mut nodes = nodes;
        nodes.sort();
        nodes.dedup();
        let edges = unique
            .into_iter()
            .map(|((source, target), weight)| Edge { source, target, weight })
            .collect();
        Ok(SimilarityGraph { corpus_id: corpus_id.to_string(), theta, nodes, edges })
    }

    fn adjacency(&self) -> Vec<BTreeSet<usize>> {
        let index: BTreeMap<&str, usize> = self.nodes.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let mut adjacency = vec![BTreeSet::new(); self.nodes.len()];
        for edge in &self.edges {
            let (a, b) = (index[edge.source.as_str()], index[edge.target.as_str()]);
            adjacency[a].insert(b);
            adjacency[b].insert(a);
        }
        adjacency
    }

    /// Connected components including isolated nodes.
    pub fn component_count(&self) -> usize {
        cpm::components(&self.adjacency()).len()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes") + "\n"
    }
}

fn check_theta(theta: f64) -> Result<(), VariationError> {
    if (-1.0..=1.0).contains(&theta) {
        Ok(())
    } else {
        Err(VariationError::InvalidTheta(theta))
    }
}

/// Pairwise cosines of `labels` (deduplicated and sorted) in `model`.
fn cosine_table(model: &impl Embedding, labels: &[String]) -> Result<(Vec<String>, Vec<Vec<f64>>), VariationError> {
    let mut nodes = labels.to_vec();
    nodes.sort();
    nodes.dedup();
    let missing: Vec<String> = nodes.iter().filter(|l| !model.vocab().contains(l)).cloned().collect();
    if !missing.is_empty() {
        return Err(VariationError::MissingLabels(missing));
    }
    let vectors: Vec<&[f64]> = nodes.iter().map(|l| model.vector(l).expect("checked above")).collect();
    let table = vectors
        .iter()
        .map(|a| vectors.iter().map(|b| crate::embed::cosine_vectors(a, b)).collect())
        .collect();
    Ok((nodes, table))
}

fn graph_from_table(corpus_id: &str, theta: f64, nodes: &[String], table: &[Vec<f64>]) -> SimilarityGraph {
    let mut edges = Vec::new();
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            if table[i][j] >= theta {
                edges.push(Edge { source: nodes[i].clone(), target: nodes[j].clone(), weight: table[i][j] });
            }
        }
    }
    SimilarityGraph { corpus_id: corpus_id.to_string(), theta, nodes: nodes.to_vec(), edges }
}

/// Graph on `labels` with an edge wherever the cosine of their target vectors
/// is at least `theta`.
pub fn label_graph(
    model: &impl Embedding,
    corpus_id: &str,
    labels: &[String],
    theta: f64,
) -> Result<SimilarityGraph, VariationError> {
    check_theta(theta)?;
    let (nodes, table) = cosine_table(model, labels)?;
    Ok(graph_from_table(corpus_id, theta, &nodes, &table))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Community {
    pub members: Vec<String>,
    pub k: usize,
}

impl Community {
    pub fn contains(&self, label: &str) -> bool {
        self.members.iter().any(|m| m == label)
    }
}

/// k-clique communities of one slice's graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunitySet {
    pub corpus_id: String,
    pub theta: f64,
    pub k: usize,
    pub communities: Vec<Vec<String>>,
}

impl CommunitySet {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("communities serialize") + "\n"
    }

    pub fn communities(&self) -> Vec<Community> {
        self.communities.iter().map(|m| Community { members: m.clone(), k: self.k }).collect()
    }
}

/// Communities formed by k-cliques connected through (k-1)-node overlaps,
/// members sorted and communities sorted. For k = 2 these are the connected
/// components with at least two nodes.
pub fn clique_percolation(graph: &SimilarityGraph, k: usize) -> Result<Vec<Community>, VariationError> {
    if k < 2 {
        return Err(VariationError::InvalidK(k));
    }
    let mut communities: Vec<Community> = cpm::percolate(&graph.adjacency(), k)
        .into_iter()
        .map(|group| {
            let mut members: Vec<String> = group.into_iter().map(|i| graph.nodes[i].clone()).collect();
            members.sort();
            Community { members, k }
        })
        .collect();
    communities.sort();
    Ok(communities)
}

pub fn community_set(graph: &SimilarityGraph, k: usize) -> Result<CommunitySet, VariationError> {
    Ok(CommunitySet {
        corpus_id: graph.corpus_id.clone(),
        theta: graph.theta,
        k,
        communities: clique_percolation(graph, k)?.into_iter().map(|c| c.members).collect(),
    })
}

pub fn community_of<'a>(communities: &'a [Community], seed: &str) -> Vec<&'a Community> {
    communities.iter().filter(|c| c.contains(seed)).collect()
}

/// Presence partition of every label sharing a community with `seed`, the seed
/// included, across slices. Regions are keyed by the bitmask of slices.
pub fn compare_across(slices: &[CommunitySet], seed: &str) -> Result<PresencePartition, VariationError> {
    if let Some(first) = slices.first() {
        for s in &slices[1..] {
            if s.k != first.k || s.theta != first.theta {
                return Err(VariationError::Inconsistent(format!(
                    "{} uses k={} theta={}, {} uses k={} theta={}",
                    first.corpus_id, first.k, first.theta, s.corpus_id, s.k, s.theta
                )));
            }
        }
    }
    let names = slices.iter().map(|s| s.corpus_id.clone()).collect();
    let members: Vec<BTreeSet<String>> = slices
        .iter()
        .map(|s| {
            s.communities
                .iter()
                .filter(|c| c.iter().any(|m| m == seed))
                .flatten()
                .cloned()
                .collect()
        })
        .collect();
    Ok(PresencePartition::build(names, &members))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub theta: f64,
    pub edges: usize,
    pub components: usize,
}

/// Edge and component counts at each threshold of an ascending grid.
pub fn threshold_sweep(
    model: &impl Embedding,
    corpus_id: &str,
    labels: &[String],
    grid: &[f64],
) -> Result<Vec<SweepRow>, VariationError> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(VariationError::InvalidGrid);
    }
    for &theta in grid {
        check_theta(theta)?;
    }
    let (nodes, table) = cosine_table(model, labels)?;
    Ok(grid
        .iter()
        .map(|&theta| {
            let graph = graph_from_table(corpus_id, theta, &nodes, &table);
            SweepRow { theta, edges: graph.edges.len(), components: graph.component_count() }
        })
        .collect())
}

/// How often `label` shares a community with `partner` in one corpus over a
/// series of runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityCell {
    pub corpus_id: String,
    pub label: String,
    pub partner: String,
    pub together: usize,
    pub runs: usize,
    pub frequency: f64,
}

/// `runs[r]` holds the community sets of every slice in run `r`.
pub fn cocluster_stability(runs: &[Vec<CommunitySet>], queries: &[(&str, &str, &str)]) -> Vec<StabilityCell> {
    queries
        .iter()
        .map(|&(corpus_id, label, partner)| {
            let together = runs
                .iter()
                .filter(|run| {
                    run.iter()
                        .filter(|s| s.corpus_id == corpus_id)
                        .flat_map(|s| &s.communities)
                        .any(|c| c.iter().any(|m| m == label) && c.iter().any(|m| m == partner))
                })
                .count();
            StabilityCell {
                corpus_id: corpus_id.to_string(),
                label: label.to_string(),
                partner: partner.to_string(),
                together,
                runs: runs.len(),
                frequency: if runs.is_empty() { 0.0 } else { together as f64 / runs.len() as f64 },
            }
        })
        .collect()
}
