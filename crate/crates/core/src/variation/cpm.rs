//! k-clique percolation on small undirected graphs given as adjacency sets.

use std::collections::BTreeSet;

/// Union-find with path halving.
pub(crate) struct Partition {
    parent: Vec<usize>,
}

impl Partition {
    pub(crate) fn new(n: usize) -> Self {
        Partition { parent: (0..n).collect() }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.parent[a.max(b)] = a.min(b);
        }
    }

    /// Groups of indices by root, each sorted, in order of smallest member.
    pub(crate) fn groups(&mut self) -> Vec<Vec<usize>> {
        let n = self.parent.len();
        let mut by_root: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..n {
            let r = self.find(i);
            by_root[r].push(i);
        }
        by_root.into_iter().filter(|g| !g.is_empty()).collect()
    }
}

/// Connected components as sorted node lists.
pub(crate) fn components(adjacency: &[BTreeSet<usize>]) -> Vec<Vec<usize>> {
    let mut partition = Partition::new(adjacency.len());
    for (a, neighbours) in adjacency.iter().enumerate() {
        for &b in neighbours {
            partition.union(a, b);
        }
    }
    partition.groups()
}

/// All maximal cliques, by Bron–Kerbosch with a pivot of maximum degree in P ∪ X.
pub(crate) fn maximal_cliques(adjacency: &[BTreeSet<usize>]) -> Vec<Vec<usize>> {
    fn expand(
        adjacency: &[BTreeSet<usize>],
        r: &mut Vec<usize>,
        p: BTreeSet<usize>,
        mut x: BTreeSet<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if p.is_empty() {
            if x.is_empty() && !r.is_empty() {
                let mut clique = r.clone();
                clique.sort_unstable();
                out.push(clique);
            }
            return;
        }
        let pivot = p
            .iter()
            .chain(&x)
            .copied()
            .max_by_key(|&u| (adjacency[u].intersection(&p).count(), std::cmp::Reverse(u)))
            .expect("p is non-empty");
        let candidates: Vec<usize> = p.difference(&adjacency[pivot]).copied().collect();
        let mut p = p;
        for v in candidates {
            r.push(v);
            let next_p = p.intersection(&adjacency[v]).copied().collect();
            let next_x = x.intersection(&adjacency[v]).copied().collect();
            expand(adjacency, r, next_p, next_x, out);
            r.pop();
            p.remove(&v);
            x.insert(v);
        }
    }

    let mut out = Vec::new();
    let all: BTreeSet<usize> = (0..adjacency.len()).collect();
    expand(adjacency, &mut Vec::new(), all, BTreeSet::new(), &mut out);
    out.sort();
    out
}

/// k-clique communities as sorted node lists, sorted. Maximal cliques of at
/// least k nodes are joined when they share at least k-1 nodes; every
/// k-clique lies inside exactly one such union.
pub(crate) fn percolate(adjacency: &[BTreeSet<usize>], k: usize) -> Vec<Vec<usize>> {
    assert!(k >= 2, "k must be at least 2");
    let mut communities: Vec<Vec<usize>> = if k == 2 {
        components(adjacency).into_iter().filter(|c| c.len() >= 2).collect()
    } else {
        let cliques: Vec<Vec<usize>> = maximal_cliques(adjacency).into_iter().filter(|c| c.len() >= k).collect();
        let mut partition = Partition::new(cliques.len());
        for i in 0..cliques.len() {
            for j in i + 1..cliques.len() {
                let shared = cliques[i].iter().filter(|v| cliques[j].binary_search(v).is_ok()).count();
                if shared >= k - 1 {
                    partition.union(i, j);
                }
            }
        }
        partition
            .groups()
            .into_iter()
            .map(|group| {
                let members: BTreeSet<usize> = group.iter().flat_map(|&i| cliques[i].iter().copied()).collect();
                members.into_iter().collect()
            })
            .collect()
    };
    communities.sort();
    communities
}
