use std::collections::BTreeSet;

use crate::model::{BayesianNetwork, VarId};

/// Simple undirected graph over variable ids `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UndirectedGraph {
    adj: Vec<BTreeSet<VarId>>,
}

impl UndirectedGraph {
    pub fn new(n: usize) -> Self {
        UndirectedGraph {
            adj: vec![BTreeSet::new(); n],
        }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    /// Self-loops are ignored.
    pub fn add_edge(&mut self, a: VarId, b: VarId) {
        if a != b {
            self.adj[a.0].insert(b);
            self.adj[b.0].insert(a);
        }
    }

    pub fn has_edge(&self, a: VarId, b: VarId) -> bool {
        self.adj[a.0].contains(&b)
    }

    pub fn neighbors(&self, v: VarId) -> &BTreeSet<VarId> {
        &self.adj[v.0]
    }

    /// Every edge once, as `(low, high)`, in ascending order.
    pub fn edges(&self) -> Vec<(VarId, VarId)> {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(a, ns)| {
                ns.iter()
                    .filter(move |b| b.0 > a)
                    .map(move |b| (VarId(a), *b))
            })
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }
}

/// Drop edge directions and marry every pair of co-parents.
pub fn moralize(bn: &BayesianNetwork) -> UndirectedGraph {
    let mut g = UndirectedGraph::new(bn.len());
    for child in bn.var_ids() {
        let parents = bn.parents(child);
        for (i, &p) in parents.iter().enumerate() {
            g.add_edge(p, child);
            for &q in &parents[i + 1..] {
                g.add_edge(p, q);
            }
        }
    }
    g
}
