use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::compile::UndirectedGraph;
use crate::error::Error;
use crate::model::VarId;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Heuristic {
    /// Smallest joint state space of the vertex and its neighbors.
    #[default]
    MinWeight,
    /// Fewest fill-in edges.
    MinFill,
}

impl FromStr for Heuristic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "min-weight" => Ok(Heuristic::MinWeight),
            "min-fill" => Ok(Heuristic::MinFill),
            other => Err(Error::Argument(format!(
                "unknown heuristic `{other}` (expected min-weight or min-fill)"
            ))),
        }
    }
}

impl fmt::Display for Heuristic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Heuristic::MinWeight => "min-weight",
            Heuristic::MinFill => "min-fill",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Triangulation {
    pub order: Vec<VarId>,
    pub fillins: BTreeSet<(VarId, VarId)>,
    /// `{v} ∪ neighbors(v)` at the moment each vertex was eliminated, in order.
    pub elimination_cliques: Vec<Vec<VarId>>,
}

impl Triangulation {
    /// Elimination cliques not contained in another, in order of creation.
    pub fn maximal_cliques(&self) -> Vec<Vec<VarId>> {
        let cs = &self.elimination_cliques;
        let mut out: Vec<Vec<VarId>> = Vec::new();
        for (i, c) in cs.iter().enumerate() {
            let dominated = cs.iter().enumerate().any(|(j, d)| {
                j != i && d.len() >= c.len() && c.iter().all(|v| d.contains(v)) && (d.len() > c.len() || j < i)
            });
            if !dominated {
                out.push(c.clone());
            }
        }
        out
    }
}

fn cost(g: &UndirectedGraph, alive: &[bool], cards: &[usize], v: VarId, heuristic: Heuristic) -> u128 {
    let nbrs: Vec<VarId> = g.neighbors(v).iter().copied().filter(|n| alive[n.0]).collect();
    match heuristic {
        Heuristic::MinWeight => nbrs
            .iter()
            .fold(cards[v.0] as u128, |acc, n| acc.saturating_mul(cards[n.0] as u128)),
        Heuristic::MinFill => {
            let mut missing = 0u128;
            for (i, a) in nbrs.iter().enumerate() {
                for b in &nbrs[i + 1..] {
                    if !g.has_edge(*a, *b) {
                        missing += 1;
                    }
                }
            }
            missing
        }
    }
}

/// Greedy elimination; ties go to the lowest variable id.
pub fn triangulate(g: &UndirectedGraph, cards: &[usize], heuristic: Heuristic) -> Triangulation {
    let n = g.len();
    let mut work = g.clone();
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    let mut fillins = BTreeSet::new();
    let mut elimination_cliques = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&i| alive[i])
            .map(VarId)
            .min_by_key(|&v| (cost(&work, &alive, cards, v, heuristic), v))
            .expect("a live vertex remains");
        let nbrs: Vec<VarId> = work.neighbors(v).iter().copied().filter(|u| alive[u.0]).collect();
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if !work.has_edge(a, b) {
                    work.add_edge(a, b);
                    fillins.insert((a.min(b), a.max(b)));
                }
            }
        }
        let mut clique = nbrs;
        clique.push(v);
        clique.sort_unstable();
        elimination_cliques.push(clique);
        alive[v.0] = false;
        order.push(v);
    }
    Triangulation {
        order,
        fillins,
        elimination_cliques,
    }
}

/// Fill-in edges produced by eliminating in a fixed `order`.
pub fn fill_for_order(g: &UndirectedGraph, order: &[VarId]) -> BTreeSet<(VarId, VarId)> {
    let mut work = g.clone();
    let mut alive = vec![true; g.len()];
    let mut fill = BTreeSet::new();
    for &v in order {
        let nbrs: Vec<VarId> = work.neighbors(v).iter().copied().filter(|u| alive[u.0]).collect();
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if !work.has_edge(a, b) {
                    work.add_edge(a, b);
                    fill.insert((a.min(b), a.max(b)));
                }
            }
        }
        alive[v.0] = false;
    }
    fill
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::moralize;
    use crate::fixtures;

    fn graph(n: usize, edges: &[(usize, usize)]) -> UndirectedGraph {
        let mut g = UndirectedGraph::new(n);
        for &(a, b) in edges {
            g.add_edge(VarId(a), VarId(b));
        }
        g
    }

    #[test]
    fn chordal_triangle_needs_no_fill() {
        let g = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        for h in [Heuristic::MinWeight, Heuristic::MinFill] {
            let t = triangulate(&g, &[2, 2, 2], h);
            assert!(t.fillins.is_empty());
            assert_eq!(t.maximal_cliques(), vec![vec![VarId(0), VarId(1), VarId(2)]]);
        }
    }

    #[test]
    fn four_cycle_gets_one_chord() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        for h in [Heuristic::MinWeight, Heuristic::MinFill] {
            let t = triangulate(&g, &[2; 4], h);
            assert_eq!(t.fillins.len(), 1);
            let (a, b) = *t.fillins.iter().next().unwrap();
            assert!(!g.has_edge(a, b));
        }
    }

    #[test]
    fn returned_order_is_zero_fill_on_filled_graph() {
        let bn = fixtures::nine_var();
        let g = moralize(&bn);
        for h in [Heuristic::MinWeight, Heuristic::MinFill] {
            let t = triangulate(&g, &bn.cardinalities(), h);
            let mut filled = g.clone();
            for &(a, b) in &t.fillins {
                filled.add_edge(a, b);
            }
            assert!(fill_for_order(&filled, &t.order).is_empty());
        }
    }

    // Exhaustive minimum over all elimination orders, by dynamic programming
    // over the set of already-eliminated vertices.
    fn optimal_max_clique(g: &UndirectedGraph) -> usize {
        let n = g.len();
        let clique_size = |eliminated: u32, v: usize| -> usize {
            // vertices outside `eliminated` reachable from v through eliminated ones
            let mut seen = 1u32 << v;
            let mut stack = vec![v];
            let mut count = 1;
            while let Some(u) = stack.pop() {
                for w in g.neighbors(VarId(u)) {
                    let bit = 1u32 << w.0;
                    if seen & bit != 0 {
                        continue;
                    }
                    seen |= bit;
                    if eliminated & bit != 0 {
                        stack.push(w.0);
                    } else {
                        count += 1;
                    }
                }
            }
            count
        };
        let mut best = vec![usize::MAX; 1 << n];
        best[0] = 0;
        for s in 0..(1u32 << n) {
            if best[s as usize] == usize::MAX {
                continue;
            }
            for v in 0..n {
                if s & (1 << v) == 0 {
                    let next = (s | (1 << v)) as usize;
                    let c = best[s as usize].max(clique_size(s, v));
                    best[next] = best[next].min(c);
                }
            }
        }
        best[(1 << n) - 1]
    }

    #[test]
    fn nine_var_min_weight_reaches_optimal_clique_size() {
        let bn = fixtures::nine_var();
        let g = moralize(&bn);
        assert_eq!(optimal_max_clique(&g), 3);
        let t = triangulate(&g, &bn.cardinalities(), Heuristic::MinWeight);
        let cliques = t.maximal_cliques();
        assert!(cliques.iter().all(|c| c.len() == 3), "{cliques:?}");
        assert_eq!(cliques.len(), 7);
    }

    #[test]
    fn deterministic() {
        let bn = fixtures::nine_var();
        let g = moralize(&bn);
        let a = triangulate(&g, &bn.cardinalities(), Heuristic::MinFill);
        let b = triangulate(&g, &bn.cardinalities(), Heuristic::MinFill);
        assert_eq!(a, b);
    }

    #[test]
    fn heuristic_names_round_trip() {
        for h in [Heuristic::MinWeight, Heuristic::MinFill] {
            assert_eq!(h.to_string().parse::<Heuristic>().unwrap(), h);
        }
        assert!("greedy".parse::<Heuristic>().is_err());
    }
}
