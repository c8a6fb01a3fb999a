use std::collections::VecDeque;

use petgraph::unionfind::UnionFind;

use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, VarId};

/// Cliques joined by separators, plus the CPD-to-clique assignment.
///
/// Edges form a forest. Every edge carries the separator `C_i ∩ C_j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JunctionTree {
    cliques: Vec<Vec<VarId>>,
    edges: Vec<(usize, usize)>,
    separators: Vec<Vec<VarId>>,
    /// Per clique: `(neighbor clique, edge index)`, ascending by neighbor.
    adjacency: Vec<Vec<(usize, usize)>>,
    component: Vec<usize>,
    /// Clique index per CPD (indexed by child variable); empty until assigned.
    assignment: Vec<usize>,
}

fn intersect(a: &[VarId], b: &[VarId]) -> Vec<VarId> {
    a.iter().copied().filter(|v| b.binary_search(v).is_ok()).collect()
}

impl JunctionTree {
    /// Assemble a tree from explicit cliques and edges. Clique variable lists
    /// are sorted; edges must not close a cycle.
    pub fn new(cliques: Vec<Vec<VarId>>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let n = cliques.len();
        let mut cliques = cliques;
        for c in &mut cliques {
            c.sort_unstable();
            if c.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::JunctionTree("clique repeats a variable".into()));
            }
        }
        let mut uf = UnionFind::<usize>::new(n);
        let mut adjacency = vec![Vec::new(); n];
        let mut separators = Vec::with_capacity(edges.len());
        let mut normalized = Vec::with_capacity(edges.len());
        for (k, &(a, b)) in edges.iter().enumerate() {
            if a >= n || b >= n || a == b {
                return Err(Error::JunctionTree(format!("bad edge {a} -- {b}")));
            }
            if !uf.union(a, b) {
                return Err(Error::JunctionTree(format!(
                    "edge {a} -- {b} closes a cycle"
                )));
            }
            adjacency[a].push((b, k));
            adjacency[b].push((a, k));
            separators.push(intersect(&cliques[a], &cliques[b]));
            normalized.push((a.min(b), a.max(b)));
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        let labels = uf.into_labeling();
        let mut component = vec![usize::MAX; n];
        let mut next = 0;
        for i in 0..n {
            if component[i] == usize::MAX {
                for j in i..n {
                    if labels[j] == labels[i] {
                        component[j] = next;
                    }
                }
                next += 1;
            }
        }
        Ok(JunctionTree {
            cliques,
            edges: normalized,
            separators,
            adjacency,
            component,
            assignment: Vec::new(),
        })
    }

    pub fn cliques(&self) -> &[Vec<VarId>] {
        &self.cliques
    }

    pub fn clique(&self, i: usize) -> &[VarId] {
        &self.cliques[i]
    }

    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn separator(&self, edge: usize) -> &[VarId] {
        &self.separators[edge]
    }

    pub fn separators(&self) -> &[Vec<VarId>] {
        &self.separators
    }

    pub fn neighbors(&self, clique: usize) -> &[(usize, usize)] {
        &self.adjacency[clique]
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a].iter().find(|(n, _)| *n == b).map(|(_, e)| *e)
    }

    pub fn component_of(&self, clique: usize) -> usize {
        self.component[clique]
    }

    pub fn component_count(&self) -> usize {
        self.component.iter().max().map_or(0, |m| m + 1)
    }

    /// Lowest clique index of every component.
    pub fn roots(&self) -> Vec<usize> {
        let mut roots = Vec::new();
        for (i, &c) in self.component.iter().enumerate() {
            if c == roots.len() {
                roots.push(i);
            }
        }
        roots
    }

    pub fn is_assigned(&self) -> bool {
        !self.assignment.is_empty()
    }

    /// Clique holding the CPD of `var`.
    pub fn home_of(&self, var: VarId) -> usize {
        self.assignment[var.0]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// CPD variables assigned to `clique`, ascending.
    pub fn assigned_to(&self, clique: usize) -> Vec<VarId> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == clique)
            .map(|(v, _)| VarId(v))
            .collect()
    }

    /// Install an explicit assignment after checking each CPD fits its clique.
    pub fn with_assignment(mut self, bn: &BayesianNetwork, assignment: Vec<usize>) -> Result<Self> {
        if assignment.len() != bn.len() {
            return Err(Error::JunctionTree(format!(
                "{} CPDs assigned, network has {}",
                assignment.len(),
                bn.len()
            )));
        }
        for (v, &c) in assignment.iter().enumerate() {
            let domain = bn.cpd(VarId(v)).domain();
            if c >= self.cliques.len() || !domain.iter().all(|x| self.cliques[c].binary_search(x).is_ok()) {
                return Err(Error::JunctionTree(format!(
                    "CPD of {} does not fit in clique {c}",
                    bn.variable(VarId(v)).name
                )));
            }
        }
        self.assignment = assignment;
        Ok(self)
    }

    /// Path of clique indices from `a` to `b`, inclusive, if connected.
    pub fn path(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        let parent = self.bfs_parents(a);
        parent[b]?;
        let mut path = vec![b];
        let mut cur = b;
        while cur != a {
            cur = parent[cur].expect("on bfs tree");
            path.push(cur);
        }
        path.reverse();
        Some(path)
    }

    fn bfs_parents(&self, root: usize) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.cliques.len()];
        parent[root] = Some(root);
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            for &(w, _) in &self.adjacency[u] {
                if parent[w].is_none() {
                    parent[w] = Some(u);
                    queue.push_back(w);
                }
            }
        }
        parent
    }

    /// Collect-phase schedule toward `root`: `(from, to)` pairs, children
    /// before parents. Reversing it gives the distribute schedule.
    pub fn collect_schedule(&self, root: usize) -> Vec<(usize, usize)> {
        let parent = self.bfs_parents(root);
        let mut order = Vec::new();
        let mut stack = vec![(root, false)];
        // post-order: a clique is listed after all its children
        while let Some((u, done)) = stack.pop() {
            if done {
                if u != root {
                    order.push((u, parent[u].expect("reachable")));
                }
                continue;
            }
            stack.push((u, true));
            for &(w, _) in self.adjacency[u].iter().rev() {
                if parent[w] == Some(u) && w != root {
                    stack.push((w, false));
                }
            }
        }
        order
    }
}

/// Maximum-weight spanning forest of the clique graph, weight `|C_i ∩ C_j|`.
/// Ties prefer the smaller separator state space, then lexicographic indices.
pub fn build_junction_tree(cliques: Vec<Vec<VarId>>, cards: &[usize]) -> JunctionTree {
    let mut cliques = cliques;
    for c in &mut cliques {
        c.sort_unstable();
    }
    let n = cliques.len();
    let mut candidates = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let sep = intersect(&cliques[i], &cliques[j]);
            if !sep.is_empty() {
                let space: u128 = sep
                    .iter()
                    .fold(1u128, |acc, v| acc.saturating_mul(cards[v.0] as u128));
                candidates.push((std::cmp::Reverse(sep.len()), space, i, j));
            }
        }
    }
    candidates.sort_unstable();
    let mut uf = UnionFind::<usize>::new(n);
    let mut edges = Vec::new();
    for (_, _, i, j) in candidates {
        if uf.union(i, j) {
            edges.push((i, j));
        }
    }
    JunctionTree::new(cliques, edges).expect("spanning forest is acyclic")
}

/// Every pair of cliques shares only variables present on the whole path
/// between them. Cliques in different components must be disjoint.
pub fn verify_rip(jt: &JunctionTree) -> Result<()> {
    let n = jt.len();
    for a in 0..n {
        let parent = jt.bfs_parents(a);
        for b in a + 1..n {
            let shared = intersect(&jt.cliques[a], &jt.cliques[b]);
            if shared.is_empty() {
                continue;
            }
            if parent[b].is_none() {
                return Err(Error::RunningIntersection {
                    first: a,
                    second: b,
                    missing: shared[0],
                    at: "a disconnected component".into(),
                });
            }
            let mut cur = b;
            while cur != a {
                let up = parent[cur].expect("connected");
                let edge = jt.edge_between(cur, up).expect("tree edge");
                for &v in &shared {
                    if jt.separators[edge].binary_search(&v).is_err() {
                        return Err(Error::RunningIntersection {
                            first: a,
                            second: b,
                            missing: v,
                            at: format!("separator {cur} -- {up}"),
                        });
                    }
                    if jt.cliques[up].binary_search(&v).is_err() {
                        return Err(Error::RunningIntersection {
                            first: a,
                            second: b,
                            missing: v,
                            at: format!("clique {up}"),
                        });
                    }
                }
                cur = up;
            }
        }
    }
    Ok(())
}

/// Give each CPD to the lowest-index clique containing its whole domain.
pub fn assign_potentials(jt: JunctionTree, bn: &BayesianNetwork) -> Result<JunctionTree> {
    let mut assignment = Vec::with_capacity(bn.len());
    for v in bn.var_ids() {
        let domain = bn.cpd(v).domain();
        let home = jt
            .cliques
            .iter()
            .position(|c| domain.iter().all(|x| c.binary_search(x).is_ok()))
            .ok_or_else(|| {
                Error::JunctionTree(format!(
                    "no clique contains the family of {}",
                    bn.variable(v).name
                ))
            })?;
        assignment.push(home);
    }
    jt.with_assignment(bn, assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn vs(ids: &[usize]) -> Vec<VarId> {
        ids.iter().map(|&i| VarId(i)).collect()
    }

    #[test]
    fn single_clique_tree() {
        let jt = build_junction_tree(vec![vs(&[0, 1])], &[2, 2]);
        assert_eq!(jt.len(), 1);
        assert!(jt.edges().is_empty());
        verify_rip(&jt).unwrap();
        assert_eq!(jt.roots(), vec![0]);
    }

    #[test]
    fn two_cliques_forced_edge() {
        let jt = build_junction_tree(vec![vs(&[0, 1]), vs(&[1, 2])], &[2, 2, 2]);
        assert_eq!(jt.edges(), &[(0, 1)]);
        assert_eq!(jt.separator(0), &vs(&[1])[..]);
    }

    #[test]
    fn disjoint_cliques_form_forest() {
        let jt = build_junction_tree(vec![vs(&[0]), vs(&[1])], &[2, 2]);
        assert!(jt.edges().is_empty());
        assert_eq!(jt.component_count(), 2);
        assert_eq!(jt.roots(), vec![0, 1]);
        verify_rip(&jt).unwrap();
    }

    #[test]
    fn nine_var_clique_set_builds_expected_tree() {
        let bn = fixtures::nine_var();
        let id = |s: &str| bn.lookup(s).unwrap();
        let names = ["ABF", "ACF", "ADF", "BEF", "EFH", "DFG", "FGI"];
        let cliques: Vec<Vec<VarId>> = names
            .iter()
            .map(|n| n.chars().map(|c| id(&c.to_string())).collect())
            .collect();
        let jt = build_junction_tree(cliques, &bn.cardinalities());
        verify_rip(&jt).unwrap();
        let mut got: Vec<(&str, &str)> = jt
            .edges()
            .iter()
            .map(|&(a, b)| (names[a], names[b]))
            .collect();
        got.sort();
        assert_eq!(
            got,
            vec![
                ("ABF", "ACF"),
                ("ABF", "ADF"),
                ("ABF", "BEF"),
                ("ADF", "DFG"),
                ("BEF", "EFH"),
                ("DFG", "FGI"),
            ]
        );
        assert!(jt.separators().iter().all(|s| s.len() == 2));
    }

    #[test]
    fn rip_violation_is_named() {
        // {A,B} -- {B,C} -- {A,C}
        let jt = JunctionTree::new(vec![vs(&[0, 1]), vs(&[1, 2]), vs(&[0, 2])], vec![(0, 1), (1, 2)]).unwrap();
        match verify_rip(&jt) {
            Err(Error::RunningIntersection { first, second, missing, .. }) => {
                assert_eq!((first, second, missing), (0, 2, VarId(0)));
            }
            other => panic!("expected violation, got {other:?}"),
        }
    }

    #[test]
    fn cycle_rejected() {
        let err = JunctionTree::new(vec![vs(&[0]), vs(&[0]), vs(&[0])], vec![(0, 1), (1, 2), (2, 0)]);
        assert!(err.is_err());
    }

    #[test]
    fn nine_var_assignment() {
        let bn = fixtures::nine_var();
        let jt = fixtures::nine_var_tree(&bn);
        let id = |s: &str| bn.lookup(s).unwrap();
        let name_of = |c: usize| -> String {
            jt.clique(c).iter().map(|v| bn.variable(*v).name.clone()).collect()
        };
        assert_eq!(name_of(jt.home_of(id("H"))), "EFH");
        assert_eq!(name_of(jt.home_of(id("C"))), "ACF");
        assert_eq!(name_of(jt.home_of(id("F"))), "ACF");
        assert_eq!(jt.home_of(id("A")), 0);
        // recomputing the lowest-index rule agrees with the pinned file
        let again = assign_potentials(jt.clone(), &bn).unwrap();
        assert_eq!(again.assignment(), jt.assignment());
    }

    #[test]
    fn collect_schedule_is_children_first() {
        let bn = fixtures::nine_var();
        let jt = fixtures::nine_var_tree(&bn);
        let sched = jt.collect_schedule(0);
        assert_eq!(sched.len(), jt.edges().len());
        for (k, &(from, _)) in sched.iter().enumerate() {
            // every message into `from` precedes its own message
            for &(f2, t2) in &sched[k + 1..] {
                assert_ne!(t2, from, "{f2}->{t2} after {from}");
            }
        }
    }
}
