//! Secondary structure: moral graph, triangulation, junction tree.

mod graph;
mod jtree;
mod triangulate;

pub use graph::{moralize, UndirectedGraph};
pub use jtree::{assign_potentials, build_junction_tree, verify_rip, JunctionTree};
pub use triangulate::{fill_for_order, triangulate, Heuristic, Triangulation};

use crate::error::Result;
use crate::model::BayesianNetwork;

/// Moralize, triangulate, join the maximal cliques and assign every CPD.
pub fn compile(bn: &BayesianNetwork, heuristic: Heuristic) -> Result<JunctionTree> {
    let moral = moralize(bn);
    let cards = bn.cardinalities();
    let tri = triangulate(&moral, &cards, heuristic);
    let jt = build_junction_tree(tri.maximal_cliques(), &cards);
    verify_rip(&jt)?;
    assign_potentials(jt, bn)
}
