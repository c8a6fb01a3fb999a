//! Small hand-built networks used by the tests, the acceptance suite and the
//! CLI examples.

use crate::compile::JunctionTree;
use crate::model::BayesianNetwork;
use crate::parser::{parse_junction_tree, parse_network};

pub const NINE_VAR_NET: &str = include_str!("../fixtures/nine.net");
pub const NINE_VAR_JT: &str = include_str!("../fixtures/nine.jt");
pub const DSEP_NET: &str = include_str!("../fixtures/dsep.net");

/// `A -> B` with `P(A) = [0.3, 0.7]`, `P(B|A) = [0.5, 0.5, 0.2, 0.8]`.
pub fn two_var() -> BayesianNetwork {
    let mut b = BayesianNetwork::builder("ab");
    let a = b.add_variable("A", ["a0", "a1"]).unwrap();
    let bb = b.add_variable("B", ["b0", "b1"]).unwrap();
    b.set_cpd(a, vec![], vec![0.3, 0.7]).unwrap();
    b.set_cpd(bb, vec![a], vec![0.5, 0.5, 0.2, 0.8]).unwrap();
    b.build().unwrap()
}

/// `A -> B -> C`.
pub fn chain3() -> BayesianNetwork {
    let mut b = BayesianNetwork::builder("chain");
    let a = b.add_variable("A", ["0", "1"]).unwrap();
    let m = b.add_variable("B", ["0", "1"]).unwrap();
    let c = b.add_variable("C", ["0", "1"]).unwrap();
    b.set_cpd(a, vec![], vec![0.3, 0.7]).unwrap();
    b.set_cpd(m, vec![a], vec![0.5, 0.5, 0.2, 0.8]).unwrap();
    b.set_cpd(c, vec![m], vec![0.9, 0.1, 0.4, 0.6]).unwrap();
    b.build().unwrap()
}

/// `A -> C <- B`.
pub fn collider() -> BayesianNetwork {
    let mut b = BayesianNetwork::builder("collider");
    let a = b.add_variable("A", ["0", "1"]).unwrap();
    let bb = b.add_variable("B", ["0", "1"]).unwrap();
    let c = b.add_variable("C", ["0", "1"]).unwrap();
    b.set_cpd(a, vec![], vec![0.3, 0.7]).unwrap();
    b.set_cpd(bb, vec![], vec![0.6, 0.4]).unwrap();
    b.set_cpd(c, vec![a, bb], vec![0.9, 0.1, 0.5, 0.5, 0.3, 0.7, 0.2, 0.8]).unwrap();
    b.build().unwrap()
}

/// Nine-variable network `A..I` whose junction tree has the seven
/// three-variable cliques ABF, ACF, ADF, BEF, EFH, DFG, FGI.
pub fn nine_var() -> BayesianNetwork {
    parse_network(NINE_VAR_NET).expect("nine_var fixture parses")
}

/// The pinned tree for [`nine_var`], rooted at ABF (clique 0).
pub fn nine_var_tree(bn: &BayesianNetwork) -> JunctionTree {
    parse_junction_tree(NINE_VAR_JT, bn).expect("nine_var tree parses")
}

/// `A -> C -> E`, `A -> D -> F <- E`: A and E are independent given C, and
/// dependent again once F is observed as well.
pub fn dsep_pattern() -> BayesianNetwork {
    parse_network(DSEP_NET).expect("dsep fixture parses")
}

/// Core `A -> B`; for each `i`, `B -> D_i`, `B -> E_i` and the collider
/// `D_i, E_i -> F_i`. The `F_i` are barren until observed.
pub fn collider_triples(triples: usize) -> BayesianNetwork {
    let mut b = BayesianNetwork::builder(format!("colliders{triples}"));
    let a = b.add_variable("A", ["0", "1"]).unwrap();
    let core = b.add_variable("B", ["0", "1"]).unwrap();
    b.set_cpd(a, vec![], vec![0.45, 0.55]).unwrap();
    b.set_cpd(core, vec![a], vec![0.7, 0.3, 0.2, 0.8]).unwrap();
    for i in 1..=triples {
        let d = b.add_variable(format!("D{i}"), ["0", "1"]).unwrap();
        let e = b.add_variable(format!("E{i}"), ["0", "1"]).unwrap();
        let f = b.add_variable(format!("F{i}"), ["0", "1"]).unwrap();
        let shift = (i % 7) as f64 * 0.05;
        b.set_cpd(d, vec![core], vec![0.6 - shift, 0.4 + shift, 0.25, 0.75]).unwrap();
        b.set_cpd(e, vec![core], vec![0.3, 0.7, 0.8 - shift, 0.2 + shift]).unwrap();
        b.set_cpd(f, vec![d, e], vec![0.9, 0.1, 0.6, 0.4, 0.35, 0.65, 0.05 + shift, 0.95 - shift])
            .unwrap();
    }
    b.build().unwrap()
}
