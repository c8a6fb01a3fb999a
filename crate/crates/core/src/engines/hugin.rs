use crate::compile::JunctionTree;
use crate::engines::{distribution, EngineKind, Propagated, PropagationTrace, Setup};
use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, Evidence, Factor, VarId};

/// Clique and separator potentials of the HUGIN architecture.
#[derive(Clone, Debug)]
pub struct HuginState<'a> {
    setup: Setup<'a>,
    cliques: Vec<Factor>,
    separators: Vec<Factor>,
    trace: PropagationTrace,
    prob_evidence: f64,
}

impl<'a> HuginState<'a> {
    /// `φ_C = ψ_C` and `φ_S = 1`.
    pub fn initialize(jt: &'a JunctionTree, bn: &'a BayesianNetwork, evidence: &Evidence) -> Result<Self> {
        let setup = Setup::new(jt, bn, evidence)?;
        let cliques = (0..jt.len()).map(|c| setup.clique_potential(c)).collect();
        let separators = setup.sep_domains.iter().map(|s| setup.unity(s)).collect();
        Ok(HuginState {
            setup,
            cliques,
            separators,
            trace: PropagationTrace::new(),
            prob_evidence: f64::NAN,
        })
    }

    pub fn clique(&self, c: usize) -> &Factor {
        &self.cliques[c]
    }

    pub fn separator(&self, edge: usize) -> &Factor {
        &self.separators[edge]
    }

    pub fn tree(&self) -> &JunctionTree {
        self.setup.jt
    }

    /// Unobserved variables of separator `edge`.
    pub fn separator_domain(&self, edge: usize) -> &[VarId] {
        &self.setup.sep_domains[edge]
    }
}

/// `to` absorbs from `from`: `φ*_S = Σ φ_from`, `φ_to ← φ_to · φ*_S / φ_S`.
pub fn hugin_absorb(state: &mut HuginState<'_>, from: usize, to: usize) -> Result<()> {
    let edge = state
        .setup
        .jt
        .edge_between(from, to)
        .ok_or_else(|| Error::Schedule(format!("cliques {from} and {to} are not adjacent")))?;
    let trace = &mut state.trace;
    let new_sep = trace.marginalize_onto(&state.cliques[from], &state.setup.sep_domains[edge])?;
    let ratio = trace.divide(&new_sep, &state.separators[edge])?;
    state.cliques[to] = trace.multiply(&state.cliques[to], &ratio)?;
    state.separators[edge] = new_sep;
    Ok(())
}

/// Initialize, collect to each component root, then distribute from it.
pub fn hugin_propagate<'a>(
    jt: &'a JunctionTree,
    bn: &'a BayesianNetwork,
    evidence: &Evidence,
) -> Result<HuginState<'a>> {
    let mut state = HuginState::initialize(jt, bn, evidence)?;
    let mut mass = 1.0;
    for root in jt.roots() {
        let schedule = jt.collect_schedule(root);
        for &(from, to) in &schedule {
            hugin_absorb(&mut state, from, to)?;
        }
        for &(child, parent) in schedule.iter().rev() {
            hugin_absorb(&mut state, parent, child)?;
        }
        let component_mass = state.cliques[root].total();
        if component_mass <= 0.0 {
            return Err(Error::ImpossibleEvidence);
        }
        mass *= component_mass;
    }
    state.prob_evidence = mass;
    Ok(state)
}

impl Propagated for HuginState<'_> {
    fn engine(&self) -> EngineKind {
        EngineKind::Hugin
    }

    fn trace(&self) -> &PropagationTrace {
        &self.trace
    }

    fn marginal(&self, v: VarId) -> Result<Vec<f64>> {
        let c = self.setup.query_clique(v)?;
        if let Some(d) = self.setup.observed_marginal(v) {
            return Ok(d);
        }
        distribution(&self.cliques[c], v, self.setup.bn.cardinality(v))
    }

    fn prob_evidence(&self) -> f64 {
        self.prob_evidence
    }

    fn network(&self) -> &BayesianNetwork {
        self.setup.bn
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::{compile, Heuristic};
    use crate::fixtures;

    #[test]
    fn absorb_updates_separator() {
        let bn = fixtures::chain3();
        let jt = compile(&bn, Heuristic::MinWeight).unwrap();
        let mut st = HuginState::initialize(&jt, &bn, &Evidence::new()).unwrap();
        let ab = (0..jt.len()).find(|&c| jt.clique(c) == [VarId(0), VarId(1)]).unwrap();
        let bc = (0..jt.len()).find(|&c| jt.clique(c) == [VarId(1), VarId(2)]).unwrap();
        // ψ_AB = P(A) P(B|A) = [0.15, 0.15, 0.14, 0.56]
        for (x, y) in st.clique(ab).values().iter().zip([0.15, 0.15, 0.14, 0.56]) {
            assert!((x - y).abs() < 1e-12);
        }
        hugin_absorb(&mut st, ab, bc).unwrap();
        let sep = st.separator(0).values().to_vec();
        assert!((sep[0] - 0.29).abs() < 1e-12 && (sep[1] - 0.71).abs() < 1e-12);
        let once = st.clique(bc).clone();
        hugin_absorb(&mut st, ab, bc).unwrap();
        for (x, y) in st.clique(bc).values().iter().zip(once.values()) {
            assert!((x - y).abs() < 1e-15);
        }
        assert!(hugin_absorb(&mut st, ab, ab).is_err());
    }

    #[test]
    fn calibrated_after_full_round() {
        let bn = fixtures::nine_var();
        let jt = fixtures::nine_var_tree(&bn);
        let e: Evidence = [(bn.lookup("H").unwrap(), 1)].into_iter().collect();
        let st = hugin_propagate(&jt, &bn, &e).unwrap();
        for (k, &(a, b)) in jt.edges().iter().enumerate() {
            let dom = st.separator_domain(k).to_vec();
            for c in [a, b] {
                let m = st.clique(c).marginalize_onto(&dom).unwrap();
                for (x, y) in m.values().iter().zip(st.separator(k).values()) {
                    assert!((x - y).abs() < 1e-9);
                }
            }
        }
        assert!(st.trace().divisions > 0);
    }
}
