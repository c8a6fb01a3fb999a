//! Junction-tree propagation: HUGIN, Shafer-Shenoy and lazy propagation
//! behind one query interface.
//!
//! Evidence is entered by subtable reduction, so observed variables vanish
//! from every potential and every separator. Each connected component of a
//! junction forest is propagated on its own, rooted at its lowest clique index.

mod hugin;
mod lazy;
mod shafer_shenoy;
mod trace;

use std::fmt;
use std::str::FromStr;

pub use hugin::{hugin_absorb, hugin_propagate, HuginState};
pub use lazy::{
    eliminate_variables, lazy_message, lazy_propagate, lazy_propagate_with, LazyMessage, LazyOptions, LazyState};
pub use shafer_shenoy::{ss_message, ss_propagate, ss_propagate_with, SsSchedule, SsState};
pub use trace::PropagationTrace;

use crate::compile::JunctionTree;
use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, Evidence, Factor, VarId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EngineKind {
    Hugin,
    ShaferShenoy,
    Lazy,
}

impl EngineKind {
    pub const ALL: [EngineKind; 3] = [EngineKind::Hugin, EngineKind::ShaferShenoy, EngineKind::Lazy];

    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Hugin => "hugin",
            EngineKind::ShaferShenoy => "ss",
            EngineKind::Lazy => "lazy",
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hugin" => Ok(EngineKind::Hugin),
            "ss" | "shafer-shenoy" => Ok(EngineKind::ShaferShenoy),
            "lazy" => Ok(EngineKind::Lazy),
            other => Err(Error::Argument(format!("unknown engine `{other}`"))),
        }
    }
}

/// Result of a completed propagation.
pub trait Propagated {
    fn engine(&self) -> EngineKind;

    fn trace(&self) -> &PropagationTrace;

    /// Posterior distribution of `v` given the evidence.
    fn marginal(&self, v: VarId) -> Result<Vec<f64>>;

    /// Probability of the evidence (product over forest components).
    fn prob_evidence(&self) -> f64;

    fn marginals(&self) -> Result<Vec<Vec<f64>>> {
        (0..self.network().len()).map(|i| self.marginal(VarId(i))).collect()
    }

    fn network(&self) -> &BayesianNetwork;
}

/// Run one engine with its default schedule.
pub fn propagate<'a>(
    kind: EngineKind,
    bn: &'a BayesianNetwork,
    jt: &'a JunctionTree,
    evidence: &Evidence,
) -> Result<Box<dyn Propagated + 'a>> {
    Ok(match kind {
        EngineKind::Hugin => Box::new(hugin_propagate(jt, bn, evidence)?),
        EngineKind::ShaferShenoy => Box::new(ss_propagate(jt, bn, evidence)?),
        EngineKind::Lazy => Box::new(lazy_propagate(jt, bn, evidence)?),
    })
}

/// Evidence-reduced view of a network on a junction tree, shared by all engines.
#[derive(Clone, Debug)]
pub(crate) struct Setup<'a> {
    pub bn: &'a BayesianNetwork,
    pub jt: &'a JunctionTree,
    pub evidence: Evidence,
    /// Reduced CPD per variable.
    pub reduced: Vec<Factor>,
    /// Unobserved clique members.
    pub clique_domains: Vec<Vec<VarId>>,
    /// Unobserved separator members, per edge.
    pub sep_domains: Vec<Vec<VarId>>,
}

impl<'a> Setup<'a> {
    pub fn new(jt: &'a JunctionTree, bn: &'a BayesianNetwork, evidence: &Evidence) -> Result<Self> {
        bn.check_evidence(evidence)?;
        if !jt.is_assigned() {
            return Err(Error::JunctionTree("CPDs have not been assigned to cliques".into()));
        }
        let mut covered = vec![false; bn.len()];
        for c in jt.cliques() {
            for v in c {
                if v.0 >= bn.len() {
                    return Err(Error::JunctionTree(format!("clique mentions unknown {v}")));
                }
                covered[v.0] = true;
            }
        }
        if let Some(missing) = covered.iter().position(|c| !c) {
            return Err(Error::JunctionTree(format!(
                "variable {} is in no clique",
                bn.variable(VarId(missing)).name
            )));
        }
        let unobserved = |vs: &[VarId]| -> Vec<VarId> {
            vs.iter().copied().filter(|v| !evidence.contains(*v)).collect()
        };
        Ok(Setup {
            bn,
            jt,
            evidence: evidence.clone(),
            reduced: bn.cpds().iter().map(|f| f.reduce(evidence)).collect(),
            clique_domains: jt.cliques().iter().map(|c| unobserved(c)).collect(),
            sep_domains: jt.separators().iter().map(|s| unobserved(s)).collect(),
        })
    }

    pub fn cards(&self, vars: &[VarId]) -> Vec<usize> {
        vars.iter().map(|v| self.bn.cardinality(*v)).collect()
    }

    pub fn unity(&self, vars: &[VarId]) -> Factor {
        Factor::unity(vars.to_vec(), self.cards(vars)).expect("valid domain")
    }

    /// `ψ_C`: unity over the reduced clique times its assigned reduced CPDs.
    pub fn clique_potential(&self, clique: usize) -> Factor {
        let mut psi = self.unity(&self.clique_domains[clique]);
        for v in self.jt.assigned_to(clique) {
            psi = psi.multiply(&self.reduced[v.0]).expect("CPD fits its clique");
        }
        psi
    }

    /// Smallest clique (by reduced state space, then index) containing `v`.
    pub fn query_clique(&self, v: VarId) -> Result<usize> {
        if v.0 >= self.bn.len() {
            return Err(Error::UnknownVariable(v.to_string()));
        }
        (0..self.jt.len())
            .filter(|&c| self.jt.clique(c).contains(&v))
            .min_by_key(|&c| {
                let space: u128 = self.clique_domains[c]
                    .iter()
                    .map(|x| self.bn.cardinality(*x) as u128)
                    .product();
                (space, c)
            })
            .ok_or_else(|| Error::UnknownVariable(self.bn.variable(v).name.clone()))
    }

    /// Point distribution for an observed variable.
    pub fn observed_marginal(&self, v: VarId) -> Option<Vec<f64>> {
        self.evidence.get(v).map(|s| {
            let mut d = vec![0.0; self.bn.cardinality(v)];
            d[s] = 1.0;
            d
        })
    }
}

/// Normalize a one-variable factor into a distribution.
pub(crate) fn distribution(f: &Factor, v: VarId, card: usize) -> Result<Vec<f64>> {
    let f = f.marginalize_onto(&[v])?;
    if f.is_scalar() {
        return Ok(vec![1.0 / card as f64; card]);
    }
    let total = f.total();
    if total <= 0.0 {
        return Err(Error::ImpossibleEvidence);
    }
    Ok(f.values().iter().map(|x| x / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::{compile, Heuristic};
    use crate::fixtures;

    #[test]
    fn engine_names_parse() {
        for k in EngineKind::ALL {
            assert_eq!(k.name().parse::<EngineKind>().unwrap(), k);
        }
        assert!("bucket".parse::<EngineKind>().is_err());
    }

    #[test]
    fn two_variable_posteriors() {
        let bn = fixtures::two_var();
        let jt = compile(&bn, Heuristic::MinWeight).unwrap();
        let mut e = Evidence::new();
        e.insert(VarId(1), 1).unwrap();
        for kind in EngineKind::ALL {
            let r = propagate(kind, &bn, &jt, &e).unwrap();
            let pa = r.marginal(VarId(0)).unwrap();
            // [0.3 * 0.5, 0.7 * 0.8] / 0.71
            assert!((pa[0] - 0.15 / 0.71).abs() < 1e-12, "{kind}: {pa:?}");
            assert!((pa[1] - 0.56 / 0.71).abs() < 1e-12, "{kind}: {pa:?}");
            assert!((r.prob_evidence() - 0.71).abs() < 1e-12, "{kind}");
            assert_eq!(r.marginal(VarId(1)).unwrap(), vec![0.0, 1.0]);
        }
    }

    #[test]
    fn no_evidence_root_marginal_is_prior() {
        let bn = fixtures::nine_var();
        let jt = fixtures::nine_var_tree(&bn);
        for kind in EngineKind::ALL {
            let r = propagate(kind, &bn, &jt, &Evidence::new()).unwrap();
            let a = bn.lookup("A").unwrap();
            let m = r.marginal(a).unwrap();
            assert!((m[0] - 0.4).abs() < 1e-12 && (m[1] - 0.6).abs() < 1e-12, "{kind}");
            assert!((r.prob_evidence() - 1.0).abs() < 1e-12, "{kind}");
        }
    }

    #[test]
    fn impossible_evidence_is_reported() {
        let mut b = BayesianNetwork::builder("det");
        let a = b.add_variable("A", ["0", "1"]).unwrap();
        let c = b.add_variable("B", ["0", "1"]).unwrap();
        b.set_cpd(a, vec![], vec![0.5, 0.5]).unwrap();
        b.set_cpd(c, vec![a], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let bn = b.build().unwrap();
        let jt = compile(&bn, Heuristic::MinWeight).unwrap();
        let e: Evidence = [(a, 0), (c, 1)].into_iter().collect();
        for kind in EngineKind::ALL {
            assert!(matches!(propagate(kind, &bn, &jt, &e), Err(Error::ImpossibleEvidence)), "{kind}");
        }
    }

    #[test]
    fn unknown_query_variable() {
        let bn = fixtures::two_var();
        let jt = compile(&bn, Heuristic::MinWeight).unwrap();
        for kind in EngineKind::ALL {
            let r = propagate(kind, &bn, &jt, &Evidence::new()).unwrap();
            assert!(matches!(r.marginal(VarId(9)), Err(Error::UnknownVariable(_))));
        }
    }

    #[test]
    fn rejects_bad_evidence_state() {
        let bn = fixtures::two_var();
        let jt = compile(&bn, Heuristic::MinWeight).unwrap();
        let e: Evidence = [(VarId(0), 5)].into_iter().collect();
        assert!(matches!(propagate(EngineKind::Lazy, &bn, &jt, &e), Err(Error::Evidence(_))));
    }
}
