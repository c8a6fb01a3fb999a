//! Reference implementations that share no code path with the engines:
//! brute-force joint enumeration and d-separation on the moralized
//! ancestral graph.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, Evidence, Factor, VarId};

/// Default cap on the number of joint configurations the oracle will visit.
pub const DEFAULT_CAP: u128 = 1 << 24;

/// Unnormalized joint over the unobserved variables. Its total mass is the
/// probability of the evidence.
#[derive(Clone, Debug, PartialEq)]
pub struct JointTable {
    pub table: Factor,
}

impl JointTable {
    pub fn prob_evidence(&self) -> f64 {
        self.table.total()
    }
}

pub fn enumerate_joint(bn: &BayesianNetwork, evidence: &Evidence) -> Result<JointTable> {
    enumerate_joint_capped(bn, evidence, DEFAULT_CAP)
}

/// Evaluate `∏ P(V | pa(V))` at every configuration consistent with the evidence.
pub fn enumerate_joint_capped(bn: &BayesianNetwork, evidence: &Evidence, cap: u128) -> Result<JointTable> {
    bn.check_evidence(evidence)?;
    let free: Vec<VarId> = bn.var_ids().filter(|v| !evidence.contains(*v)).collect();
    let cards: Vec<usize> = free.iter().map(|v| bn.cardinality(*v)).collect();
    let cells = cards
        .iter()
        .fold(1u128, |acc, &c| acc.saturating_mul(c as u128));
    if cells > cap {
        return Err(Error::OracleCap { cells, cap });
    }
    let mut state = vec![0usize; bn.len()];
    for (v, s) in evidence.iter() {
        state[v.0] = s;
    }
    // family index lists, looked up per configuration
    let families: Vec<Vec<VarId>> = bn.var_ids().map(|v| bn.cpd(v).domain().to_vec()).collect();
    let mut values = Vec::with_capacity(cells as usize);
    let mut scratch = Vec::new();
    for _ in 0..cells {
        let mut p = 1.0;
        for v in bn.var_ids() {
            scratch.clear();
            scratch.extend(families[v.0].iter().map(|x| state[x.0]));
            p *= bn.cpd(v).value_at(&scratch);
        }
        values.push(p);
        for (k, v) in free.iter().enumerate().rev() {
            state[v.0] += 1;
            if state[v.0] < cards[k] {
                break;
            }
            state[v.0] = 0;
        }
    }
    Ok(JointTable {
        table: Factor::new(free, cards, values)?,
    })
}

/// Posterior of `v` by summing the enumerated joint.
pub fn oracle_marginal(bn: &BayesianNetwork, evidence: &Evidence, v: VarId) -> Result<Vec<f64>> {
    let joint = enumerate_joint(bn, evidence)?;
    oracle_marginal_from(bn, evidence, &joint, v)
}

/// Same as [`oracle_marginal`], reusing an already enumerated joint.
pub fn oracle_marginal_from(bn: &BayesianNetwork, evidence: &Evidence, joint: &JointTable, v: VarId) -> Result<Vec<f64>> {
    if v.0 >= bn.len() {
        return Err(Error::UnknownVariable(v.to_string()));
    }
    let card = bn.cardinality(v);
    let total = joint.table.total();
    if total <= 0.0 {
        return Err(Error::ImpossibleEvidence);
    }
    if let Some(s) = evidence.get(v) {
        let mut d = vec![0.0; card];
        d[s] = 1.0;
        return Ok(d);
    }
    let t = &joint.table;
    let pos = t.domain().iter().position(|x| *x == v).expect("unobserved variable in joint");
    let mut d = vec![0.0; card];
    for (i, &p) in t.values().iter().enumerate() {
        d[t.assignment(i)[pos]] += p;
    }
    Ok(d.into_iter().map(|x| x / total).collect())
}

/// `X ⊥ Y | Z` in the DAG: X and Y are disconnected in the moral graph of
/// the ancestral set of `X ∪ Y ∪ Z` once `Z` is removed.
pub fn d_separated(bn: &BayesianNetwork, x: &[VarId], y: &[VarId], z: &[VarId]) -> Result<bool> {
    let xs: BTreeSet<VarId> = x.iter().copied().collect();
    let ys: BTreeSet<VarId> = y.iter().copied().collect();
    let zs: BTreeSet<VarId> = z.iter().copied().collect();
    if let Some(v) = xs.iter().chain(&ys).chain(&zs).find(|v| v.0 >= bn.len()) {
        return Err(Error::UnknownVariable(v.to_string()));
    }
    if !xs.is_disjoint(&ys) || !xs.is_disjoint(&zs) || !ys.is_disjoint(&zs) {
        return Err(Error::Argument("X, Y and Z must be disjoint".into()));
    }

    let n = bn.len();
    let mut ancestral = vec![false; n];
    let mut stack: Vec<VarId> = xs.iter().chain(&ys).chain(&zs).copied().collect();
    while let Some(v) = stack.pop() {
        if !ancestral[v.0] {
            ancestral[v.0] = true;
            stack.extend(bn.parents(v).iter().copied());
        }
    }

    let mut adj = vec![Vec::new(); n];
    for v in bn.var_ids().filter(|v| ancestral[v.0]) {
        let ps = bn.parents(v);
        for (i, &p) in ps.iter().enumerate() {
            adj[p.0].push(v);
            adj[v.0].push(p);
            for &q in &ps[i + 1..] {
                adj[p.0].push(q);
                adj[q.0].push(p);
            }
        }
    }

    let mut seen = vec![false; n];
    let mut stack: Vec<VarId> = xs.iter().copied().collect();
    for v in &stack {
        seen[v.0] = true;
    }
    while let Some(v) = stack.pop() {
        if ys.contains(&v) {
            return Ok(false);
        }
        for &w in &adj[v.0] {
            if !seen[w.0] && !zs.contains(&w) {
                seen[w.0] = true;
                stack.push(w);
            }
        }
    }
    Ok(true)
}
