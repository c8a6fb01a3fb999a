//! Lazy propagation.
//!
//! Clique potentials stay in factored form: a clique holds the list of its
//! evidence-reduced CPDs, and a message is a list of factors whose domains
//! lie inside the separator. A message from `C_i` to `C_j` is built from
//! `C_i`'s own factors and the messages `C_i` received from every neighbor
//! except `C_j`; whatever `C_j` sent is simply left out, which is all that
//! HUGIN's division amounts to here.
//!
//! Variables outside the separator are removed in two steps. First, pure
//! factors whose head variables are all to be eliminated and appear nowhere
//! else are dropped: summing them out yields a unity potential. The remaining
//! variables are then peeled one at a time, always choosing the one whose
//! elimination produces the smallest table.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::compile::JunctionTree;
use crate::engines::{distribution, EngineKind, Propagated, PropagationTrace, Setup};
use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, Evidence, Factor, VarId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LazyOptions {
    /// Drop barren pure factors before peeling.
    pub barren_pruning: bool,
}

impl Default for LazyOptions {
    fn default() -> Self {
        LazyOptions { barren_pruning: true }
    }
}

/// Factors sent over one separator in one direction.
///
/// Zero-variable factors are folded into `scale`; they only matter for the
/// probability of evidence and are not part of the factor set.
#[derive(Clone, Debug, PartialEq)]
pub struct LazyMessage {
    pub factors: Vec<Arc<Factor>>,
    pub scale: f64,
}

impl LazyMessage {
    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct LazyState<'a> {
    setup: Setup<'a>,
    options: LazyOptions,
    own: Vec<Vec<Arc<Factor>>>,
    own_scale: Vec<f64>,
    /// Slot 0 carries the message from the lower to the higher clique index.
    messages: Vec<[Option<LazyMessage>; 2]>,
    trace: PropagationTrace,
    prob_evidence: f64,
}

impl<'a> LazyState<'a> {
    /// Distribute the reduced CPDs to their cliques, unmultiplied.
    pub fn initialize(
        jt: &'a JunctionTree,
        bn: &'a BayesianNetwork,
        evidence: &Evidence,
        options: LazyOptions,
    ) -> Result<Self> {
        let setup = Setup::new(jt, bn, evidence)?;
        let mut own = vec![Vec::new(); jt.len()];
        let mut own_scale = vec![1.0; jt.len()];
        for v in bn.var_ids() {
            let home = jt.home_of(v);
            let f = &setup.reduced[v.0];
            if f.is_scalar() {
                own_scale[home] *= f.values()[0];
            } else {
                own[home].push(Arc::new(f.clone()));
            }
        }
        Ok(LazyState {
            setup,
            options,
            own,
            own_scale,
            messages: vec![[None, None]; jt.edges().len()],
            trace: PropagationTrace::new(),
            prob_evidence: f64::NAN,
        })
    }

    fn slot(&self, from: usize, to: usize) -> Option<(usize, usize)> {
        let edge = self.setup.jt.edge_between(from, to)?;
        Some((edge, usize::from(from > to)))
    }

    pub fn message(&self, from: usize, to: usize) -> Option<&LazyMessage> {
        let (edge, dir) = self.slot(from, to)?;
        self.messages[edge][dir].as_ref()
    }

    /// The factored potential of `clique`.
    pub fn own_factors(&self, clique: usize) -> &[Arc<Factor>] {
        &self.own[clique]
    }

    /// Unobserved variables of separator `edge`.
    pub fn separator_domain(&self, edge: usize) -> &[VarId] {
        &self.setup.sep_domains[edge]
    }

    pub fn tree(&self) -> &JunctionTree {
        self.setup.jt
    }

    /// Own factors plus the messages from every neighbor except `skip`.
    fn relevant(&self, clique: usize, skip: Option<usize>) -> Result<(Vec<Arc<Factor>>, f64)> {
        let mut factors = self.own[clique].clone();
        let mut scale = self.own_scale[clique];
        for &(n, _) in self.setup.jt.neighbors(clique) {
            if Some(n) == skip {
                continue;
            }
            let m = self
                .message(n, clique)
                .ok_or_else(|| Error::Schedule(format!("message {n} -> {clique} has not been sent")))?;
            factors.extend(m.factors.iter().cloned());
            scale *= m.scale;
        }
        Ok((factors, scale))
    }

    /// Eliminate everything but `keep` from a clique's relevant set, without
    /// touching the propagation trace.
    fn clique_marginal(&self, clique: usize, keep: &[VarId]) -> Result<(Factor, f64)> {
        let (factors, scale) = self.relevant(clique, None)?;
        let elim: Vec<VarId> = domain_union(&factors)
            .into_iter()
            .filter(|v| !keep.contains(v))
            .collect();
        let mut scratch = PropagationTrace::new();
        let rest = eliminate_variables(factors, &elim, &mut scratch, self.options)?;
        let mut product = Factor::scalar(scale);
        for f in &rest {
            product = product.multiply(f)?;
        }
        Ok((product, scale))
    }
}

fn domain_union(factors: &[Arc<Factor>]) -> BTreeSet<VarId> {
    factors.iter().flat_map(|f| f.domain().iter().copied()).collect()
}

fn prune_barren(factors: &mut Vec<Arc<Factor>>, elim: &BTreeSet<VarId>) {
    loop {
        let barren = (0..factors.len()).find(|&i| {
            let f = &factors[i];
            f.is_cpd_pure()
                && f.head().iter().all(|h| {
                    elim.contains(h)
                        && factors
                            .iter()
                            .enumerate()
                            .all(|(j, g)| j == i || !g.contains(*h))
                })
        });
        match barren {
            Some(i) => {
                factors.remove(i);
            }
            None => break,
        }
    }
}

/// Remove the variables `elim` from the factor set `factors`.
///
/// With barren pruning on, pure factors whose whole head is in `elim` and
/// shared with no other factor are discarded first (and again after every
/// elimination step). Each remaining variable is eliminated in order of the
/// smallest resulting table, ties to the lowest id: a variable found in one
/// factor is summed out directly, otherwise the factors containing it are
/// multiplied first. Results known to be unity are dropped.
pub fn eliminate_variables(
    factors: Vec<Arc<Factor>>,
    elim: &[VarId],
    trace: &mut PropagationTrace,
    options: LazyOptions,
) -> Result<Vec<Arc<Factor>>> {
    let mut factors = factors;
    let mut elim: BTreeSet<VarId> = elim.iter().copied().collect();
    factors.retain(|f| !f.is_known_unity());
    loop {
        if options.barren_pruning {
            prune_barren(&mut factors, &elim);
        }
        let present = domain_union(&factors);
        elim.retain(|v| present.contains(v));
        let Some(var) = elim
            .iter()
            .copied()
            .min_by_key(|&v| {
                let mut size = 1u128;
                let mut seen = BTreeSet::new();
                for f in factors.iter().filter(|f| f.contains(v)) {
                    for (&x, &c) in f.domain().iter().zip(f.cards()) {
                        if x != v && seen.insert(x) {
                            size = size.saturating_mul(c as u128);
                        }
                    }
                }
                (size, v)
            })
        else {
            break;
        };
        elim.remove(&var);
        let (with, without): (Vec<_>, Vec<_>) = factors.into_iter().partition(|f| f.contains(var));
        factors = without;
        let result = match &with[..] {
            [only] => trace.sum_out(only, var)?,
            [first, rest @ ..] => {
                let mut product = trace.multiply(first, &rest[0])?;
                for f in &rest[1..] {
                    product = trace.multiply(&product, f)?;
                }
                trace.sum_out(&product, var)?
            }
            [] => unreachable!("variable chosen from the factor domains"),
        };
        if !result.is_known_unity() {
            factors.push(Arc::new(result));
        }
    }
    Ok(factors)
}

/// Compute and store the message from `from` to `to`.
pub fn lazy_message(state: &mut LazyState<'_>, from: usize, to: usize) -> Result<LazyMessage> {
    let (edge, dir) = state
        .slot(from, to)
        .ok_or_else(|| Error::Schedule(format!("cliques {from} and {to} are not adjacent")))?;
    let (factors, mut scale) = state.relevant(from, Some(to))?;
    let sep = &state.setup.sep_domains[edge];
    let elim: Vec<VarId> = domain_union(&factors)
        .into_iter()
        .filter(|v| !sep.contains(v))
        .collect();
    let reduced = eliminate_variables(factors, &elim, &mut state.trace, state.options)?;
    let mut kept = Vec::with_capacity(reduced.len());
    for f in reduced {
        if f.is_scalar() {
            scale *= f.values()[0];
        } else if !f.is_unity() {
            kept.push(f);
        }
    }
    let msg = LazyMessage { factors: kept, scale };
    state.messages[edge][dir] = Some(msg.clone());
    Ok(msg)
}

pub fn lazy_propagate<'a>(jt: &'a JunctionTree, bn: &'a BayesianNetwork, evidence: &Evidence) -> Result<LazyState<'a>> {
    lazy_propagate_with(jt, bn, evidence, LazyOptions::default())
}

/// Collect to each component root, then distribute from it.
pub fn lazy_propagate_with<'a>(
    jt: &'a JunctionTree,
    bn: &'a BayesianNetwork,
    evidence: &Evidence,
    options: LazyOptions,
) -> Result<LazyState<'a>> {
    let mut state = LazyState::initialize(jt, bn, evidence, options)?;
    let mut mass = 1.0;
    for root in jt.roots() {
        let schedule = jt.collect_schedule(root);
        for &(from, to) in &schedule {
            lazy_message(&mut state, from, to)?;
        }
        for &(child, parent) in schedule.iter().rev() {
            lazy_message(&mut state, parent, child)?;
        }
        let (total, _) = state.clique_marginal(root, &[])?;
        let m = total.values()[0];
        if m <= 0.0 {
            return Err(Error::ImpossibleEvidence);
        }
        mass *= m;
    }
    state.prob_evidence = mass;
    Ok(state)
}

impl LazyState<'_> {
    pub fn options(&self) -> LazyOptions {
        self.options
    }
}

impl Propagated for LazyState<'_> {
    fn engine(&self) -> EngineKind {
        EngineKind::Lazy
    }

    fn trace(&self) -> &PropagationTrace {
        &self.trace
    }

    fn marginal(&self, v: VarId) -> Result<Vec<f64>> {
        let c = self.setup.query_clique(v)?;
        if let Some(d) = self.setup.observed_marginal(v) {
            return Ok(d);
        }
        let (f, _) = self.clique_marginal(c, &[v])?;
        distribution(&f, v, self.setup.bn.cardinality(v))
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
    use crate::fixtures;

    fn cpd(domain: &[usize], values: &[f64], child: usize) -> Arc<Factor> {
        let d: Vec<VarId> = domain.iter().map(|&i| VarId(i)).collect();
        Arc::new(Factor::cpd(d, vec![2; domain.len()], values.to_vec(), VarId(child)).unwrap())
    }

    const A: usize = 0;
    const D: usize = 3;
    const G: usize = 6;

    #[test]
    fn barren_chain_needs_no_work() {
        let r = vec![cpd(&[A, D], &[0.25, 0.75, 0.6, 0.4], D), cpd(&[D, G], &[0.45, 0.55, 0.9, 0.1], G)];
        let mut t = PropagationTrace::new();
        let out = eliminate_variables(r.clone(), &[VarId(D), VarId(G)], &mut t, LazyOptions::default()).unwrap();
        assert!(out.is_empty());
        assert_eq!(t.sum_outs, 0);
        // the product really is unity over A
        let p = r[0].multiply(&r[1]).unwrap().marginalize_onto(&[VarId(A)]).unwrap();
        assert!(p.values().iter().all(|x| (x - 1.0).abs() < 1e-12));
    }

    #[test]
    fn evidence_reduced_parent_is_combined() {
        let e: Evidence = [(VarId(A), 0)].into_iter().collect();
        let pd = Arc::new(cpd(&[A, D], &[0.25, 0.75, 0.6, 0.4], D).reduce(&e));
        let pg = cpd(&[D, G], &[0.45, 0.55, 0.9, 0.1], G);
        let mut t = PropagationTrace::new();
        let out = eliminate_variables(vec![pd, pg], &[VarId(D)], &mut t, LazyOptions::default()).unwrap();
        assert_eq!(t.sum_outs, 1);
        assert_eq!(t.mults, 1);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].domain(), &[VarId(G)]);
        // P(G) = 0.25 * [0.45, 0.55] + 0.75 * [0.9, 0.1]
        assert!((out[0].values()[0] - (0.25 * 0.45 + 0.75 * 0.9)).abs() < 1e-12);
        assert!(out[0].is_cpd_pure());
    }

    #[test]
    fn nothing_to_eliminate() {
        let r = vec![cpd(&[A], &[0.4, 0.6], A)];
        let mut t = PropagationTrace::new();
        let out = eliminate_variables(r.clone(), &[], &mut t, LazyOptions::default()).unwrap();
        assert_eq!(out, r);
        assert_eq!(t, PropagationTrace::new());
    }

    #[test]
    fn peeling_prefers_smallest_result() {
        // X(0) joins three binary factors, Y(1) only one: Y goes first.
        let f = Arc::new(Factor::new(vec![VarId(0), VarId(1)], vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap());
        let g = Arc::new(Factor::new(vec![VarId(0), VarId(2)], vec![2, 2], vec![1.0, 1.5, 2.0, 2.5]).unwrap());
        let h = Arc::new(Factor::new(vec![VarId(0), VarId(3)], vec![2, 2], vec![0.5, 1.0, 1.5, 2.0]).unwrap());
        let mut t = PropagationTrace::new();
        let out = eliminate_variables(vec![f, g, h], &[VarId(0), VarId(1)], &mut t, LazyOptions::default()).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].domain(), &[VarId(2), VarId(3)]);
        assert_eq!(t.sum_outs, 2);
        assert_eq!(t.sum_out_widths.get(&2), Some(&1));
        assert_eq!(t.sum_out_widths.get(&3), Some(&1));
    }

    #[test]
    fn barren_off_gives_same_values() {
        let bn = fixtures::nine_var();
        let jt = fixtures::nine_var_tree(&bn);
        let e: Evidence = [(bn.lookup("G").unwrap(), 1)].into_iter().collect();
        let on = lazy_propagate(&jt, &bn, &e).unwrap();
        let off = lazy_propagate_with(&jt, &bn, &e, LazyOptions { barren_pruning: false }).unwrap();
        for v in bn.var_ids() {
            let a = on.marginal(v).unwrap();
            let b = off.marginal(v).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        assert!(off.trace().sum_outs > on.trace().sum_outs);
    }

    #[test]
    fn nine_var_message_contents() {
        let bn = fixtures::nine_var();
        let jt = fixtures::nine_var_tree(&bn);
        let a = bn.lookup("A").unwrap();
        let e: Evidence = [(a, 1)].into_iter().collect();
        let st = lazy_propagate(&jt, &bn, &e).unwrap();
        let (abf, acf, bef, efh) = (0, 1, 3, 4);
        assert!(st.message(efh, bef).unwrap().is_empty());
        let up = st.message(acf, abf).unwrap();
        assert_eq!(up.factors.len(), 1);
        assert_eq!(up.factors[0].domain(), &[bn.lookup("F").unwrap()]);
        assert!(st.message(abf, acf).unwrap().is_empty());
        let down = st.message(abf, bef).unwrap();
        let mut doms: Vec<Vec<VarId>> = down.factors.iter().map(|f| f.domain().to_vec()).collect();
        doms.sort();
        assert_eq!(doms, vec![vec![bn.lookup("B").unwrap()], vec![bn.lookup("F").unwrap()]]);
        assert_eq!(st.trace().divisions, 0);
    }
}
