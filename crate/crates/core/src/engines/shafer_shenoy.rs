use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::compile::JunctionTree;
use crate::engines::{distribution, EngineKind, Propagated, PropagationTrace, Setup};
use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, Evidence, Factor, VarId};

/// Order in which Shafer-Shenoy messages are fired.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SsSchedule {
    /// Collect to the given clique, then distribute from it. Other forest
    /// components use their lowest clique index.
    Rooted(usize),
    /// Repeatedly fire a random message whose prerequisites have arrived.
    Async { seed: u64 },
}

/// Fixed `ψ_C` per clique and two directed messages per separator.
#[derive(Clone, Debug)]
pub struct SsState<'a> {
    setup: Setup<'a>,
    psi: Vec<Factor>,
    /// Slot 0 carries the message from the lower to the higher clique index.
    messages: Vec<[Option<Factor>; 2]>,
    trace: PropagationTrace,
    prob_evidence: f64,
}

impl<'a> SsState<'a> {
    pub fn initialize(jt: &'a JunctionTree, bn: &'a BayesianNetwork, evidence: &Evidence) -> Result<Self> {
        let setup = Setup::new(jt, bn, evidence)?;
        let psi = (0..jt.len()).map(|c| setup.clique_potential(c)).collect();
        Ok(SsState {
            setup,
            psi,
            messages: vec![[None, None]; jt.edges().len()],
            trace: PropagationTrace::new(),
            prob_evidence: f64::NAN,
        })
    }

    fn slot(&self, from: usize, to: usize) -> Option<(usize, usize)> {
        let edge = self.setup.jt.edge_between(from, to)?;
        Some((edge, usize::from(from > to)))
    }

    pub fn message(&self, from: usize, to: usize) -> Option<&Factor> {
        let (edge, dir) = self.slot(from, to)?;
        self.messages[edge][dir].as_ref()
    }

    pub fn psi(&self, clique: usize) -> &Factor {
        &self.psi[clique]
    }

    /// Every stored message keyed by `(from, to)`, in edge order.
    pub fn all_messages(&self) -> Vec<((usize, usize), Option<&Factor>)> {
        self.setup
            .jt
            .edges()
            .iter()
            .enumerate()
            .flat_map(|(k, &(a, b))| {
                [((a, b), self.messages[k][0].as_ref()), ((b, a), self.messages[k][1].as_ref())]
            })
            .collect()
    }

    /// `ψ_C` times every incoming message.
    pub fn belief(&self, clique: usize) -> Result<Factor> {
        let mut b = self.psi[clique].clone();
        for &(n, _) in self.setup.jt.neighbors(clique) {
            let m = self
                .message(n, clique)
                .ok_or_else(|| Error::Schedule(format!("message {n} -> {clique} missing")))?;
            b = b.multiply(m)?;
        }
        Ok(b)
    }

    fn ready(&self, from: usize, to: usize) -> bool {
        self.setup
            .jt
            .neighbors(from)
            .iter()
            .all(|&(n, _)| n == to || self.message(n, from).is_some())
    }
}

/// `φ_{from→to} = Σ_{from \ S} ψ_from ∏_{n ≠ to} φ_{n→from}`, stored on the separator.
pub fn ss_message(state: &mut SsState<'_>, from: usize, to: usize) -> Result<Factor> {
    let (edge, dir) = state
        .slot(from, to)
        .ok_or_else(|| Error::Schedule(format!("cliques {from} and {to} are not adjacent")))?;
    let mut product = state.psi[from].clone();
    for &(n, _) in state.setup.jt.neighbors(from) {
        if n == to {
            continue;
        }
        let (e, d) = state.slot(n, from).expect("adjacent");
        let incoming = state.messages[e][d]
            .as_ref()
            .ok_or_else(|| Error::Schedule(format!("message {n} -> {from} has not been sent")))?;
        product = state.trace.multiply(&product, incoming)?;
    }
    let msg = state
        .trace
        .marginalize_onto(&product, &state.setup.sep_domains[edge])?;
    state.messages[edge][dir] = Some(msg.clone());
    Ok(msg)
}

pub fn ss_propagate<'a>(jt: &'a JunctionTree, bn: &'a BayesianNetwork, evidence: &Evidence) -> Result<SsState<'a>> {
    ss_propagate_with(jt, bn, evidence, SsSchedule::Rooted(0))
}

pub fn ss_propagate_with<'a>(
    jt: &'a JunctionTree,
    bn: &'a BayesianNetwork,
    evidence: &Evidence,
    schedule: SsSchedule,
) -> Result<SsState<'a>> {
    let mut state = SsState::initialize(jt, bn, evidence)?;
    match schedule {
        SsSchedule::Rooted(root) => {
            if root >= jt.len() && !jt.is_empty() {
                return Err(Error::Argument(format!("root {root} out of range")));
            }
            let mut roots = jt.roots();
            if let Some(r) = roots.iter_mut().find(|r| jt.component_of(**r) == jt.component_of(root)) {
                *r = root;
            }
            for r in roots {
                let order = jt.collect_schedule(r);
                for &(from, to) in &order {
                    ss_message(&mut state, from, to)?;
                }
                for &(child, parent) in order.iter().rev() {
                    ss_message(&mut state, parent, child)?;
                }
            }
        }
        SsSchedule::Async { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut pending: Vec<(usize, usize)> =
                jt.edges().iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
            while !pending.is_empty() {
                let ready: Vec<usize> = (0..pending.len())
                    .filter(|&i| state.ready(pending[i].0, pending[i].1))
                    .collect();
                let &pick = ready
                    .choose(&mut rng)
                    .ok_or_else(|| Error::Schedule("no message can fire".into()))?;
                let (from, to) = pending.swap_remove(pick);
                ss_message(&mut state, from, to)?;
            }
        }
    }
    let mut mass = 1.0;
    for root in jt.roots() {
        let m = state.belief(root)?.total();
        if m <= 0.0 {
            return Err(Error::ImpossibleEvidence);
        }
        mass *= m;
    }
    state.prob_evidence = mass;
    Ok(state)
}

impl Propagated for SsState<'_> {
    fn engine(&self) -> EngineKind {
        EngineKind::ShaferShenoy
    }

    fn trace(&self) -> &PropagationTrace {
        &self.trace
    }

    fn marginal(&self, v: VarId) -> Result<Vec<f64>> {
        let c = self.setup.query_clique(v)?;
        if let Some(d) = self.setup.observed_marginal(v) {
            return Ok(d);
        }
        distribution(&self.belief(c)?, v, self.setup.bn.cardinality(v))
    }

    fn prob_evidence(&self) -> f64 {
        self.prob_evidence
    }

    fn network(&self) -> &BayesianNetwork {
        self.setup.bn
    }
}
