use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{Evidence, Factor, VarId, Variable};

/// A DAG over discrete variables with one CPD per variable.
#[derive(Clone, Debug, PartialEq)]
pub struct BayesianNetwork {
    name: String,
    variables: Vec<Variable>,
    parents: Vec<Vec<VarId>>,
    cpds: Vec<Factor>,
}

impl BayesianNetwork {
    pub fn builder(name: impl Into<String>) -> NetworkBuilder {
        NetworkBuilder {
            name: name.into(),
            variables: Vec::new(),
            by_name: HashMap::new(),
            cpds: Vec::new(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn var_ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.variables.len()).map(VarId)
    }

    pub fn find(&self, name: &str) -> Option<VarId> {
        self.variables.iter().find(|v| v.name == name).map(|v| v.id)
    }

    pub fn lookup(&self, name: &str) -> Result<VarId> {
        self.find(name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn cardinality(&self, id: VarId) -> usize {
        self.variables[id.0].cardinality()
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.variables.iter().map(Variable::cardinality).collect()
    }

    /// Parents in declaration order.
    pub fn parents(&self, id: VarId) -> &[VarId] {
        &self.parents[id.0]
    }

    pub fn children(&self, id: VarId) -> Vec<VarId> {
        self.var_ids()
            .filter(|c| self.parents[c.0].contains(&id))
            .collect()
    }

    pub fn cpd(&self, id: VarId) -> &Factor {
        &self.cpds[id.0]
    }

    pub fn cpds(&self) -> &[Factor] {
        &self.cpds
    }

    /// Check every observation against the declared state counts.
    pub fn check_evidence(&self, evidence: &Evidence) -> Result<()> {
        for (v, s) in evidence.iter() {
            if v.0 >= self.variables.len() {
                return Err(Error::Evidence(format!("{v} is not a network variable")));
            }
            let var = &self.variables[v.0];
            if s >= var.cardinality() {
                return Err(Error::Evidence(format!(
                    "state {s} out of range for {} ({} states)",
                    var.name,
                    var.cardinality()
                )));
            }
        }
        Ok(())
    }

    /// Variables in an order where parents precede children.
    pub fn topological_order(&self) -> Vec<VarId> {
        topological_order(&self.parents).expect("network is acyclic by construction")
    }
}

fn topological_order(parents: &[Vec<VarId>]) -> Option<Vec<VarId>> {
    let n = parents.len();
    let mut indegree: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut children = vec![Vec::new(); n];
    for (c, ps) in parents.iter().enumerate() {
        for p in ps {
            children[p.0].push(c);
        }
    }
    let mut ready: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).rev().collect();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = ready.pop() {
        order.push(VarId(v));
        for &c in children[v].iter().rev() {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(c);
            }
        }
    }
    (order.len() == n).then_some(order)
}

pub struct NetworkBuilder {
    name: String,
    variables: Vec<Variable>,
    by_name: HashMap<String, VarId>,
    cpds: Vec<Option<(Vec<VarId>, Factor)>>,
}

impl NetworkBuilder {
    pub fn add_variable<S: Into<String>>(
        &mut self,
        name: impl Into<String>,
        states: impl IntoIterator<Item = S>,
    ) -> Result<VarId> {
        let name = name.into();
        let states: Vec<String> = states.into_iter().map(Into::into).collect();
        if self.by_name.contains_key(&name) {
            return Err(Error::Network(format!("variable {name} declared twice")));
        }
        if states.is_empty() {
            return Err(Error::Network(format!("variable {name} has no states")));
        }
        for (i, s) in states.iter().enumerate() {
            if states[..i].contains(s) {
                return Err(Error::Network(format!("variable {name} repeats state {s}")));
            }
        }
        let id = VarId(self.variables.len());
        self.by_name.insert(name.clone(), id);
        self.variables.push(Variable { id, name, states });
        self.cpds.push(None);
        Ok(id)
    }

    pub fn id_of(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    /// Attach `P(child | parents)`. `values` follow the canonical layout over
    /// the ascending domain `{child} ∪ parents`, last variable fastest.
    pub fn set_cpd(&mut self, child: VarId, parents: Vec<VarId>, values: Vec<f64>) -> Result<()> {
        let n = self.variables.len();
        let name = |v: VarId| self.variables[v.0].name.clone();
        if child.0 >= n || parents.iter().any(|p| p.0 >= n) {
            return Err(Error::Network("CPD references an undeclared variable".into()));
        }
        if self.cpds[child.0].is_some() {
            return Err(Error::Network(format!("second CPD for {}", name(child))));
        }
        let mut domain = parents.clone();
        domain.push(child);
        domain.sort_unstable();
        if domain.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Network(format!(
                "CPD of {} repeats a variable",
                name(child)
            )));
        }
        let cards = domain
            .iter()
            .map(|v| self.variables[v.0].cardinality())
            .collect();
        let factor = Factor::cpd(domain, cards, values, child).map_err(|e| match e {
            Error::NotNormalized { tail, sum, .. } => {
                let at: Vec<String> = tail
                    .iter()
                    .map(|(v, s)| format!("{}={}", name(*v), self.variables[v.0].states[*s]))
                    .collect();
                Error::Network(format!(
                    "CPD of {} sums to {sum} at {}",
                    name(child),
                    if at.is_empty() { "the empty tail".to_string() } else { at.join(",") }
                ))
            }
            Error::Structural(msg) => Error::Network(format!("CPD of {}: {msg}", name(child))),
            other => other,
        })?;
        self.cpds[child.0] = Some((parents, factor));
        Ok(())
    }

    pub fn build(self) -> Result<BayesianNetwork> {
        let mut parents = Vec::with_capacity(self.cpds.len());
        let mut cpds = Vec::with_capacity(self.cpds.len());
        for (i, slot) in self.cpds.into_iter().enumerate() {
            let (ps, f) = slot.ok_or_else(|| {
                Error::Network(format!("variable {} has no CPD", self.variables[i].name))
            })?;
            parents.push(ps);
            cpds.push(f);
        }
        if topological_order(&parents).is_none() {
            return Err(Error::Network("parent relation contains a cycle".into()));
        }
        Ok(BayesianNetwork {
            name: self.name,
            variables: self.variables,
            parents,
            cpds,
        })
    }
}
