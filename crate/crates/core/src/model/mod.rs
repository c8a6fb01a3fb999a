//! Variables, potentials, networks and evidence.

mod factor;
mod network;

use std::collections::BTreeMap;
use std::fmt;

pub use factor::{validate_cpd, Factor, PROB_TOL};
pub use network::{BayesianNetwork, NetworkBuilder};

use crate::error::{Error, Result};

/// Dense index of a variable within one network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarId(pub usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Variable {
    pub id: VarId,
    pub name: String,
    pub states: Vec<String>,
}

impl Variable {
    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, label: &str) -> Option<usize> {
        self.states.iter().position(|s| s == label)
    }
}

/// Observed states, keyed by variable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Evidence {
    assignments: BTreeMap<VarId, usize>,
}

impl Evidence {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record an observation. A variable may be observed only once.
    pub fn insert(&mut self, var: VarId, state: usize) -> Result<()> {
        if self.assignments.contains_key(&var) {
            return Err(Error::Evidence(format!("{var} observed twice")));
        }
        self.assignments.insert(var, state);
        Ok(())
    }

    pub fn get(&self, var: VarId) -> Option<usize> {
        self.assignments.get(&var).copied()
    }

    pub fn contains(&self, var: VarId) -> bool {
        self.assignments.contains_key(&var)
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, usize)> + '_ {
        self.assignments.iter().map(|(v, s)| (*v, *s))
    }
}

impl FromIterator<(VarId, usize)> for Evidence {
    /// Later duplicates overwrite earlier ones.
    fn from_iter<I: IntoIterator<Item = (VarId, usize)>>(iter: I) -> Self {
        Evidence {
            assignments: iter.into_iter().collect(),
        }
    }
}
