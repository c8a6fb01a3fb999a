use std::collections::{BTreeMap, BTreeSet};

use crate::error::Result;
use crate::model::{Factor, VarId};

/// Operation counters for one propagation run.
///
/// Only table operations on materialized, non-scalar tables are counted;
/// building the initial potentials from the evidence-reduced CPDs is not.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PropagationTrace {
    /// Single-variable sum-outs over tables of at least two cells.
    pub sum_outs: u64,
    /// Pointwise table products.
    pub mults: u64,
    /// Pointwise table divisions.
    pub divisions: u64,
    /// Entries written into result tables.
    pub cells_touched: u64,
    /// Largest result table.
    pub max_table: u64,
    /// Number of variables in the operand of each sum-out, as a histogram.
    pub sum_out_widths: BTreeMap<usize, u64>,
    /// Every variable that appeared in an operand or result of a counted operation.
    pub touched_vars: BTreeSet<VarId>,
}

impl PropagationTrace {
    pub fn new() -> Self {
        Self::default()
    }

    fn wrote(&mut self, f: &Factor) {
        self.cells_touched += f.len() as u64;
        self.max_table = self.max_table.max(f.len() as u64);
        self.touched_vars.extend(f.domain().iter().copied());
    }

    pub fn multiply(&mut self, a: &Factor, b: &Factor) -> Result<Factor> {
        let out = a.multiply(b)?;
        if !out.is_scalar() {
            self.mults += 1;
            self.wrote(&out);
        }
        Ok(out)
    }

    pub fn sum_out(&mut self, f: &Factor, v: VarId) -> Result<Factor> {
        let out = f.marginalize_out(v)?;
        if f.len() >= 2 {
            self.sum_outs += 1;
            *self.sum_out_widths.entry(f.domain().len()).or_default() += 1;
            self.touched_vars.extend(f.domain().iter().copied());
            self.wrote(&out);
        }
        Ok(out)
    }

    /// Sum out every variable outside `keep`, lowest id first.
    pub fn marginalize_onto(&mut self, f: &Factor, keep: &[VarId]) -> Result<Factor> {
        let mut out = f.clone();
        for &v in f.domain() {
            if !keep.contains(&v) {
                out = self.sum_out(&out, v)?;
            }
        }
        Ok(out)
    }

    pub fn divide(&mut self, a: &Factor, b: &Factor) -> Result<Factor> {
        let out = a.divide(b)?;
        self.divisions += 1;
        self.wrote(&out);
        Ok(out)
    }

    /// True when every sum-out had an operand of exactly `width` variables.
    pub fn all_sum_outs_have_width(&self, width: usize) -> bool {
        self.sum_out_widths.keys().all(|&w| w == width)
    }
}
