//! Dense potentials over discrete variables.
//!
//! A [`Factor`] stores its domain in ascending variable order with the last
//! variable varying fastest. Besides the table it carries a head/tail split
//! and a `cpd_pure` flag. A pure factor is known to sum to one over its head
//! for every tail configuration, which lets the lazy engine drop it without
//! computing anything when all head variables are to be summed out.

use std::fmt;

use crate::error::{Error, Result};
use crate::model::{Evidence, VarId};

/// Tolerance for probability identities such as CPD normalization.
pub const PROB_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    domain: Vec<VarId>,
    cards: Vec<usize>,
    values: Vec<f64>,
    head: Vec<VarId>,
    cpd_pure: bool,
}

fn table_size(cards: &[usize]) -> usize {
    cards.iter().product()
}

impl Factor {
    /// An opaque factor (empty head, not pure).
    pub fn new(domain: Vec<VarId>, cards: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if domain.len() != cards.len() {
            return Err(Error::Structural(format!(
                "{} variables but {} cardinalities",
                domain.len(),
                cards.len()
            )));
        }
        if domain.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Structural(
                "domain must be strictly ascending".to_string(),
            ));
        }
        if cards.contains(&0) {
            return Err(Error::Structural("zero cardinality".to_string()));
        }
        if values.len() != table_size(&cards) {
            return Err(Error::Structural(format!(
                "table has {} entries, domain requires {}",
                values.len(),
                table_size(&cards)
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Structural(format!("invalid table entry {bad}")));
        }
        Ok(Factor {
            domain,
            cards,
            values,
            head: Vec::new(),
            cpd_pure: false,
        })
    }

    /// A conditional distribution `P(child | rest of domain)`. Fails unless
    /// the table is normalized over `child` (see [`validate_cpd`]).
    pub fn cpd(domain: Vec<VarId>, cards: Vec<usize>, values: Vec<f64>, child: VarId) -> Result<Self> {
        let mut f = Factor::new(domain, cards, values)?;
        if !f.domain.contains(&child) {
            return Err(Error::Structural(format!("child {child} not in CPD domain")));
        }
        f.head = vec![child];
        validate_cpd(&f)?;
        f.cpd_pure = true;
        Ok(f)
    }

    pub fn scalar(value: f64) -> Self {
        Factor {
            domain: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
            head: Vec::new(),
            cpd_pure: false,
        }
    }

    /// The all-ones factor over `domain`.
    pub fn unity(domain: Vec<VarId>, cards: Vec<usize>) -> Result<Self> {
        let n = table_size(&cards);
        Factor::new(domain, cards, vec![1.0; n])
    }

    pub fn domain(&self) -> &[VarId] {
        &self.domain
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn head(&self) -> &[VarId] {
        &self.head
    }

    pub fn tail(&self) -> Vec<VarId> {
        self.domain
            .iter()
            .copied()
            .filter(|v| !self.head.contains(v))
            .collect()
    }

    pub fn is_cpd_pure(&self) -> bool {
        self.cpd_pure
    }

    /// Number of table cells.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_scalar(&self) -> bool {
        self.domain.is_empty()
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.domain.binary_search(&v).is_ok()
    }

    pub fn card_of(&self, v: VarId) -> Option<usize> {
        self.domain.binary_search(&v).ok().map(|i| self.cards[i])
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    /// True when every entry is exactly one.
    pub fn is_unity(&self) -> bool {
        self.values.iter().all(|&v| v == 1.0)
    }

    /// Pure factor whose head has been summed away entirely: a unity
    /// potential up to rounding.
    pub fn is_known_unity(&self) -> bool {
        self.cpd_pure && self.head.is_empty()
    }

    /// Row-major strides of this factor's own domain.
    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.domain.len()];
        for i in (0..self.domain.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.cards[i + 1];
        }
        strides
    }

    /// Stride of each variable of `target` inside this factor, 0 when absent.
    fn strides_in(&self, target: &[VarId]) -> Vec<usize> {
        let own = self.strides();
        target
            .iter()
            .map(|v| match self.domain.binary_search(v) {
                Ok(i) => own[i],
                Err(_) => 0,
            })
            .collect()
    }

    /// State index of each domain variable for a flat table index.
    pub fn assignment(&self, mut index: usize) -> Vec<usize> {
        let mut states = vec![0; self.domain.len()];
        for i in (0..self.domain.len()).rev() {
            states[i] = index % self.cards[i];
            index /= self.cards[i];
        }
        states
    }

    /// Flat table index of a full assignment (states in domain order).
    pub fn index_of(&self, states: &[usize]) -> usize {
        states
            .iter()
            .zip(&self.cards)
            .fold(0, |acc, (&s, &c)| acc * c + s)
    }

    pub fn value_at(&self, states: &[usize]) -> f64 {
        self.values[self.index_of(states)]
    }

    /// Pointwise product over the union of both domains.
    pub fn multiply(&self, other: &Factor) -> Result<Factor> {
        let mut domain = Vec::with_capacity(self.domain.len() + other.domain.len());
        let mut cards = Vec::with_capacity(domain.capacity());
        let (mut i, mut j) = (0, 0);
        while i < self.domain.len() || j < other.domain.len() {
            let a = self.domain.get(i);
            let b = other.domain.get(j);
            match (a, b) {
                (Some(&x), Some(&y)) if x == y => {
                    if self.cards[i] != other.cards[j] {
                        return Err(Error::Structural(format!(
                            "variable {x} has cardinality {} and {}",
                            self.cards[i], other.cards[j]
                        )));
                    }
                    domain.push(x);
                    cards.push(self.cards[i]);
                    i += 1;
                    j += 1;
                }
                (Some(&x), Some(&y)) if x < y => {
                    domain.push(x);
                    cards.push(self.cards[i]);
                    i += 1;
                }
                (Some(&x), None) => {
                    domain.push(x);
                    cards.push(self.cards[i]);
                    i += 1;
                }
                (_, Some(&y)) => {
                    domain.push(y);
                    cards.push(other.cards[j]);
                    j += 1;
                }
                (None, None) => unreachable!(),
            }
        }

        let sa = self.strides_in(&domain);
        let sb = other.strides_in(&domain);
        let n = table_size(&cards);
        let mut values = Vec::with_capacity(n);
        let mut counter = vec![0usize; domain.len()];
        let (mut ia, mut ib) = (0usize, 0usize);
        for _ in 0..n {
            values.push(self.values[ia] * other.values[ib]);
            for pos in (0..domain.len()).rev() {
                counter[pos] += 1;
                ia += sa[pos];
                ib += sb[pos];
                if counter[pos] < cards[pos] {
                    break;
                }
                ia -= sa[pos] * cards[pos];
                ib -= sb[pos] * cards[pos];
                counter[pos] = 0;
            }
        }

        let disjoint = self.head.iter().all(|h| !other.head.contains(h));
        let cpd_pure = self.cpd_pure && other.cpd_pure && disjoint;
        let head = if cpd_pure {
            let mut head: Vec<VarId> = self.head.iter().chain(&other.head).copied().collect();
            head.sort_unstable();
            head
        } else {
            Vec::new()
        };
        Ok(Factor {
            domain,
            cards,
            values,
            head,
            cpd_pure,
        })
    }

    /// Sum `v` out of the table.
    pub fn marginalize_out(&self, v: VarId) -> Result<Factor> {
        let pos = self
            .domain
            .binary_search(&v)
            .map_err(|_| Error::Structural(format!("cannot sum out {v}: not in domain")))?;
        let card = self.cards[pos];
        let inner: usize = self.cards[pos + 1..].iter().product();
        let outer: usize = self.cards[..pos].iter().product();
        let mut values = vec![0.0; outer * inner];
        for o in 0..outer {
            let src = o * card * inner;
            let dst = &mut values[o * inner..(o + 1) * inner];
            for k in 0..card {
                let row = &self.values[src + k * inner..src + (k + 1) * inner];
                for (d, s) in dst.iter_mut().zip(row) {
                    *d += s;
                }
            }
        }
        let mut domain = self.domain.clone();
        domain.remove(pos);
        let mut cards = self.cards.clone();
        cards.remove(pos);
        let keep = self.cpd_pure && self.head.contains(&v);
        let head = if keep {
            self.head.iter().copied().filter(|&h| h != v).collect()
        } else {
            Vec::new()
        };
        Ok(Factor {
            domain,
            cards,
            values,
            head,
            cpd_pure: keep,
        })
    }

    /// Sum out every variable not in `keep`, lowest id first.
    pub fn marginalize_onto(&self, keep: &[VarId]) -> Result<Factor> {
        let mut f = self.clone();
        for &v in &self.domain {
            if !keep.contains(&v) {
                f = f.marginalize_out(v)?;
            }
        }
        Ok(f)
    }

    /// The subtable consistent with `evidence`; observed variables leave the domain.
    pub fn reduce(&self, evidence: &Evidence) -> Factor {
        let observed: Vec<(usize, usize)> = self
            .domain
            .iter()
            .enumerate()
            .filter_map(|(i, v)| evidence.get(*v).map(|s| (i, s)))
            .collect();
        if observed.is_empty() {
            return self.clone();
        }
        let strides = self.strides();
        let base: usize = observed.iter().map(|&(i, s)| strides[i] * s).sum();
        let mut domain = Vec::new();
        let mut cards = Vec::new();
        let mut kept_strides = Vec::new();
        for i in 0..self.domain.len() {
            if !observed.iter().any(|&(o, _)| o == i) {
                domain.push(self.domain[i]);
                cards.push(self.cards[i]);
                kept_strides.push(strides[i]);
            }
        }
        let n = table_size(&cards);
        let mut values = Vec::with_capacity(n);
        let mut counter = vec![0usize; domain.len()];
        let mut idx = base;
        for _ in 0..n {
            values.push(self.values[idx]);
            for pos in (0..domain.len()).rev() {
                counter[pos] += 1;
                idx += kept_strides[pos];
                if counter[pos] < cards[pos] {
                    break;
                }
                idx -= kept_strides[pos] * cards[pos];
                counter[pos] = 0;
            }
        }
        let head_hit = self.head.iter().any(|h| evidence.get(*h).is_some());
        let cpd_pure = self.cpd_pure && !head_hit;
        Factor {
            domain,
            cards,
            values,
            head: if cpd_pure { self.head.clone() } else { Vec::new() },
            cpd_pure,
        }
    }

    /// Pointwise `self / other` with `0/0 = 0`; `other`'s domain must be a subset.
    pub fn divide(&self, other: &Factor) -> Result<Factor> {
        for (v, c) in other.domain.iter().zip(&other.cards) {
            match self.card_of(*v) {
                Some(own) if own == *c => {}
                Some(_) => {
                    return Err(Error::Structural(format!(
                        "variable {v} has mismatched cardinality in division"
                    )))
                }
                None => {
                    return Err(Error::Structural(format!(
                        "divisor variable {v} not in dividend domain"
                    )))
                }
            }
        }
        let sb = other.strides_in(&self.domain);
        let mut values = Vec::with_capacity(self.values.len());
        let mut counter = vec![0usize; self.domain.len()];
        let mut ib = 0usize;
        for &num in &self.values {
            let den = other.values[ib];
            let q = if den == 0.0 {
                if num == 0.0 {
                    0.0
                } else {
                    return Err(Error::Inconsistent { numerator: num });
                }
            } else {
                num / den
            };
            values.push(q);
            for pos in (0..self.domain.len()).rev() {
                counter[pos] += 1;
                ib += sb[pos];
                if counter[pos] < self.cards[pos] {
                    break;
                }
                ib -= sb[pos] * self.cards[pos];
                counter[pos] = 0;
            }
        }
        Ok(Factor {
            domain: self.domain.clone(),
            cards: self.cards.clone(),
            values,
            head: Vec::new(),
            cpd_pure: false,
        })
    }

    /// Scale so entries sum to one. Returns the mass before scaling.
    pub fn normalize(&mut self) -> f64 {
        let total = self.total();
        if total > 0.0 {
            for v in &mut self.values {
                *v /= total;
            }
        }
        total
    }
}

/// Check that the factor sums to one over its single head variable for every
/// tail configuration.
pub fn validate_cpd(f: &Factor) -> Result<()> {
    let [child] = f.head[..] else {
        return Err(Error::Structural(format!(
            "CPD validation needs exactly one head variable, found {}",
            f.head.len()
        )));
    };
    let summed = f.marginalize_out(child)?;
    for (index, &sum) in summed.values.iter().enumerate() {
        if (sum - 1.0).abs() > PROB_TOL {
            let states = summed.assignment(index);
            return Err(Error::NotNormalized {
                child,
                tail: summed.domain.iter().copied().zip(states).collect(),
                sum,
            });
        }
    }
    Ok(())
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "phi(")?;
        for (i, v) in self.domain.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ") = {:?}", self.values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: usize) -> VarId {
        VarId(i)
    }

    fn prior_a() -> Factor {
        Factor::cpd(vec![v(0)], vec![2], vec![0.3, 0.7], v(0)).unwrap()
    }

    fn b_given_a() -> Factor {
        Factor::cpd(vec![v(0), v(1)], vec![2, 2], vec![0.5, 0.5, 0.2, 0.8], v(1)).unwrap()
    }

    // Independent reference: evaluate the product assignment by assignment.
    fn enumerate_product(f: &Factor, g: &Factor, domain: &[VarId], cards: &[usize]) -> Vec<f64> {
        let n: usize = cards.iter().product();
        (0..n)
            .map(|mut idx| {
                let mut states = vec![0; domain.len()];
                for i in (0..domain.len()).rev() {
                    states[i] = idx % cards[i];
                    idx /= cards[i];
                }
                let pick = |h: &Factor| {
                    let s: Vec<usize> = h
                        .domain()
                        .iter()
                        .map(|x| states[domain.iter().position(|d| d == x).unwrap()])
                        .collect();
                    h.value_at(&s)
                };
                pick(f) * pick(g)
            })
            .collect()
    }

    #[test]
    fn multiply_by_unity_broadcasts() {
        let one = Factor::unity(vec![v(0), v(1)], vec![2, 2]).unwrap();
        let p = prior_a().multiply(&one).unwrap();
        assert_eq!(p.values(), &[0.3, 0.3, 0.7, 0.7]);
    }

    #[test]
    fn multiply_prior_and_conditional() {
        let p = prior_a().multiply(&b_given_a()).unwrap();
        let expected = enumerate_product(&prior_a(), &b_given_a(), &[v(0), v(1)], &[2, 2]);
        for (a, b) in p.values().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-15);
        }
        for (a, b) in p.values().iter().zip(&[0.15, 0.15, 0.14, 0.56]) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(p.is_cpd_pure());
        assert_eq!(p.head(), &[v(0), v(1)]);
    }

    #[test]
    fn multiply_overlapping_heads_is_opaque() {
        let p = b_given_a().multiply(&b_given_a()).unwrap();
        assert!(!p.is_cpd_pure());
        assert!(p.head().is_empty());
    }

    #[test]
    fn multiply_rejects_cardinality_clash() {
        let f = Factor::new(vec![v(0)], vec![3], vec![1.0; 3]).unwrap();
        assert!(matches!(f.multiply(&prior_a()), Err(Error::Structural(_))));
    }

    #[test]
    fn multiply_interleaved_domains() {
        let f = Factor::new(vec![v(0), v(2)], vec![2, 3], (1..=6).map(f64::from).collect()).unwrap();
        let g = Factor::new(vec![v(1), v(2)], vec![2, 3], (1..=6).map(|x| f64::from(x) * 10.0).collect()).unwrap();
        let p = f.multiply(&g).unwrap();
        let expected = enumerate_product(&f, &g, &[v(0), v(1), v(2)], &[2, 2, 3]);
        assert_eq!(p.values(), &expected[..]);
    }

    #[test]
    fn marginalize_conditional_gives_unity() {
        let h = Factor::cpd(
            vec![v(4), v(5), v(7)],
            vec![2, 2, 2],
            vec![0.1, 0.9, 0.4, 0.6, 0.5, 0.5, 0.75, 0.25],
            v(7),
        )
        .unwrap();
        let m = h.marginalize_out(v(7)).unwrap();
        assert_eq!(m.domain(), &[v(4), v(5)]);
        assert!(m.values().iter().all(|x| (x - 1.0).abs() < PROB_TOL));
        assert!(m.is_known_unity());
    }

    #[test]
    fn marginalize_joint_onto_first() {
        let joint = Factor::new(vec![v(0), v(1)], vec![2, 2], vec![0.15, 0.15, 0.14, 0.56]).unwrap();
        let m = joint.marginalize_out(v(1)).unwrap();
        assert_eq!(m.domain(), &[v(0)]);
        assert!((m.values()[0] - 0.3).abs() < 1e-12);
        assert!((m.values()[1] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn marginalize_to_scalar() {
        let m = prior_a().marginalize_out(v(0)).unwrap();
        assert!(m.is_scalar());
        assert!((m.values()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn marginalize_missing_variable_fails() {
        assert!(prior_a().marginalize_out(v(3)).is_err());
    }

    #[test]
    fn marginalize_tail_variable_loses_purity() {
        let m = b_given_a().marginalize_out(v(0)).unwrap();
        assert!(!m.is_cpd_pure());
    }

    #[test]
    fn reduce_empty_evidence_is_identity() {
        assert_eq!(b_given_a().reduce(&Evidence::new()), b_given_a());
    }

    #[test]
    fn reduce_tail_keeps_purity() {
        let mut e = Evidence::new();
        e.insert(v(0), 1).unwrap();
        let r = b_given_a().reduce(&e);
        assert_eq!(r.domain(), &[v(1)]);
        assert_eq!(r.values(), &[0.2, 0.8]);
        assert!(r.is_cpd_pure());
        assert_eq!(r.head(), &[v(1)]);
    }

    #[test]
    fn reduce_head_loses_purity() {
        let mut e = Evidence::new();
        e.insert(v(1), 0).unwrap();
        let r = b_given_a().reduce(&e);
        assert_eq!(r.values(), &[0.5, 0.2]);
        assert!(!r.is_cpd_pure());
        assert!(r.head().is_empty());
    }

    #[test]
    fn reduce_middle_variable() {
        let f = Factor::new(vec![v(0), v(1), v(2)], vec![2, 3, 2], (0..12).map(f64::from).collect()).unwrap();
        let mut e = Evidence::new();
        e.insert(v(1), 2).unwrap();
        let r = f.reduce(&e);
        assert_eq!(r.domain(), &[v(0), v(2)]);
        assert_eq!(r.values(), &[4.0, 5.0, 10.0, 11.0]);
    }

    #[test]
    fn divide_conventions() {
        let f = Factor::new(vec![v(0)], vec![2], vec![0.29, 0.71]).unwrap();
        let one = Factor::unity(vec![v(0)], vec![2]).unwrap();
        assert_eq!(f.divide(&one).unwrap().values(), f.values());
        assert_eq!(f.divide(&f).unwrap().values(), &[1.0, 1.0]);
        let z = Factor::new(vec![v(0)], vec![2], vec![0.0, 0.5]).unwrap();
        assert_eq!(z.divide(&z).unwrap().values(), &[0.0, 1.0]);
        assert_eq!(
            f.divide(&z),
            Err(Error::Inconsistent { numerator: 0.29 })
        );
    }

    #[test]
    fn divide_requires_subset_domain() {
        assert!(prior_a().divide(&b_given_a()).is_err());
    }

    #[test]
    fn validate_cpd_reports_tail() {
        assert!(validate_cpd(&b_given_a()).is_ok());
        let err = Factor::cpd(vec![v(0), v(1)], vec![2, 2], vec![0.5, 0.6, 0.2, 0.8], v(1)).unwrap_err();
        match err {
            Error::NotNormalized { child, tail, .. } => {
                assert_eq!(child, v(1));
                assert_eq!(tail, vec![(v(0), 0)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_negative_and_wrong_length() {
        assert!(Factor::new(vec![v(0)], vec![2], vec![0.5, -0.1]).is_err());
        assert!(Factor::new(vec![v(0)], vec![2], vec![0.5]).is_err());
        assert!(Factor::new(vec![v(1), v(0)], vec![2, 2], vec![1.0; 4]).is_err());
    }
}
