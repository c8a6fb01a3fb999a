//! Line-oriented text formats for networks, evidence and junction trees.
//!
//! Network files:
//!
//! ```text
//! net NAME
//! var NAME STATE1 STATE2 ...
//! cpd CHILD | PARENT1 PARENT2 ... : v1 v2 ...
//! ```
//!
//! CPD values are listed over the ascending domain `{child} ∪ parents`
//! (declaration order), last variable varying fastest. A root variable may
//! omit the `|`. Evidence files hold one `NAME=STATE` per line. Junction-tree
//! files use `clique ID VAR...`, `edge ID ID` and `assign VAR -> ID`.
//! `#` starts a comment everywhere.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::compile::{assign_potentials, verify_rip, JunctionTree};
use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, Evidence, VarId};

#[derive(Clone, Debug, PartialEq)]
struct Token<'a> {
    text: &'a str,
    column: usize,
}

struct Line<'a> {
    number: usize,
    tokens: Vec<Token<'a>>,
}

impl Line<'_> {
    fn error(&self, column: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            line: self.number,
            column,
            message: message.into(),
        }
    }

    fn end_column(&self) -> usize {
        self.tokens
            .last()
            .map_or(1, |t| t.column + t.text.chars().count())
    }
}

fn is_punct(c: char) -> bool {
    matches!(c, '|' | ':' | '=')
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let line = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut tokens = Vec::new();
    let mut start: Option<(usize, usize)> = None;
    let chars: Vec<(usize, char)> = line.char_indices().collect();
    let mut k = 0;
    while k < chars.len() {
        let (byte, c) = chars[k];
        let arrow = c == '-' && chars.get(k + 1).is_some_and(|&(_, n)| n == '>');
        if c.is_whitespace() || is_punct(c) || arrow {
            if let Some((s, col)) = start.take() {
                tokens.push(Token { text: &line[s..byte], column: col });
            }
            if is_punct(c) {
                tokens.push(Token { text: &line[byte..byte + 1], column: k + 1 });
            } else if arrow {
                tokens.push(Token { text: &line[byte..byte + 2], column: k + 1 });
                k += 1;
            }
        } else if start.is_none() {
            start = Some((byte, k + 1));
        }
        k += 1;
    }
    if let Some((s, col)) = start {
        tokens.push(Token { text: &line[s..], column: col });
    }
    tokens
}

fn lines(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines()
        .enumerate()
        .map(|(i, l)| Line { number: i + 1, tokens: tokenize(l) })
        .filter(|l| !l.tokens.is_empty())
}

fn is_name(s: &str) -> bool {
    !s.is_empty() && !s.contains("->") && !s.chars().any(|c| c.is_whitespace() || is_punct(c) || c == '#')
}

fn expect_name<'a>(line: &Line<'a>, at: usize, what: &str) -> Result<&'a str> {
    match line.tokens.get(at) {
        Some(t) if is_name(t.text) => Ok(t.text),
        Some(t) => Err(line.error(t.column, format!("expected {what}, found `{}`", t.text))),
        None => Err(line.error(line.end_column(), format!("expected {what}"))),
    }
}

pub fn parse_network(text: &str) -> Result<BayesianNetwork> {
    let mut builder = None;
    let mut last_line = 0;
    for line in lines(text) {
        last_line = line.number;
        let kw = &line.tokens[0];
        match kw.text {
            "net" => {
                if builder.is_some() {
                    return Err(line.error(kw.column, "second `net` declaration"));
                }
                let name = expect_name(&line, 1, "network name")?;
                if let Some(t) = line.tokens.get(2) {
                    return Err(line.error(t.column, "unexpected token after network name"));
                }
                builder = Some(BayesianNetwork::builder(name));
            }
            "var" => {
                let b = builder
                    .as_mut()
                    .ok_or_else(|| line.error(kw.column, "`var` before `net`"))?;
                let name = expect_name(&line, 1, "variable name")?;
                let mut states = Vec::new();
                for (k, _) in line.tokens.iter().enumerate().skip(2) {
                    states.push(expect_name(&line, k, "state label")?);
                }
                if states.is_empty() {
                    return Err(line.error(line.end_column(), "variable needs at least one state"));
                }
                b.add_variable(name, states)
                    .map_err(|e| line.error(line.tokens[1].column, semantic(e)))?;
            }
            "cpd" => {
                let b = builder
                    .as_mut()
                    .ok_or_else(|| line.error(kw.column, "`cpd` before `net`"))?;
                parse_cpd(&line, b)?;
            }
            other => {
                return Err(line.error(kw.column, format!("unknown statement `{other}`")));
            }
        }
    }
    let builder = builder.ok_or_else(|| Error::Parse {
        line: last_line.max(1),
        column: 1,
        message: "missing `net` declaration".into(),
    })?;
    builder.build().map_err(|e| Error::Parse {
        line: last_line + 1,
        column: 1,
        message: semantic(e),
    })
}

fn semantic(e: Error) -> String {
    match e {
        Error::Network(m) | Error::Structural(m) => m,
        other => other.to_string(),
    }
}

fn parse_cpd(line: &Line<'_>, b: &mut crate::model::NetworkBuilder) -> Result<()> {
    let lookup = |k: usize| -> Result<VarId> {
        let name = expect_name(line, k, "variable name")?;
        b.id_of(name)
            .ok_or_else(|| line.error(line.tokens[k].column, format!("undeclared variable `{name}`")))
    };
    let child = lookup(1)?;
    let mut k = 2;
    let mut parents = Vec::new();
    if line.tokens.get(k).map(|t| t.text) == Some("|") {
        k += 1;
        while let Some(t) = line.tokens.get(k) {
            if t.text == ":" {
                break;
            }
            parents.push(lookup(k)?);
            k += 1;
        }
    }
    match line.tokens.get(k) {
        Some(t) if t.text == ":" => k += 1,
        Some(t) => return Err(line.error(t.column, format!("expected `:` or `|`, found `{}`", t.text))),
        None => return Err(line.error(line.end_column(), "expected `:` before CPD values")),
    }
    let mut values = Vec::new();
    for t in &line.tokens[k..] {
        let v: f64 = t
            .text
            .parse()
            .map_err(|_| line.error(t.column, format!("`{}` is not a number", t.text)))?;
        if !v.is_finite() || v < 0.0 {
            return Err(line.error(t.column, format!("probability {v} is not a finite non-negative number")));
        }
        values.push(v);
    }
    let expected: usize = std::iter::once(child)
        .chain(parents.iter().copied())
        .map(|v| b.variable(v).cardinality())
        .product();
    if values.len() != expected {
        return Err(line.error(
            line.tokens[k.min(line.tokens.len() - 1)].column,
            format!("CPD of `{}` needs {expected} values, found {}", line.tokens[1].text, values.len()),
        ));
    }
    b.set_cpd(child, parents, values)
        .map_err(|e| line.error(line.tokens[1].column, semantic(e)))
}

/// Deterministic text form; values use shortest round-trip decimal formatting.
pub fn serialize_network(bn: &BayesianNetwork) -> String {
    let mut out = String::new();
    writeln!(out, "net {}", bn.name()).unwrap();
    for v in bn.variables() {
        writeln!(out, "var {} {}", v.name, v.states.join(" ")).unwrap();
    }
    for v in bn.var_ids() {
        let name = &bn.variable(v).name;
        let parents = bn.parents(v);
        out.push_str("cpd ");
        out.push_str(name);
        if !parents.is_empty() {
            out.push_str(" |");
            for p in parents {
                out.push(' ');
                out.push_str(&bn.variable(*p).name);
            }
        }
        out.push_str(" :");
        for x in bn.cpd(v).values() {
            write!(out, " {x}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn parse_evidence(text: &str, bn: &BayesianNetwork) -> Result<Evidence> {
    let mut evidence = Evidence::new();
    for line in lines(text) {
        let name = expect_name(&line, 0, "variable name")?;
        match line.tokens.get(1) {
            Some(t) if t.text == "=" => {}
            Some(t) => return Err(line.error(t.column, "expected `=`")),
            None => return Err(line.error(line.end_column(), "expected `=`")),
        }
        let state = expect_name(&line, 2, "state label")?;
        if let Some(t) = line.tokens.get(3) {
            return Err(line.error(t.column, "unexpected token after state"));
        }
        let var = bn
            .find(name)
            .ok_or_else(|| line.error(line.tokens[0].column, format!("unknown variable `{name}`")))?;
        let idx = bn
            .variable(var)
            .state_index(state)
            .ok_or_else(|| line.error(line.tokens[2].column, format!("`{name}` has no state `{state}`")))?;
        evidence
            .insert(var, idx)
            .map_err(|_| line.error(line.tokens[0].column, format!("`{name}` observed twice")))?;
    }
    Ok(evidence)
}

pub fn serialize_evidence(evidence: &Evidence, bn: &BayesianNetwork) -> String {
    let mut out = String::new();
    for (v, s) in evidence.iter() {
        let var = bn.variable(v);
        writeln!(out, "{}={}", var.name, var.states[s]).unwrap();
    }
    out
}

/// Read a pinned junction tree. Without `assign` lines the lowest-index rule
/// is applied. The result is checked for the running intersection property.
pub fn parse_junction_tree(text: &str, bn: &BayesianNetwork) -> Result<JunctionTree> {
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut cliques = Vec::new();
    let mut edges = Vec::new();
    let mut assign: Vec<Option<usize>> = vec![None; bn.len()];
    let mut any_assign = false;
    let mut last_line = 0;
    let var = |line: &Line<'_>, k: usize| -> Result<VarId> {
        let name = expect_name(line, k, "variable name")?;
        bn.find(name)
            .ok_or_else(|| line.error(line.tokens[k].column, format!("unknown variable `{name}`")))
    };
    for line in lines(text) {
        last_line = line.number;
        let kw = &line.tokens[0];
        let clique_ref = |k: usize, ids: &HashMap<&str, usize>| -> Result<usize> {
            let id = expect_name(&line, k, "clique id")?;
            ids.get(id)
                .copied()
                .ok_or_else(|| line.error(line.tokens[k].column, format!("unknown clique `{id}`")))
        };
        match kw.text {
            "clique" => {
                let id = expect_name(&line, 1, "clique id")?;
                if ids.contains_key(id) {
                    return Err(line.error(line.tokens[1].column, format!("clique `{id}` declared twice")));
                }
                let mut members = Vec::new();
                for k in 2..line.tokens.len() {
                    let v = var(&line, k)?;
                    if members.contains(&v) {
                        return Err(line.error(line.tokens[k].column, "variable repeated in clique"));
                    }
                    members.push(v);
                }
                if members.is_empty() {
                    return Err(line.error(line.end_column(), "empty clique"));
                }
                ids.insert(id, cliques.len());
                cliques.push(members);
            }
            "edge" => {
                let a = clique_ref(1, &ids)?;
                let b = clique_ref(2, &ids)?;
                if let Some(t) = line.tokens.get(3) {
                    return Err(line.error(t.column, "unexpected token after edge"));
                }
                edges.push((a, b));
            }
            "assign" => {
                let v = var(&line, 1)?;
                match line.tokens.get(2) {
                    Some(t) if t.text == "->" => {}
                    Some(t) => return Err(line.error(t.column, "expected `->`")),
                    None => return Err(line.error(line.end_column(), "expected `->`")),
                }
                let c = clique_ref(3, &ids)?;
                if assign[v.0].replace(c).is_some() {
                    return Err(line.error(line.tokens[1].column, "CPD assigned twice"));
                }
                any_assign = true;
            }
            other => return Err(line.error(kw.column, format!("unknown statement `{other}`"))),
        }
    }
    let at_end = |e: Error| Error::Parse {
        line: last_line + 1,
        column: 1,
        message: e.to_string(),
    };
    let jt = JunctionTree::new(cliques, edges).map_err(at_end)?;
    verify_rip(&jt).map_err(at_end)?;
    if any_assign {
        let assignment = assign
            .iter()
            .enumerate()
            .map(|(v, c)| {
                c.ok_or_else(|| Error::JunctionTree(format!("no assignment for {}", bn.variable(VarId(v)).name)))
            })
            .collect::<Result<Vec<_>>>()
            .map_err(at_end)?;
        jt.with_assignment(bn, assignment).map_err(at_end)
    } else {
        assign_potentials(jt, bn).map_err(at_end)
    }
}

pub fn serialize_junction_tree(jt: &JunctionTree, bn: &BayesianNetwork) -> String {
    let mut out = String::new();
    for (i, c) in jt.cliques().iter().enumerate() {
        write!(out, "clique {i}").unwrap();
        for v in c {
            write!(out, " {}", bn.variable(*v).name).unwrap();
        }
        out.push('\n');
    }
    for (a, b) in jt.edges() {
        writeln!(out, "edge {a} {b}").unwrap();
    }
    if jt.is_assigned() {
        for v in bn.var_ids() {
            writeln!(out, "assign {} -> {}", bn.variable(v).name, jt.home_of(v)).unwrap();
        }
    }
    out
}
