//! Random networks, random evidence, the evidence-count sweep and
//! network/junction-tree statistics.
//!
//! All randomness comes from `ChaCha8Rng`. The evidence for repetition `rep`
//! at evidence count `k` is drawn with the seed obtained by seeding
//! `ChaCha8Rng` with the base seed, switching to stream `(k << 32) | rep`,
//! and taking the first `u64`. Every engine sees the same evidence for a
//! given `(k, rep)`.

use std::fmt;
use std::io::Write;
use std::time::Instant;

use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::compile::JunctionTree;
use crate::engines::{propagate, EngineKind};
use crate::error::{Error, Result};
use crate::model::{BayesianNetwork, Evidence, VarId};

pub const RNG_ID: &str = "ChaCha8Rng";

/// Variable `i` draws `0..=min(i, max_parents)` parents uniformly from the
/// variables before it and a cardinality in `2..=max_card`; every CPD column
/// is a draw from the symmetric Dirichlet(1).
pub fn generate_random_network(n: usize, max_parents: usize, max_card: usize, seed: u64) -> Result<BayesianNetwork> {
    if n == 0 {
        return Err(Error::Argument("network needs at least one variable".into()));
    }
    if max_card < 2 {
        return Err(Error::Argument("max_card must be at least 2".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut b = BayesianNetwork::builder(format!("random_n{n}_p{max_parents}_c{max_card}_s{seed}"));
    for i in 0..n {
        let card = rng.random_range(2..=max_card);
        let id = b.add_variable(format!("X{i}"), (0..card).map(|s| format!("s{s}")))?;
        let k = rng.random_range(0..=i.min(max_parents));
        let mut parents: Vec<VarId> = index::sample(&mut rng, i, k).into_iter().map(VarId).collect();
        parents.sort_unstable();
        // parents precede the child, so the child is the fastest-varying axis
        let columns: usize = parents.iter().map(|p| b.variable(*p).cardinality()).product();
        let mut values = Vec::with_capacity(columns * card);
        for _ in 0..columns {
            let draws: Vec<f64> = (0..card).map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let total: f64 = draws.iter().sum();
            values.extend(draws.iter().map(|d| d / total));
        }
        b.set_cpd(id, parents, values)?;
    }
    b.build()
}

/// `k` distinct variables chosen uniformly, each set to a uniform state.
pub fn sample_evidence(bn: &BayesianNetwork, k: usize, seed: u64) -> Result<Evidence> {
    if k > bn.len() {
        return Err(Error::Argument(format!(
            "cannot observe {k} of {} variables",
            bn.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars = index::sample(&mut rng, bn.len(), k);
    let mut e = Evidence::new();
    for v in vars {
        let state = rng.random_range(0..bn.cardinality(VarId(v)));
        e.insert(VarId(v), state)?;
    }
    Ok(e)
}

/// Seed of the evidence draw for repetition `rep` at evidence count `k`.
pub fn rep_seed(base: u64, k: usize, rep: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(((k as u64) << 32) | rep as u64);
    rng.next_u64()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchConfig {
    pub counts: Vec<usize>,
    pub reps: usize,
    pub engines: Vec<EngineKind>,
    pub seed: u64,
}

impl BenchConfig {
    pub fn validate(&self, bn: &BayesianNetwork) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Argument("reps must be at least 1".into()));
        }
        if self.engines.is_empty() {
            return Err(Error::Argument("no engines selected".into()));
        }
        if let Some(k) = self.counts.iter().find(|&&k| k > bn.len()) {
            return Err(Error::Argument(format!(
                "evidence count {k} exceeds {} variables",
                bn.len()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub engine: EngineKind,
    pub n_evidence: usize,
    pub rep: usize,
    pub seed: u64,
    pub wall_ms: f64,
    pub sum_outs: u64,
    pub mults: u64,
    pub cells_touched: u64,
    pub max_table: u64,
    pub p_evidence: f64,
    pub impossible: bool,
}

pub const CSV_COLUMNS: [&str; 11] = [
    "engine",
    "n_evidence",
    "rep",
    "seed",
    "wall_ms",
    "sum_outs",
    "mults",
    "cells_touched",
    "max_table",
    "p_evidence",
    "impossible_flag",
];

/// One row per `(count, rep, engine)`, in that nesting order.
pub fn run_benchmark_sweep(bn: &BayesianNetwork, jt: &JunctionTree, config: &BenchConfig) -> Result<Vec<BenchRow>> {
    config.validate(bn)?;
    let cases: Vec<(usize, usize)> = config
        .counts
        .iter()
        .flat_map(|&k| (0..config.reps).map(move |r| (k, r)))
        .collect();
    let rows: Vec<Result<Vec<BenchRow>>> = cases
        .par_iter()
        .map(|&(k, rep)| {
            let seed = rep_seed(config.seed, k, rep);
            let evidence = sample_evidence(bn, k, seed)?;
            config
                .engines
                .iter()
                .map(|&engine| {
                    let start = Instant::now();
                    let outcome = propagate(engine, bn, jt, &evidence);
                    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
                    let mut row = BenchRow {
                        engine,
                        n_evidence: k,
                        rep,
                        seed,
                        wall_ms,
                        sum_outs: 0,
                        mults: 0,
                        cells_touched: 0,
                        max_table: 0,
                        p_evidence: 0.0,
                        impossible: false,
                    };
                    match outcome {
                        Ok(run) => {
                            let t = run.trace();
                            row.sum_outs = t.sum_outs;
                            row.mults = t.mults;
                            row.cells_touched = t.cells_touched;
                            row.max_table = t.max_table;
                            row.p_evidence = run.prob_evidence();
                        }
                        Err(Error::ImpossibleEvidence) => row.impossible = true,
                        Err(e) => return Err(e),
                    }
                    Ok(row)
                })
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(cases.len() * config.engines.len());
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

/// Write the provenance comment line, the column header and all rows.
pub fn write_csv<W: Write>(out: W, rows: &[BenchRow]) -> anyhow::Result<()> {
    let mut out = out;
    writeln!(
        out,
        "# lazyprop {} rng={RNG_ID} evidence-stream=(n_evidence<<32)|rep",
        env!("CARGO_PKG_VERSION")
    )?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in rows {
        w.write_record([
            r.engine.name().to_string(),
            r.n_evidence.to_string(),
            r.rep.to_string(),
            r.seed.to_string(),
            format!("{:.3}", r.wall_ms),
            r.sum_outs.to_string(),
            r.mults.to_string(),
            r.cells_touched.to_string(),
            r.max_table.to_string(),
            r.p_evidence.to_string(),
            u8::from(r.impossible).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl Summary {
    fn of(xs: impl IntoIterator<Item = f64>) -> Summary {
        let xs: Vec<f64> = xs.into_iter().collect();
        if xs.is_empty() {
            return Summary { min: 0.0, max: 0.0, mean: 0.0 };
        }
        Summary {
            min: xs.iter().copied().fold(f64::INFINITY, f64::min),
            max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: xs.iter().sum::<f64>() / xs.len() as f64,
        }
    }
}

/// Size statistics of a network and its junction tree.
#[derive(Clone, Debug, PartialEq)]
pub struct StatsRow {
    pub network: String,
    pub nodes: usize,
    pub node_potential_size: Summary,
    pub cliques: usize,
    pub clique_state_space: Summary,
    pub clique_neighbors: Summary,
}

impl StatsRow {
    pub const HEADER: &'static str =
        "network\tnodes\tpot_min\tpot_max\tpot_mean\tcliques\tspace_min\tspace_max\tspace_mean\tnbr_min\tnbr_max\tnbr_mean";
}

impl fmt::Display for StatsRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = |x: &Summary| format!("{}\t{}\t{:.1}", x.min, x.max, x.mean);
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}",
            self.network,
            self.nodes,
            s(&self.node_potential_size),
            self.cliques,
            s(&self.clique_state_space),
            s(&self.clique_neighbors)
        )
    }
}

pub fn network_stats(bn: &BayesianNetwork, jt: &JunctionTree) -> StatsRow {
    StatsRow {
        network: bn.name().to_string(),
        nodes: bn.len(),
        node_potential_size: Summary::of(bn.cpds().iter().map(|f| f.len() as f64)),
        cliques: jt.len(),
        clique_state_space: Summary::of(
            jt.cliques()
                .iter()
                .map(|c| c.iter().map(|v| bn.cardinality(*v) as f64).product()),
        ),
        clique_neighbors: Summary::of((0..jt.len()).map(|c| jt.neighbors(c).len() as f64)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::{compile, Heuristic};
    use crate::fixtures;
    use crate::parser::serialize_network;

    #[test]
    fn generator_is_deterministic_and_bounded() {
        let a = generate_random_network(50, 3, 4, 11).unwrap();
        let b = generate_random_network(50, 3, 4, 11).unwrap();
        assert_eq!(serialize_network(&a), serialize_network(&b));
        for v in a.var_ids() {
            assert!(a.parents(v).len() <= 3);
            assert!(a.parents(v).iter().all(|p| p.0 < v.0));
            let c = a.cardinality(v);
            assert!((2..=4).contains(&c));
        }
        assert_ne!(serialize_network(&a), serialize_network(&generate_random_network(50, 3, 4, 12).unwrap()));
    }

    #[test]
    fn generator_rejects_bad_parameters() {
        assert!(generate_random_network(0, 3, 4, 1).is_err());
        assert!(generate_random_network(5, 3, 1, 1).is_err());
    }

    #[test]
    fn evidence_sampling() {
        let bn = generate_random_network(20, 2, 3, 5).unwrap();
        assert!(sample_evidence(&bn, 0, 1).unwrap().is_empty());
        let all = sample_evidence(&bn, 20, 1).unwrap();
        assert_eq!(all.len(), 20);
        assert_eq!(sample_evidence(&bn, 7, 99).unwrap(), sample_evidence(&bn, 7, 99).unwrap());
        assert!(sample_evidence(&bn, 21, 1).is_err());
        bn.check_evidence(&all).unwrap();
    }

    #[test]
    fn rep_seeds_differ_per_stream() {
        assert_ne!(rep_seed(1, 0, 0), rep_seed(1, 0, 1));
        assert_ne!(rep_seed(1, 1, 0), rep_seed(1, 0, 1));
        assert_eq!(rep_seed(1, 3, 4), rep_seed(1, 3, 4));
    }

    #[test]
    fn sweep_row_count_and_agreement() {
        let bn = generate_random_network(20, 2, 3, 3).unwrap();
        let jt = compile(&bn, Heuristic::MinWeight).unwrap();
        let cfg = BenchConfig {
            counts: vec![0, 5, 10],
            reps: 4,
            engines: EngineKind::ALL.to_vec(),
            seed: 1,
        };
        let rows = run_benchmark_sweep(&bn, &jt, &cfg).unwrap();
        assert_eq!(rows.len(), 3 * 4 * 3);
        for chunk in rows.chunks(3) {
            let p = chunk[0].p_evidence;
            for r in chunk {
                assert_eq!((r.n_evidence, r.rep), (chunk[0].n_evidence, chunk[0].rep));
                assert!(((r.p_evidence - p) / p).abs() < 1e-9);
            }
        }
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# lazyprop"));
        assert_eq!(text.lines().count(), 2 + rows.len());
        assert_eq!(text.lines().nth(1).unwrap(), CSV_COLUMNS.join(","));
    }

    #[test]
    fn sweep_validates_config() {
        let bn = fixtures::two_var();
        let jt = compile(&bn, Heuristic::MinWeight).unwrap();
        let mut cfg = BenchConfig { counts: vec![3], reps: 1, engines: vec![EngineKind::Lazy], seed: 0 };
        assert!(run_benchmark_sweep(&bn, &jt, &cfg).is_err());
        cfg.counts = vec![1];
        cfg.reps = 0;
        assert!(run_benchmark_sweep(&bn, &jt, &cfg).is_err());
    }

    #[test]
    fn stats_two_variable() {
        let bn = fixtures::two_var();
        let jt = compile(&bn, Heuristic::MinWeight).unwrap();
        let s = network_stats(&bn, &jt);
        assert_eq!(s.nodes, 2);
        assert_eq!(s.node_potential_size, Summary { min: 2.0, max: 4.0, mean: 3.0 });
        assert_eq!(s.cliques, 1);
        assert_eq!(s.clique_state_space, Summary { min: 4.0, max: 4.0, mean: 4.0 });
        assert_eq!(s.clique_neighbors, Summary { min: 0.0, max: 0.0, mean: 0.0 });
    }

    #[test]
    fn stats_nine_var() {
        let bn = fixtures::nine_var();
        let jt = fixtures::nine_var_tree(&bn);
        let s = network_stats(&bn, &jt);
        assert_eq!(s.cliques, 7);
        assert_eq!(s.clique_state_space.min, 8.0);
        assert_eq!(s.clique_state_space.max, 8.0);
        assert!((s.clique_neighbors.mean - 12.0 / 7.0).abs() < 1e-12);
        let line = s.to_string();
        assert_eq!(line.split('\t').count(), StatsRow::HEADER.split('\t').count());
    }

    #[test]
    fn stats_single_variable() {
        let mut b = BayesianNetwork::builder("one");
        let a = b.add_variable("A", ["0", "1", "2"]).unwrap();
        b.set_cpd(a, vec![], vec![0.2, 0.3, 0.5]).unwrap();
        let bn = b.build().unwrap();
        let jt = compile(&bn, Heuristic::MinFill).unwrap();
        let s = network_stats(&bn, &jt);
        assert_eq!((s.cliques, s.clique_neighbors.max), (1, 0.0));
    }
}
