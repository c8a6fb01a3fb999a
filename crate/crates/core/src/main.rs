use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};

use lazyprop::bench::{generate_random_network, network_stats, run_benchmark_sweep, write_csv, BenchConfig, StatsRow};
use lazyprop::oracle::d_separated;
use lazyprop::parser::{parse_evidence, parse_junction_tree, parse_network, serialize_junction_tree};
use lazyprop::{compile, propagate, BayesianNetwork, EngineKind, Evidence, Heuristic, JunctionTree, VarId};

/// Exact inference in discrete Bayesian networks by junction-tree propagation.
#[derive(Parser)]
#[command(name = "lazyprop", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TreeArgs {
    /// Triangulation heuristic
    #[arg(long, default_value = "min-weight")]
    heuristic: Heuristic,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a network into a junction tree
    Compile {
        #[arg(long)]
        net: PathBuf,
        /// Write the tree here instead of stdout
        #[arg(long)]
        jt: Option<PathBuf>,
        #[command(flatten)]
        tree: TreeArgs,
    },
    /// Posterior marginals given evidence
    Query {
        #[arg(long)]
        net: PathBuf,
        /// Evidence file of `NAME=STATE` lines
        #[arg(long)]
        evidence: Option<PathBuf>,
        #[arg(long, default_value = "lazy")]
        engine: EngineKind,
        /// `all` or a comma-separated list of variable names
        #[arg(long, default_value = "all")]
        marginals: String,
        /// Print operation counters
        #[arg(long)]
        trace: bool,
        /// Use this junction tree instead of compiling one
        #[arg(long)]
        jt: Option<PathBuf>,
        #[command(flatten)]
        tree: TreeArgs,
    },
    /// Evidence-count sweep over one or more engines, written as CSV
    Bench {
        #[arg(long, conflicts_with = "random", required_unless_present = "random")]
        net: Option<PathBuf>,
        /// Generate the network instead: `n=50,maxpa=3,card=4`
        #[arg(long)]
        random: Option<String>,
        /// Evidence counts `start:end:step` (inclusive) or a single count
        #[arg(long, default_value = "0")]
        counts: String,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        /// Comma-separated engine names
        #[arg(long, default_value = "hugin,ss,lazy")]
        engines: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// CSV destination; stdout when absent
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        jt: Option<PathBuf>,
        #[command(flatten)]
        tree: TreeArgs,
    },
    /// Network and junction tree size statistics
    Stats {
        #[arg(long, required = true)]
        net: Vec<PathBuf>,
        #[command(flatten)]
        tree: TreeArgs,
    },
    /// Test `X ⊥ Y | Z`: `dsep --net F X Y | Z`, sets comma-separated
    Dsep {
        #[arg(long)]
        net: PathBuf,
        #[arg(num_args = 2.., allow_hyphen_values = true)]
        query: Vec<String>,
    },
    /// Parse a network and check every CPD
    Validate {
        #[arg(long)]
        net: PathBuf,
    },
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_network(path: &Path) -> anyhow::Result<BayesianNetwork> {
    parse_network(&read(path)?).with_context(|| path.display().to_string())
}

fn load_tree(bn: &BayesianNetwork, jt: Option<&Path>, heuristic: Heuristic) -> anyhow::Result<JunctionTree> {
    match jt {
        Some(p) => Ok(parse_junction_tree(&read(p)?, bn).with_context(|| p.display().to_string())?),
        None => Ok(compile(bn, heuristic)?),
    }
}

fn names_to_ids(bn: &BayesianNetwork, list: &str) -> anyhow::Result<Vec<VarId>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| Ok(bn.lookup(s)?))
        .collect()
}

fn parse_counts(text: &str) -> anyhow::Result<Vec<usize>> {
    let parts: Vec<usize> = text
        .split(':')
        .map(|p| p.trim().parse::<usize>().with_context(|| format!("bad count `{p}`")))
        .collect::<anyhow::Result<_>>()?;
    match parts[..] {
        [k] => Ok(vec![k]),
        [a, b] => Ok((a..=b).collect()),
        [a, b, step] if step > 0 => Ok((a..=b).step_by(step).collect()),
        _ => bail!("counts must be `start:end:step` with a positive step"),
    }
}

fn parse_random(text: &str) -> anyhow::Result<(usize, usize, usize)> {
    let (mut n, mut maxpa, mut card) = (None, 3, 2);
    for kv in text.split(',') {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| anyhow!("expected key=value in `{kv}`"))?;
        let v: usize = v.trim().parse().with_context(|| format!("bad value for `{k}`"))?;
        match k.trim() {
            "n" => n = Some(v),
            "maxpa" => maxpa = v,
            "card" => card = v,
            other => bail!("unknown random-network key `{other}`"),
        }
    }
    Ok((n.ok_or_else(|| anyhow!("random network needs n=..."))?, maxpa, card))
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Compile { net, jt, tree } => {
            let bn = load_network(&net)?;
            let text = serialize_junction_tree(&compile(&bn, tree.heuristic)?, &bn);
            match jt {
                Some(p) => fs::write(&p, text).with_context(|| format!("cannot write {}", p.display()))?,
                None => out.write_all(text.as_bytes())?,
            }
        }
        Command::Query { net, evidence, engine, marginals, trace, jt, tree } => {
            let bn = load_network(&net)?;
            let jt = load_tree(&bn, jt.as_deref(), tree.heuristic)?;
            let evidence = match evidence {
                Some(p) => parse_evidence(&read(&p)?, &bn).with_context(|| p.display().to_string())?,
                None => Evidence::new(),
            };
            let vars = if marginals == "all" {
                bn.var_ids().collect()
            } else {
                names_to_ids(&bn, &marginals)?
            };
            let result = propagate(engine, &bn, &jt, &evidence)?;
            writeln!(out, "P(evidence) = {:.12e}", result.prob_evidence())?;
            for v in vars {
                let var = bn.variable(v);
                let dist = result.marginal(v)?;
                let cells: Vec<String> = var
                    .states
                    .iter()
                    .zip(&dist)
                    .map(|(s, p)| format!("{s}={p:.6}"))
                    .collect();
                writeln!(out, "{}: {}", var.name, cells.join(" "))?;
            }
            if trace {
                let t = result.trace();
                writeln!(
                    out,
                    "trace: engine={} sum_outs={} mults={} divisions={} cells_touched={} max_table={}",
                    engine, t.sum_outs, t.mults, t.divisions, t.cells_touched, t.max_table
                )?;
                let widths: Vec<String> = t.sum_out_widths.iter().map(|(w, c)| format!("{w}:{c}")).collect();
                writeln!(out, "sum-out widths: {}", widths.join(" "))?;
            }
        }
        Command::Bench { net, random, counts, reps, engines, seed, out: dest, jt, tree } => {
            let bn = match (net, random) {
                (Some(p), _) => load_network(&p)?,
                (None, Some(text)) => {
                    let (n, maxpa, card) = parse_random(&text)?;
                    generate_random_network(n, maxpa, card, seed)?
                }
                (None, None) => bail!("give --net or --random"),
            };
            let jt = load_tree(&bn, jt.as_deref(), tree.heuristic)?;
            let engines = engines
                .split(',')
                .map(|e| e.trim().parse::<EngineKind>())
                .collect::<Result<Vec<_>, _>>()?;
            let config = BenchConfig { counts: parse_counts(&counts)?, reps, engines, seed };
            let rows = run_benchmark_sweep(&bn, &jt, &config)?;
            match dest {
                Some(p) => {
                    let f = fs::File::create(&p).with_context(|| format!("cannot write {}", p.display()))?;
                    write_csv(io::BufWriter::new(f), &rows)?;
                }
                None => write_csv(&mut out, &rows)?,
            }
        }
        Command::Stats { net, tree } => {
            writeln!(out, "{}", StatsRow::HEADER)?;
            for p in net {
                let bn = load_network(&p)?;
                let jt = compile(&bn, tree.heuristic)?;
                writeln!(out, "{}", network_stats(&bn, &jt))?;
            }
        }
        Command::Dsep { net, query } => {
            let bn = load_network(&net)?;
            let (xy, z) = match query.iter().position(|s| s == "|") {
                Some(i) => (&query[..i], &query[i + 1..]),
                None => (&query[..], &[][..]),
            };
            let [x, y] = xy else {
                bail!("expected `X Y | Z`, got {} set(s) before `|`", xy.len());
            };
            let x = names_to_ids(&bn, x)?;
            let y = names_to_ids(&bn, y)?;
            let z = names_to_ids(&bn, &z.join(","))?;
            let sep = d_separated(&bn, &x, &y, &z)?;
            writeln!(out, "{}", if sep { "d-separated" } else { "d-connected" })?;
        }
        Command::Validate { net } => {
            let bn = load_network(&net)?;
            let params: usize = bn.cpds().iter().map(|f| f.len()).sum();
            writeln!(out, "ok: {} variables, {} CPD entries", bn.len(), params)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
