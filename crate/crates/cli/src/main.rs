use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use dispersion_core::checkers::Checker;
use dispersion_core::engine::{run, SimulationConfig};
use dispersion_core::graph::{gen_worstcase, parse_graph, write_graph, GraphSpec, NodeId, PortLabeledGraph};
use dispersion_core::trace::{read_trace, write_trace, Outcome, TraceLevel};

const EXIT_OK: u8 = 0;
const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_FAULT: u8 = 2;
const EXIT_USAGE: u8 = 3;

/// Simulate dispersion of anonymous robots and verify the recorded traces.
#[derive(Debug, Parser)]
#[command(name = "dispersion", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one simulation and print its summary.
    Run {
        /// Graph file, or an inline spec such as `gen:random:20:40:7`.
        #[arg(long)]
        graph: String,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 0)]
        root: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the full JSON-lines trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        max_rounds: Option<u64>,
    },
    /// Check a recorded trace against the graph it was run on.
    Verify {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        graph: String,
        /// Run only these checkers (repeatable). Defaults to all.
        #[arg(long = "checker")]
        checkers: Vec<Checker>,
    },
    /// Mean rounds on a graph family for growing k.
    Bench {
        #[arg(long, value_enum)]
        family: Family,
        #[arg(long, value_delimiter = ',', required = true)]
        k_list: Vec<usize>,
        #[arg(long, default_value_t = 10)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a generated graph in the text format.
    Gen {
        #[arg(long)]
        spec: GraphSpec,
        /// Output file; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Family {
    Worstcase,
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl ToString) -> Failure {
    Failure { code: EXIT_USAGE, message: message.to_string() }
}

fn load_graph(arg: &str) -> Result<PortLabeledGraph, Failure> {
    if arg.starts_with("gen:") {
        let spec: GraphSpec = arg.parse().map_err(usage)?;
        return spec.generate().map_err(usage);
    }
    let text = fs::read_to_string(arg).map_err(|e| usage(format!("{arg}: {e}")))?;
    parse_graph(&text).map_err(|e| usage(format!("{arg}: {e}")))
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    let line = serde_json::to_string(value).map_err(usage)?;
    println!("{line}");
    Ok(())
}

fn cmd_run(
    graph: &str,
    k: usize,
    root: usize,
    seed: u64,
    trace: Option<PathBuf>,
    max_rounds: Option<u64>,
) -> Result<u8, Failure> {
    let g = load_graph(graph)?;
    let level = if trace.is_some() { TraceLevel::Full } else { TraceLevel::None };
    let mut config = SimulationConfig::new(k).root(NodeId(root)).seed(seed).trace_level(level);
    config.max_rounds = max_rounds;
    let result = run(&g, &config).map_err(usage)?;
    if let Some(path) = trace {
        let file = File::create(&path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        write_trace(BufWriter::new(file), &result).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    print_json(&result.summary)?;
    Ok(match result.summary.outcome {
        Outcome::DispersedAllTerminated => EXIT_OK,
        Outcome::MaxRoundsExceeded | Outcome::Fault => EXIT_FAULT,
    })
}

fn cmd_verify(trace: PathBuf, graph: &str, checkers: Vec<Checker>) -> Result<u8, Failure> {
    let g = load_graph(graph)?;
    let file = File::open(&trace).map_err(|e| usage(format!("{}: {e}", trace.display())))?;
    let result = read_trace(BufReader::new(file)).map_err(|e| usage(format!("{}: {e}", trace.display())))?;
    let s = &result.summary;
    if s.k > g.node_count() || s.v_r.0 >= g.node_count() || s.max_degree != g.max_degree() {
        return Err(usage("trace was not recorded on this graph"));
    }
    let selected = if checkers.is_empty() { Checker::ALL.to_vec() } else { checkers };
    let verdicts: Vec<_> = selected.iter().map(|c| c.verdict(&result, &g)).collect();
    let pass = verdicts.iter().all(|v| v.pass);
    print_json(&json!({ "pass": pass, "verdicts": verdicts }))?;
    Ok(if pass { EXIT_OK } else { EXIT_CHECK_FAILED })
}

#[derive(Serialize)]
struct BenchRow {
    k: usize,
    trials: u64,
    rounds: Vec<u64>,
    mean_rounds: f64,
    /// Mean rounds relative to the previous row.
    ratio: Option<f64>,
    /// `log(ratio) / log(k / previous k)`; 2 for quadratic growth.
    exponent: Option<f64>,
}

fn cmd_bench(family: Family, k_list: Vec<usize>, trials: u64, seed: u64) -> Result<u8, Failure> {
    let Family::Worstcase = family;
    if trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let graphs =
        k_list.iter().map(|&k| gen_worstcase(k).map(|g| (k, g))).collect::<Result<Vec<_>, _>>().map_err(usage)?;
    let jobs: Vec<(usize, u64)> = (0..graphs.len()).flat_map(|i| (0..trials).map(move |t| (i, t))).collect();
    let outcomes: Vec<_> = jobs
        .par_iter()
        .map(|&(i, t)| {
            let (k, g) = &graphs[i];
            let config = SimulationConfig::new(*k).seed(seed.wrapping_add(t)).trace_level(TraceLevel::None);
            run(g, &config).map(|r| r.summary)
        })
        .collect();

    let mut rows: Vec<BenchRow> = Vec::new();
    for (i, chunk) in outcomes.chunks(trials as usize).enumerate() {
        let k = graphs[i].0;
        let mut rounds = Vec::new();
        for (t, summary) in chunk.iter().enumerate() {
            let summary = summary.as_ref().map_err(usage)?;
            if summary.outcome != Outcome::DispersedAllTerminated {
                eprintln!("k={k} trial {t}: {:?} {}", summary.outcome, summary.fault.clone().unwrap_or_default());
                return Ok(EXIT_FAULT);
            }
            rounds.push(summary.rounds);
        }
        let mean_rounds = rounds.iter().sum::<u64>() as f64 / trials as f64;
        let prev = rows.last();
        let ratio = prev.map(|p| mean_rounds / p.mean_rounds);
        let exponent = prev.zip(ratio).map(|(p, r)| r.ln() / (k as f64 / p.k as f64).ln());
        rows.push(BenchRow { k, trials, rounds, mean_rounds, ratio, exponent });
    }
    print_json(&json!({ "family": "worstcase", "seed": seed, "rows": rows }))?;
    Ok(EXIT_OK)
}

fn cmd_gen(spec: GraphSpec, out: Option<PathBuf>) -> Result<u8, Failure> {
    let g = spec.generate().map_err(usage)?;
    let text = write_graph(&g);
    match out {
        Some(path) => fs::write(&path, text).map_err(|e| usage(format!("{}: {e}", path.display())))?,
        None => io::stdout().write_all(text.as_bytes()).map_err(usage)?,
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match cli.command {
        Command::Run { graph, k, root, seed, trace, max_rounds } => cmd_run(&graph, k, root, seed, trace, max_rounds),
        Command::Verify { trace, graph, checkers } => cmd_verify(trace, &graph, checkers),
        Command::Bench { family, k_list, trials, seed } => cmd_bench(family, k_list, trials, seed),
        Command::Gen { spec, out } => cmd_gen(spec, out),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
