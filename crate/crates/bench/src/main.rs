//! Benchmark/verification driver for the k-core maintenance engine.
//!
//! Loads an edge list, samples a batch of edges (uniform for static graphs,
//! latest-timestamp suffix for temporal ones), applies it with the requested
//! worker counts, and reports timings, verification verdicts, and the
//! searched-set histogram as CSV.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, ValueEnum};

use kcore::bench::{run_bench, BenchConfig, BenchMode};
use kcore::EdgeListFormat;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    /// `u v` per line
    Edges,
    /// `u v timestamp` per line
    Temporal,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    /// time insertion of the sampled batch (removed untimed first)
    Insert,
    /// time removal of the sampled batch
    Remove,
    /// time removal, then re-insertion, of the same batch
    Both,
}

#[derive(Parser, Debug)]
#[command(name = "kcore-bench", version, about)]
struct Args {
    /// Edge-list file ('#'/'%' comment lines are ignored)
    #[arg(long)]
    graph: PathBuf,

    #[arg(long, value_enum, default_value_t = FormatArg::Edges)]
    format: FormatArg,

    /// Number of edges to sample for the batch
    #[arg(long, default_value_t = 10_000)]
    batch: usize,

    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    mode: ModeArg,

    /// Comma-separated worker counts, e.g. 1,2,4,8
    #[arg(long, value_delimiter = ',', default_value = "1")]
    workers: Vec<usize>,

    #[arg(long, default_value_t = 1)]
    seed: u64,

    /// Repetitions per worker count (state is rebuilt each time)
    #[arg(long, default_value_t = 1)]
    repeat: usize,

    /// Check cores against a fresh decomposition plus the full invariant
    /// suite after every timed batch
    #[arg(long)]
    verify: bool,

    /// Collect the per-edge searched-set histogram
    #[arg(long)]
    hist: bool,

    /// CSV output path (summary always goes to stdout)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Write the external->internal id map as CSV
    #[arg(long)]
    idmap: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let cfg = BenchConfig {
        graph: args.graph,
        format: match args.format {
            FormatArg::Edges => EdgeListFormat::Static,
            FormatArg::Temporal => EdgeListFormat::Temporal,
        },
        batch: args.batch,
        mode: match args.mode {
            ModeArg::Insert => BenchMode::Insert,
            ModeArg::Remove => BenchMode::Remove,
            ModeArg::Both => BenchMode::Both,
        },
        workers: args.workers,
        seed: args.seed,
        repeat: args.repeat,
        verify: args.verify,
        hist: args.hist,
        out: args.out,
        idmap: args.idmap,
    };

    match run(&cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cfg: &BenchConfig) -> anyhow::Result<bool> {
    let report = run_bench(cfg).context("benchmark run failed")?;
    for s in &report.summaries {
        match s.ci95_ms {
            Some(ci) => println!(
                "{:>6}  workers={:<2}  mean {:>10.3} ms  ±{:.3} ms (95% CI)",
                s.mode, s.workers, s.mean_ms, ci
            ),
            None => println!(
                "{:>6}  workers={:<2}  mean {:>10.3} ms",
                s.mode, s.workers, s.mean_ms
            ),
        }
    }
    if cfg.out.is_none() {
        let mut buf = Vec::new();
        report.write_csv(&mut buf)?;
        if cfg.hist {
            report.write_hist_csv(&mut buf)?;
        }
        print!("{}", String::from_utf8_lossy(&buf));
    }
    Ok(report.all_verified)
}
