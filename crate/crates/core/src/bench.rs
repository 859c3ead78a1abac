//! Benchmark driver: load a graph, sample or replay a batch, run the
//! maintenance across worker counts, verify, and emit CSV rows.
//!
//! Repetitions are isolated by cloning the loaded graph and rebuilding the
//! maintenance state, never by replaying inverse operations, so removal /
//! insertion non-commutativity cannot contaminate timings. The sampled batch
//! is a function of the seed alone: identical config and seed give identical
//! batch content and verdicts.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;
use std::time::Instant;

use thiserror::Error;

use crate::graph::{
    load_edge_list, sample_batch, BatchKind, EdgeBatch, EdgeListFormat, LoadedGraph, SampleMode,
};
use crate::par::{parallel_insert_batch, parallel_remove_batch};
use crate::state::init_state;
use crate::verify::verify;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("graph load failed: {0}")]
    Load(#[from] crate::graph::LoadError),
    #[error("sampling failed: {0}")]
    Sample(#[from] crate::graph::SampleError),
    #[error("batch rejected: {0}")]
    Batch(#[from] crate::par::BatchError),
    #[error("invalid config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMode {
    Insert,
    Remove,
    /// Remove the sampled batch, then insert it back (both phases timed).
    Both,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub graph: PathBuf,
    pub format: EdgeListFormat,
    pub batch: usize,
    pub mode: BenchMode,
    pub workers: Vec<usize>,
    pub seed: u64,
    pub repeat: usize,
    pub verify: bool,
    pub hist: bool,
    pub out: Option<PathBuf>,
    pub idmap: Option<PathBuf>,
}

/// One timed phase.
#[derive(Debug, Clone)]
pub struct BenchRow {
    pub graph: String,
    pub mode: &'static str,
    pub workers: usize,
    pub rep: usize,
    pub edges: usize,
    pub millis: f64,
    pub speedup: Option<f64>,
    pub verified: Option<bool>,
    pub vplus_le10_frac: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct BenchSummary {
    pub mode: &'static str,
    pub workers: usize,
    pub mean_ms: f64,
    /// Half-width of the 95% confidence interval (Student-t); present for
    /// two or more repetitions.
    pub ci95_ms: Option<f64>,
}

/// Aggregated searched-set histogram for one (phase, worker-count) cell.
#[derive(Debug, Clone)]
pub struct HistCell {
    pub mode: &'static str,
    pub workers: usize,
    pub hist: crate::Histogram,
}

#[derive(Debug)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub summaries: Vec<BenchSummary>,
    pub histograms: Vec<HistCell>,
    pub all_verified: bool,
}

pub const CSV_HEADER: &str = "graph,mode,workers,rep,edges,millis,speedup,verified,vplus_le10_frac";
pub const HIST_CSV_HEADER: &str = "mode,workers,bucket,count,frac_le10";

impl BenchReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{},{},{:.3},{},{},{}",
                r.graph,
                r.mode,
                r.workers,
                r.rep,
                r.edges,
                r.millis,
                r.speedup.map(|s| format!("{s:.3}")).unwrap_or_default(),
                r.verified.map(|v| v.to_string()).unwrap_or_default(),
                r.vplus_le10_frac
                    .map(|f| format!("{f:.4}"))
                    .unwrap_or_default(),
            )?;
        }
        Ok(())
    }

    /// Bucket counts of the per-edge searched-set sizes (insertion) and
    /// changed-set sizes (removal): buckets 0..=10 plus an overflow row.
    pub fn write_hist_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{HIST_CSV_HEADER}")?;
        for cell in &self.histograms {
            let frac = cell.hist.frac_le10();
            for b in 0..12 {
                let label = if b <= 10 {
                    b.to_string()
                } else {
                    ">10".to_string()
                };
                writeln!(
                    w,
                    "{},{},{label},{},{frac:.4}",
                    cell.mode,
                    cell.workers,
                    cell.hist.bucket(b),
                )?;
            }
        }
        Ok(())
    }
}

/// Two-sided 97.5% Student-t quantile for small degree-of-freedom counts.
fn t_975(df: usize) -> f64 {
    const TABLE: [f64; 30] = [
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228, 2.201, 2.179,
        2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086, 2.080, 2.074, 2.069, 2.064,
        2.060, 2.056, 2.052, 2.048, 2.045, 2.042,
    ];
    if df == 0 {
        f64::NAN
    } else if df <= 30 {
        TABLE[df - 1]
    } else {
        1.96
    }
}

fn mean_ci(samples: &[f64]) -> (f64, Option<f64>) {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, None);
    }
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let half = t_975(n - 1) * (var / n as f64).sqrt();
    (mean, Some(half))
}

pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport, BenchError> {
    if cfg.workers.is_empty() || cfg.workers.iter().any(|&w| w == 0) {
        return Err(BenchError::Config("workers must be >= 1".into()));
    }
    if cfg.repeat == 0 {
        return Err(BenchError::Config("repeat must be >= 1".into()));
    }
    let file = File::open(&cfg.graph)?;
    let loaded = load_edge_list(BufReader::new(file), cfg.format)?;
    if let Some(path) = &cfg.idmap {
        loaded.write_id_map(File::create(path)?)?;
    }
    run_bench_loaded(cfg, &loaded)
}

/// Same as [`run_bench`] with the graph already in memory (tests,
/// generators).
pub fn run_bench_loaded(cfg: &BenchConfig, loaded: &LoadedGraph) -> Result<BenchReport, BenchError> {
    let mode = if cfg.format == EdgeListFormat::Temporal {
        SampleMode::TemporalSuffix
    } else {
        SampleMode::Uniform
    };
    let batch = sample_batch(loaded, cfg.batch, mode, cfg.seed)?;
    let graph_name = cfg
        .graph
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "graph".into());

    let mut rows: Vec<BenchRow> = Vec::new();
    let mut hist_cells: Vec<HistCell> = Vec::new();
    let mut all_verified = true;
    for &w in &cfg.workers {
        for rep in 0..cfg.repeat {
            let st = init_state(loaded.graph.clone_graph());
            let initial_cores = st.cores();

            let hist_cells = &mut hist_cells;
            let mut phase = |kind: BatchKind, timed: bool| -> Result<(), BenchError> {
                let b: EdgeBatch = batch.with_kind(kind);
                let start = Instant::now();
                let stats = match kind {
                    BatchKind::Remove => parallel_remove_batch(&st, &b, w)?,
                    BatchKind::Insert => parallel_insert_batch(&st, &b, w)?,
                };
                let millis = start.elapsed().as_secs_f64() * 1e3;
                if !timed {
                    return Ok(());
                }
                let verified = cfg.verify.then(|| {
                    let v = verify(&st);
                    if !v.all_ok() {
                        eprintln!("verification failed: {:?}", v.failures);
                    }
                    v.all_ok()
                });
                if verified == Some(false) {
                    all_verified = false;
                }
                let mode_name = match kind {
                    BatchKind::Insert => "insert",
                    BatchKind::Remove => "remove",
                };
                let frac = cfg.hist.then(|| {
                    let h = match kind {
                        BatchKind::Insert => &stats.hist_vplus,
                        BatchKind::Remove => &stats.hist_vstar,
                    };
                    match hist_cells
                        .iter_mut()
                        .find(|c| c.mode == mode_name && c.workers == w)
                    {
                        Some(cell) => cell.hist.merge(h),
                        None => hist_cells.push(HistCell {
                            mode: mode_name,
                            workers: w,
                            hist: h.clone(),
                        }),
                    }
                    h.frac_le10()
                });
                rows.push(BenchRow {
                    graph: graph_name.clone(),
                    mode: mode_name,
                    workers: w,
                    rep,
                    edges: b.len(),
                    millis,
                    speedup: None,
                    verified,
                    vplus_le10_frac: frac,
                });
                Ok(())
            };

            match cfg.mode {
                BenchMode::Insert => {
                    // make the sampled edges insertable first (untimed)
                    phase(BatchKind::Remove, false)?;
                    phase(BatchKind::Insert, true)?;
                }
                BenchMode::Remove => {
                    phase(BatchKind::Remove, true)?;
                }
                BenchMode::Both => {
                    phase(BatchKind::Remove, true)?;
                    phase(BatchKind::Insert, true)?;
                }
            }

            if cfg.mode == BenchMode::Both && cfg.verify && st.cores() != initial_cores {
                all_verified = false;
                eprintln!("round-trip did not restore the initial core numbers");
            }
        }
    }

    // speedups relative to the single-worker mean of the same phase
    let mut summaries = Vec::new();
    for mode in ["remove", "insert"] {
        let base: Vec<f64> = rows
            .iter()
            .filter(|r| r.mode == mode && r.workers == 1)
            .map(|r| r.millis)
            .collect();
        let base_mean = (!base.is_empty()).then(|| base.iter().sum::<f64>() / base.len() as f64);
        for &w in &cfg.workers {
            let samples: Vec<f64> = rows
                .iter()
                .filter(|r| r.mode == mode && r.workers == w)
                .map(|r| r.millis)
                .collect();
            if samples.is_empty() {
                continue;
            }
            let (mean, ci) = mean_ci(&samples);
            summaries.push(BenchSummary {
                mode: if mode == "insert" { "insert" } else { "remove" },
                workers: w,
                mean_ms: mean,
                ci95_ms: ci,
            });
        }
        if let Some(b) = base_mean {
            for r in rows.iter_mut().filter(|r| r.mode == mode) {
                r.speedup = Some(b / r.millis);
            }
        }
    }

    let report = BenchReport {
        rows,
        summaries,
        histograms: hist_cells,
        all_verified,
    };
    if let Some(path) = &cfg.out {
        report.write_csv(File::create(path)?)?;
        if cfg.hist {
            let mut hist_path = path.clone();
            hist_path.set_extension("hist.csv");
            report.write_hist_csv(File::create(hist_path)?)?;
        }
    }
    Ok(report)
}
