//! Acceptance suite: every shipping criterion, run in order, one pass/fail
//! line each (`cargo test --test acceptance -- --nocapture` to see them).
//!
//! 1. sequential oracle equivalence on random op sequences
//! 2. parallel remove/insert round trips match the decomposition oracle
//! 3. final cores independent of the worker count
//! 4. per-operation core deltas bounded by one, confined to level K
//! 5. full invariant suite green after every batch of (2) and (3)
//! 6. searched-set histogram: almost all edges touch at most 10 vertices
//! 7. speedup sanity on multi-core hosts (soft: reported, not gating)
//! 8. order-maintenance stress: adversarial inserts, order agreement, audit
//! 9. deadlock freedom under hub-adversarial batches with a watchdog
//!
//! The whole suite is a single test so timing bounds are not skewed by
//! sibling tests sharing the two cores.

use std::collections::HashSet;
use std::sync::mpsc;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kcore::bz::bz_decompose;
use kcore::gen::{barabasi_albert, erdos_renyi};
use kcore::graph::{sample_batch, BatchKind, EdgeBatch, Graph, LoadedGraph, SampleMode};
use kcore::om::{EntryPool, OrderList};
use kcore::par::{parallel_insert_batch, parallel_remove_batch};
use kcore::seq::{insert_edge_seq, remove_edge_seq};
use kcore::state::{init_state, MaintState};
use kcore::verify::verify;
use kcore::WorkerContext;

struct Outcome {
    name: &'static str,
    pass: bool,
    gating: bool,
    detail: String,
    secs: f64,
}

fn timed<F: FnOnce() -> (bool, bool, String)>(name: &'static str, f: F) -> Outcome {
    let start = Instant::now();
    let (pass, gating, detail) = f();
    Outcome {
        name,
        pass,
        gating,
        detail,
        secs: start.elapsed().as_secs_f64(),
    }
}

/// Tracks criterion-5 results: one verification sweep after every batch run
/// by criteria 2 and 3.
#[derive(Default)]
struct InvariantLog {
    checks: usize,
    failures: Vec<String>,
}

impl InvariantLog {
    fn check(&mut self, st: &MaintState, what: &str) {
        self.checks += 1;
        let v = verify(st);
        if !v.all_ok() {
            self.failures
                .push(format!("{what}: {:?}", v.failures.first()));
        }
    }
}

fn random_absent_pairs(g: &Graph, count: usize, rng: &mut ChaCha8Rng) -> Vec<(u32, u32)> {
    let n = g.n() as u32;
    let mut used = HashSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v && !g.has_edge(u, v) && used.insert((u.min(v), u.max(v))) {
            out.push((u, v));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// criterion 1: sequential oracle equivalence
// ---------------------------------------------------------------------------

fn criterion_1() -> (bool, bool, String) {
    let start = Instant::now();
    let mut ops = 0usize;
    for seed in 0..50u64 {
        let g = erdos_renyi(200, 800, seed);
        let st = init_state(g);
        let mut ctx = WorkerContext::new(200);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(997));
        for _ in 0..400 {
            let u = rng.gen_range(0..200u32);
            let v = rng.gen_range(0..200u32);
            if u == v {
                continue;
            }
            if st.graph().has_edge(u, v) {
                remove_edge_seq(&st, &mut ctx, u, v).unwrap();
            } else {
                insert_edge_seq(&st, &mut ctx, u, v).unwrap();
            }
            ops += 1;
            let expect = bz_decompose(st.graph()).core;
            if st.cores() != expect {
                return (false, true, format!("seed {seed}: cores diverged"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (
        secs < 30.0,
        true,
        format!("{ops} ops, every one matched the oracle, {secs:.1} s (< 30 s)"),
    )
}

// ---------------------------------------------------------------------------
// criteria 2 + 3 (+5 logging)
// ---------------------------------------------------------------------------

fn criterion_2(log: &mut InvariantLog) -> (bool, bool, String) {
    let start = Instant::now();
    for seed in 0..50u64 {
        let loaded = LoadedGraph::from_graph(erdos_renyi(2_000, 8_000, 5_000 + seed));
        let batch = sample_batch(&loaded, 1_000, SampleMode::Uniform, seed).unwrap();
        for p in [1usize, 2, 4, 8] {
            let st = init_state(loaded.graph.clone_graph());
            let initial = st.cores();
            parallel_remove_batch(&st, &batch, p).unwrap();
            log.check(&st, "c2 remove");
            if st.cores() != bz_decompose(st.graph()).core {
                return (false, true, format!("seed {seed} p={p}: remove diverged"));
            }
            parallel_insert_batch(&st, &batch.with_kind(BatchKind::Insert), p).unwrap();
            log.check(&st, "c2 insert");
            let back = st.cores();
            if back != bz_decompose(st.graph()).core || back != initial {
                return (
                    false,
                    true,
                    format!("seed {seed} p={p}: round trip did not restore cores"),
                );
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    (
        secs < 120.0,
        true,
        format!("50 seeds x P in {{1,2,4,8}} round trips, {secs:.1} s (< 120 s)"),
    )
}

fn criterion_3(log: &mut InvariantLog) -> (bool, bool, String) {
    for seed in 0..20u64 {
        let g = erdos_renyi(2_000, 8_000, 9_000 + seed);
        let loaded = LoadedGraph::from_graph(g);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ins = EdgeBatch::new(
            random_absent_pairs(&loaded.graph, 500, &mut rng),
            BatchKind::Insert,
        );
        let rm = sample_batch(&loaded, 500, SampleMode::Uniform, seed).unwrap();

        let mut insert_cores: Vec<Vec<u32>> = Vec::new();
        let mut remove_cores: Vec<Vec<u32>> = Vec::new();
        for p in [1usize, 2, 4, 8] {
            let st = init_state(loaded.graph.clone_graph());
            parallel_insert_batch(&st, &ins, p).unwrap();
            log.check(&st, "c3 insert");
            insert_cores.push(st.cores());

            let st = init_state(loaded.graph.clone_graph());
            parallel_remove_batch(&st, &rm, p).unwrap();
            log.check(&st, "c3 remove");
            remove_cores.push(st.cores());
        }
        for (i, p) in [2usize, 4, 8].iter().enumerate() {
            if insert_cores[i + 1] != insert_cores[0] {
                return (false, true, format!("seed {seed}: insert P={p} != P=1"));
            }
            if remove_cores[i + 1] != remove_cores[0] {
                return (false, true, format!("seed {seed}: remove P={p} != P=1"));
            }
        }
    }
    (
        true,
        true,
        "20 seeds, insert and remove cores bit-identical for P=2,4,8 vs P=1".into(),
    )
}

fn criterion_5(log: InvariantLog) -> (bool, bool, String) {
    if log.failures.is_empty() {
        (
            true,
            true,
            format!("invariant suite green after all {} batches", log.checks),
        )
    } else {
        (
            false,
            true,
            format!(
                "{} of {} checks failed; first: {}",
                log.failures.len(),
                log.checks,
                log.failures[0]
            ),
        )
    }
}

// ---------------------------------------------------------------------------
// criterion 4: per-op delta bound
// ---------------------------------------------------------------------------

fn criterion_4() -> (bool, bool, String) {
    let mut ops = 0usize;
    let mut seed = 0u64;
    while ops < 10_000 {
        let g = erdos_renyi(500, 2_000, 77_000 + seed);
        let st = init_state(g);
        let mut ctx = WorkerContext::new(500);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..1_000 {
            let u = rng.gen_range(0..500u32);
            let v = rng.gen_range(0..500u32);
            if u == v {
                continue;
            }
            let before = st.cores();
            let k = before[u as usize].min(before[v as usize]);
            let removing = st.graph().has_edge(u, v);
            if removing {
                remove_edge_seq(&st, &mut ctx, u, v).unwrap();
            } else {
                insert_edge_seq(&st, &mut ctx, u, v).unwrap();
            }
            ops += 1;
            let after = st.cores();
            for x in 0..500usize {
                let (b, a) = (before[x], after[x]);
                if b == a {
                    continue;
                }
                let delta_ok = if removing { b == a + 1 } else { a == b + 1 };
                if !delta_ok || b != k {
                    return (
                        false,
                        true,
                        format!("op {ops}: vertex {x} went {b} -> {a} with K={k}"),
                    );
                }
            }
        }
        seed += 1;
    }
    (
        true,
        true,
        format!("{ops} single ops, deltas within 1 and confined to level K"),
    )
}

// ---------------------------------------------------------------------------
// criterion 6: searched-set histogram at desk scale
// ---------------------------------------------------------------------------

fn criterion_6() -> (bool, bool, String) {
    let start = Instant::now();
    let mut details = Vec::new();
    let mut ok = true;
    for (name, graph) in [
        ("ER", erdos_renyi(100_000, 800_000, 42)),
        ("BA", barabasi_albert(100_000, 8, 42)),
    ] {
        let loaded = LoadedGraph::from_graph(graph);
        let st = init_state(loaded.graph.clone_graph());
        let batch = sample_batch(&loaded, 100_000, SampleMode::Uniform, 7).unwrap();
        let rm = parallel_remove_batch(&st, &batch, 4).unwrap();
        let ins =
            parallel_insert_batch(&st, &batch.with_kind(BatchKind::Insert), 4).unwrap();
        let fr = rm.hist_vstar.frac_le10();
        let fi = ins.hist_vplus.frac_le10();
        ok &= fr >= 0.90 && fi >= 0.90;
        details.push(format!("{name}: remove {fr:.4}, insert {fi:.4}"));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 300.0;
    (
        ok,
        true,
        format!("{} ; {secs:.1} s (< 300 s)", details.join(" ; ")),
    )
}

// ---------------------------------------------------------------------------
// criterion 7: speedup sanity (soft)
// ---------------------------------------------------------------------------

fn criterion_7() -> (bool, bool, String) {
    let cores = std::thread::available_parallelism()
        .map(|c| c.get())
        .unwrap_or(1);
    let loaded = LoadedGraph::from_graph(barabasi_albert(100_000, 8, 43));
    let batch = sample_batch(&loaded, 100_000, SampleMode::Uniform, 11).unwrap();
    let time_insert = |p: usize| {
        let st = init_state(loaded.graph.clone_graph());
        parallel_remove_batch(&st, &batch, p).unwrap();
        let ins = batch.with_kind(BatchKind::Insert);
        let t = Instant::now();
        parallel_insert_batch(&st, &ins, p).unwrap();
        t.elapsed().as_secs_f64()
    };
    let t1 = time_insert(1);
    let t8 = time_insert(8);
    let ratio = t1 / t8;
    let detail = format!("P=1 {:.2} s, P=8 {:.2} s, ratio {ratio:.2} ({cores} cores)", t1, t8);
    if cores < 4 {
        // the criterion is conditioned on >= 4 physical cores
        return (
            true,
            true,
            format!("skipped: host has {cores} cores (< 4); measured anyway: {detail}"),
        );
    }
    if ratio >= 1.3 {
        (true, true, detail)
    } else {
        // soft criterion per the shipping gate: report, do not reject
        (false, false, format!("needs profiling: {detail}"))
    }
}

// ---------------------------------------------------------------------------
// criterion 8: order-maintenance micro-properties
// ---------------------------------------------------------------------------

fn criterion_8() -> (bool, bool, String) {
    const N: usize = 1_000_000;
    let pool = EntryPool::new(N);
    let list = OrderList::new(0);
    let t = Instant::now();
    list.insert_head(&pool, 0);
    for v in 1..N as u32 {
        list.insert_after(&pool, 0, v);
    }
    let insert_secs = t.elapsed().as_secs_f64();
    if insert_secs >= 10.0 {
        return (
            false,
            true,
            format!("{N} adversarial inserts took {insert_secs:.1} s (>= 10 s)"),
        );
    }
    // amortized-cost proxy: entries moved by relabels stay linear in the
    // insertion count; measured 18.6 per insert at this scale, frozen at 32
    let moved = list.moved_entries();
    if moved > 32 * N as u64 {
        return (
            false,
            true,
            format!("relabels moved {moved} entries for {N} inserts"),
        );
    }
    if let Err(e) = list.audit(&pool) {
        return (false, true, format!("audit: {e}"));
    }
    let order = list.collect(&pool);
    let mut pos = vec![0u32; N];
    for (i, &v) in order.iter().enumerate() {
        pos[v as usize] = i as u32;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10_000 {
        let a = rng.gen_range(0..N as u32);
        let b = rng.gen_range(0..N as u32);
        if list.order(&pool, a, b) != (pos[a as usize] < pos[b as usize]) {
            return (false, true, format!("order({a},{b}) disagrees with traversal"));
        }
    }
    (
        true,
        true,
        format!(
            "{N} inserts in {insert_secs:.1} s, {moved} entries moved, 10^4 pair checks, audit clean"
        ),
    )
}

// ---------------------------------------------------------------------------
// criterion 9: deadlock freedom under hub-adversarial batches
// ---------------------------------------------------------------------------

fn with_watchdog<F>(secs: u64, what: &str, f: F)
where
    F: FnOnce() + Send + 'static,
{
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        f();
        let _ = tx.send(());
    });
    rx.recv_timeout(Duration::from_secs(secs))
        .unwrap_or_else(|_| panic!("watchdog: {what} did not finish within {secs} s"));
}

fn criterion_9() -> (bool, bool, String) {
    const N: usize = 4_000;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(31_000 + seed);
        let g = Graph::new(N);
        // background edges among non-hub vertices
        while g.m() < 8_000 {
            let u = rng.gen_range(3..N as u32);
            let v = rng.gen_range(3..N as u32);
            if u != v {
                let _ = g.add_edge(u, v);
            }
        }
        // the adversarial batch: every edge touches one of three hubs
        let mut edges = Vec::new();
        let mut used = HashSet::new();
        while edges.len() < 10_000 {
            let hub = rng.gen_range(0..3u32);
            let other = rng.gen_range(3..N as u32);
            if used.insert((hub, other)) {
                edges.push((hub, other));
            }
        }
        let base_cores = bz_decompose(&g).core;
        let st = Arc::new(init_state(g));
        let ins = EdgeBatch::new(edges.clone(), BatchKind::Insert);
        let rm = EdgeBatch::new(edges, BatchKind::Remove);

        let st2 = Arc::clone(&st);
        with_watchdog(60, "hub insert batch", move || {
            parallel_insert_batch(&st2, &ins, 8).unwrap();
        });
        if st.cores() != bz_decompose(st.graph()).core {
            return (false, true, format!("seed {seed}: insert diverged"));
        }
        let st2 = Arc::clone(&st);
        with_watchdog(60, "hub remove batch", move || {
            parallel_remove_batch(&st2, &rm, 8).unwrap();
        });
        if st.cores() != bz_decompose(st.graph()).core || st.cores() != base_cores {
            return (false, true, format!("seed {seed}: remove diverged"));
        }
        let v = verify(&st);
        if !v.all_ok() {
            return (false, true, format!("seed {seed}: {:?}", v.failures.first()));
        }
    }
    (
        true,
        true,
        "20 seeds, hub-saturated insert+remove at P=8 inside the watchdog, oracle match".into(),
    )
}

// ---------------------------------------------------------------------------

#[test]
fn acceptance_criteria() {
    let mut outcomes = Vec::new();
    outcomes.push(timed("1 oracle equivalence, sequential", criterion_1));
    let mut log = InvariantLog::default();
    outcomes.push(timed("2 oracle equivalence, parallel", || criterion_2(&mut log)));
    outcomes.push(timed("3 P-independence", || criterion_3(&mut log)));
    outcomes.push(timed("4 delta bound", criterion_4));
    outcomes.push(timed("5 invariant suite", move || criterion_5(log)));
    outcomes.push(timed("6 locked-set histogram", criterion_6));
    outcomes.push(timed("7 speedup sanity (soft)", criterion_7));
    outcomes.push(timed("8 OM micro-property", criterion_8));
    outcomes.push(timed("9 deadlock freedom", criterion_9));

    let mut failed = Vec::new();
    for o in &outcomes {
        let flag = if o.pass {
            "PASS"
        } else if o.gating {
            "FAIL"
        } else {
            "SOFT-FAIL"
        };
        println!(
            "criterion {:<38} {:<9} [{:>6.1} s] {}",
            o.name, flag, o.secs, o.detail
        );
        if !o.pass && o.gating {
            failed.push(o.name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
