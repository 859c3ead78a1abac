//! Batch-parallel edge insertion and removal.
//!
//! Workers each take a static chunk of the batch and process edges one at a
//! time, synchronizing only through per-vertex locks, the status counters,
//! and the versioned priority queue. Insertion locks the traversed vertices
//! in k-order (the queue hands them out locked); removal condition-locks
//! same-core neighbors so a vertex concurrently demoted is skipped rather
//! than waited on, with the `t` state machine forcing a redo pass when a
//! neighbor's max-core degree was counted optimistically. Insertion batches
//! and removal batches never overlap; that barrier is the callers' contract
//! and what lets removals defer out-degree repair to the end of the batch.

use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};

use thiserror::Error;

use crate::ctx::{Histogram, WorkerContext};
use crate::graph::{BatchKind, EdgeBatch};
use crate::lock::{backoff, cond_lock, lock_pair};
use crate::pq::OrderedQueue;
use crate::state::MaintState;

#[derive(Debug, Error)]
pub enum BatchError {
    #[error("batch kind does not match the operation")]
    KindMismatch,
    #[error("edge ({0},{1}): endpoint out of range")]
    OutOfRange(u32, u32),
    #[error("self-loop ({0},{0}) in batch")]
    SelfLoop(u32),
    #[error("duplicate edge ({0},{1}) in batch")]
    Duplicate(u32, u32),
    #[error("edge ({0},{1}) scheduled for removal is not in the graph")]
    Missing(u32, u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeOutcome {
    /// Applied; `affected` is the number of vertices whose core changed.
    Applied { affected: usize },
    /// Insert of an edge already present (counted, not an error).
    SkippedExisting,
    /// Removal of an edge already gone.
    SkippedMissing,
}

#[derive(Debug, Default, Clone)]
pub struct BatchStats {
    pub applied: usize,
    pub skipped: usize,
    pub hist_vplus: Histogram,
    pub hist_vstar: Histogram,
}

/// Decides `u ⪯ v` at a quiescent point: status counters of both vertices
/// are re-read until even, the comparison (core first, then labels) is
/// retried until the counters are unchanged across it.
pub fn parallel_order(st: &MaintState, u: u32, v: u32) -> bool {
    if u == v {
        return false;
    }
    let mut spins = 0u32;
    loop {
        let (s1, s2) = loop {
            let a = st.s(u);
            let b = st.s(v);
            if a & 1 == 0 && b & 1 == 0 {
                break (a, b);
            }
            backoff(&mut spins);
        };
        let r = st.precedes_now(u, v);
        if st.s(u) == s1 && st.s(v) == s2 {
            return r;
        }
        backoff(&mut spins);
    }
}

/// Ending phase of an insertion: flips the survivors' cores and migrates
/// them to the head of the next order list, all inside one critical section
/// on the destination list so concurrent endings interleave whole-operation
/// rather than per-vertex. Each repositioning is bracketed by status bumps.
pub(crate) fn ending_promote(st: &MaintState, survivors: &[u32], k: u32) {
    if survivors.is_empty() {
        return;
    }
    let src = st.order_list(k);
    let dest = st.order_list(k + 1);
    let mut guard = dest.lock();
    let mut prev: Option<u32> = None;
    for &w in survivors {
        st.promote(w, k + 1);
        st.set_deg_in(w, 0);
        st.clear_mcd(w);
        st.s_inc(w);
        src.delete(st.pool(), w);
        match prev {
            None => guard.insert_head(st.pool(), w),
            Some(p) => guard.insert_after(st.pool(), p, w),
        }
        st.s_inc(w);
        prev = Some(w);
    }
}

/// A promotion from `k` to `k+1` invalidates the cached max-core degree of
/// neighbors already at `k+1` (they gained a qualifying neighbor). Plain
/// stores suffice: max-core degrees are only consumed by removal flows, and
/// those never run concurrently with insertions.
pub(crate) fn invalidate_promoted_neighbor_mcd(
    st: &MaintState,
    ctx: &mut WorkerContext,
    survivors: &[u32],
    k: u32,
) {
    let mut buf = std::mem::take(&mut ctx.scratch);
    for &w in survivors {
        st.graph().copy_neighbors(w, &mut buf);
        for &y in &buf {
            if st.core(y) == k + 1 {
                st.clear_mcd(y);
            }
        }
    }
    ctx.scratch = buf;
}

/// Recomputes a missing max-core degree without locking the neighbors:
/// neighbors with core at least `core(u)` count, and so do neighbors one
/// level below that are still propagating a demotion (`t > 0`) — those will
/// deliver their decrement to `u` later, forced by the 1→3 status
/// compare-and-exchange if their scan may already have passed `u`. A
/// neighbor observed finished (`t = 0`) is taken back out of the count.
pub(crate) fn check_mcd(st: &MaintState, u: u32, exclude: Option<u32>, buf: &mut Vec<u32>) {
    if st.mcd(u).is_some() {
        return;
    }
    let ku = st.core(u);
    st.graph().copy_neighbors(u, buf);
    let mut m: u32 = 0;
    for &y in buf.iter() {
        let (cy, ty) = st.core_and_t(y);
        if cy >= ku {
            m += 1;
        } else if ku > 0 && cy == ku - 1 && ty > 0 {
            m += 1;
            if Some(y) != exclude && ty == 1 {
                st.t_cas_1_to_3(y);
            }
            if st.t(y) == 0 {
                m -= 1;
            }
        }
    }
    st.set_mcd(u, m);
}

/// Max-core-degree decrement on a locked vertex; demotes it (atomically
/// publishing `core = k-1, t = 2`) and queues it for propagation when the
/// count falls below `k`. Returns whether the vertex was demoted; when it
/// was not and `locking` is set, the vertex is unlocked here.
///
/// The demoted vertex moves to the tail of the lower list immediately, with
/// the core flip inside the destination list's critical section: appends
/// therefore land in global demote order, which is what keeps every demoted
/// vertex's remaining out-degree below its new core (its demote-time
/// max-core count covers exactly the neighbors that end up after it).
pub(crate) fn do_mcd(
    st: &MaintState,
    ctx: &mut WorkerContext,
    u: u32,
    k: u32,
    locking: bool,
) -> bool {
    debug_assert!(st.mcd(u).is_some(), "do_mcd on unknown mcd");
    st.mcd_dec(u);
    if st.mcd(u).unwrap() < k {
        st.order_list(k).delete(st.pool(), u);
        {
            let dest = st.order_list(k - 1);
            let mut g = dest.lock();
            st.demote_mark(u, k - 1);
            g.insert_tail(st.pool(), u);
        }
        ctx.r.push_back(u);
        st.clear_mcd(u);
        ctx.add_vstar(u);
        true
    } else {
        if locking {
            st.unlock(u);
            ctx.unhold(u);
        }
        false
    }
}

/// One worker, one inserted edge.
pub fn insert_edge_p(st: &MaintState, ctx: &mut WorkerContext, u0: u32, v0: u32) -> EdgeOutcome {
    let (mut u, mut v) = (u0, v0);
    loop {
        lock_pair(st, u, v);
        if parallel_order(st, v, u) {
            // wrong orientation: redo the lock with the roles swapped
            st.unlock(u);
            st.unlock(v);
            std::mem::swap(&mut u, &mut v);
            continue;
        }
        break;
    }
    ctx.begin_op();
    ctx.hold(u);
    ctx.hold(v);
    if st.graph().has_edge(u, v) {
        st.unlock(v);
        ctx.unhold(v);
        st.unlock(u);
        ctx.unhold(u);
        return EdgeOutcome::SkippedExisting;
    }
    let k = st.core(u);
    let added = st.graph().add_edge(u, v).expect("batch validated ids");
    debug_assert!(added);
    st.deg_out_inc(u);
    if st.core(v) >= st.core(u) {
        st.mcd_inc_if_known(u);
    }
    if st.core(u) >= st.core(v) {
        st.mcd_inc_if_known(v);
    }
    st.unlock(v);
    ctx.unhold(v);
    if st.deg_out(u) <= k {
        st.unlock(u);
        ctx.unhold(u);
        ctx.hist_vplus.record(0);
        return EdgeOutcome::Applied { affected: 0 };
    }

    let list = st.order_list(k);
    let mut q = OrderedQueue::new(list);
    let mut w = u;
    loop {
        // candidate in-degree computed where it is used: predecessors of w
        // inside this worker's candidate set (all such vertices are locked)
        let mut buf = std::mem::take(&mut ctx.scratch);
        st.graph().copy_neighbors(w, &mut buf);
        let di = buf
            .iter()
            .filter(|&&y| ctx.in_vstar(y) && st.precedes_now(y, w))
            .count() as u32;
        ctx.scratch = buf;
        st.set_deg_in(w, di);
        if di + st.deg_out(w) > k {
            forward_p(st, ctx, &mut q, w, k);
        } else if di > 0 {
            backward_p(st, ctx, w, k);
        } else {
            st.unlock(w);
            ctx.unhold(w);
        }
        match q.dequeue_locked(st, list, k, |d| ctx.clear_in_q(d)) {
            Some(x) => {
                ctx.hold(x);
                ctx.clear_in_q(x);
                w = x;
            }
            None => break,
        }
    }

    let survivors = ctx.live_vstar();
    ending_promote(st, &survivors, k);
    while let Some(x) = ctx.locked.pop() {
        st.unlock(x);
    }
    invalidate_promoted_neighbor_mcd(st, ctx, &survivors, k);
    ctx.hist_vplus.record(ctx.vplus_count);
    EdgeOutcome::Applied {
        affected: survivors.len(),
    }
}

fn forward_p(st: &MaintState, ctx: &mut WorkerContext, q: &mut OrderedQueue, w: u32, k: u32) {
    ctx.touch_vplus(w);
    ctx.add_vstar(w);
    let list = st.order_list(k);
    let mut buf = std::mem::take(&mut ctx.scratch);
    st.graph().copy_neighbors(w, &mut buf);
    for &y in &buf {
        // successors are not locked here; their in-degree is computed at
        // dequeue time, so a stale enqueue is harmless
        if st.core(y) == k && !ctx.in_q(y) && parallel_order(st, w, y) {
            q.enqueue(st, list, y);
            ctx.set_in_q(y);
        }
    }
    ctx.scratch = buf;
}

fn backward_p(st: &MaintState, ctx: &mut WorkerContext, w: u32, k: u32) {
    ctx.touch_vplus(w);
    ctx.begin_backward();
    do_pre_p(st, ctx, w, k);
    st.set_deg_out(w, st.deg_out(w) + st.deg_in(w));
    st.set_deg_in(w, 0);
    let list = st.order_list(k);
    let mut pre = w;
    while let Some(x) = ctx.r.pop_front() {
        ctx.clear_in_r(x);
        ctx.evict_vstar(x);
        do_pre_p(st, ctx, x, k);
        do_post_p(st, ctx, x, k);
        st.s_inc(x);
        {
            let mut g = list.lock();
            g.delete(st.pool(), x);
            g.insert_after(st.pool(), pre, x);
        }
        st.s_inc(x);
        pre = x;
        st.set_deg_out(x, st.deg_out(x) + st.deg_in(x));
        st.set_deg_in(x, 0);
    }
}

fn do_pre_p(st: &MaintState, ctx: &mut WorkerContext, x: u32, k: u32) {
    let mut buf = std::mem::take(&mut ctx.scratch2);
    st.graph().copy_neighbors(x, &mut buf);
    for &y in &buf {
        if ctx.in_vstar(y) && st.precedes_now(y, x) {
            st.deg_out_dec(y);
            if st.deg_in(y) + st.deg_out(y) <= k && !ctx.in_r(y) {
                ctx.set_in_r(y);
                ctx.r.push_back(y);
            }
        }
    }
    ctx.scratch2 = buf;
}

fn do_post_p(st: &MaintState, ctx: &mut WorkerContext, x: u32, k: u32) {
    let mut buf = std::mem::take(&mut ctx.scratch2);
    st.graph().copy_neighbors(x, &mut buf);
    for &y in &buf {
        if ctx.in_vstar(y) && st.deg_in(y) > 0 && st.precedes_now(x, y) {
            st.deg_in_dec(y);
            if st.deg_in(y) + st.deg_out(y) <= k && !ctx.in_r(y) {
                ctx.set_in_r(y);
                ctx.r.push_back(y);
            }
        }
    }
    ctx.scratch2 = buf;
}

/// One worker, one removed edge.
pub fn remove_edge_p(st: &MaintState, ctx: &mut WorkerContext, u: u32, v: u32) -> EdgeOutcome {
    lock_pair(st, u, v);
    ctx.begin_op();
    ctx.hold(u);
    ctx.hold(v);
    if !st.graph().has_edge(u, v) {
        st.unlock(v);
        ctx.unhold(v);
        st.unlock(u);
        ctx.unhold(u);
        return EdgeOutcome::SkippedMissing;
    }
    let ku = st.core(u);
    let kv = st.core(v);
    let k = ku.min(kv);
    {
        let mut buf = std::mem::take(&mut ctx.scratch2);
        check_mcd(st, u, None, &mut buf);
        check_mcd(st, v, None, &mut buf);
        ctx.scratch2 = buf;
    }
    let removed = st.graph().remove_edge(u, v).expect("batch validated ids");
    debug_assert!(removed);
    // out-degrees of everything touched are recounted at the batch barrier;
    // nothing reads them while a removal batch is in flight
    ctx.dirty.push(u);
    ctx.dirty.push(v);
    if kv >= ku {
        do_mcd(st, ctx, u, k, true);
    } else {
        st.unlock(u);
        ctx.unhold(u);
    }
    if ku >= kv {
        do_mcd(st, ctx, v, k, true);
    } else {
        st.unlock(v);
        ctx.unhold(v);
    }

    propagate_removal_p(st, ctx, k);

    for i in 0..ctx.vstar.len() {
        let v = ctx.vstar[i];
        ctx.dirty.push(v);
    }
    while let Some(x) = ctx.locked.pop() {
        st.unlock(x);
    }
    let affected = ctx.vstar.len();
    ctx.hist_vstar.record(affected);
    EdgeOutcome::Applied { affected }
}

fn propagate_removal_p(st: &MaintState, ctx: &mut WorkerContext, k: u32) {
    while let Some(w) = ctx.r.pop_front() {
        ctx.begin_visit_scope();
        let mut buf = std::mem::take(&mut ctx.scratch);
        st.graph().copy_neighbors(w, &mut buf);
        loop {
            st.t_dec(w);
            let mut chk = std::mem::take(&mut ctx.scratch2);
            for &y in &buf {
                if ctx.is_visited(y) || st.core(y) != k {
                    continue;
                }
                // skip instead of blocking on a neighbor that lost core k
                if !cond_lock(st, y, || st.core(y) == k) {
                    continue;
                }
                ctx.hold(y);
                check_mcd(st, y, Some(w), &mut chk);
                do_mcd(st, ctx, y, k, true);
                ctx.mark_visited(y);
                ctx.dirty.push(y);
            }
            ctx.scratch2 = chk;
            st.t_dec(w);
            // a peer's compare-and-exchange wants this scan redone; the
            // visited set carries over so handled neighbors stay handled
            if st.t(w) == 0 {
                break;
            }
        }
        debug_assert_eq!(st.t(w), 0);
        ctx.scratch = buf;
    }
}

fn validate_batch(st: &MaintState, batch: &EdgeBatch, kind: BatchKind) -> Result<(), BatchError> {
    if batch.kind != kind {
        return Err(BatchError::KindMismatch);
    }
    let n = st.n() as u32;
    let mut seen: HashSet<u64> = HashSet::with_capacity(batch.len() * 2);
    for &(u, v) in &batch.edges {
        if u >= n || v >= n {
            return Err(BatchError::OutOfRange(u, v));
        }
        if u == v {
            return Err(BatchError::SelfLoop(u));
        }
        let key = ((u.min(v) as u64) << 32) | u.max(v) as u64;
        if !seen.insert(key) {
            return Err(BatchError::Duplicate(u, v));
        }
        if kind == BatchKind::Remove && !st.graph().has_edge(u, v) {
            return Err(BatchError::Missing(u, v));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
pub struct BatchOptions {
    pub workers: usize,
    /// Dynamic tail-stealing instead of static contiguous chunks.
    pub steal: bool,
}

impl BatchOptions {
    pub fn with_workers(workers: usize) -> Self {
        BatchOptions {
            workers: workers.max(1),
            steal: false,
        }
    }
}

fn run_workers(
    st: &MaintState,
    edges: &[(u32, u32)],
    opts: BatchOptions,
    insert: bool,
) -> BatchStats {
    let p = opts.workers.max(1);
    let mut ctxs: Vec<WorkerContext> = Vec::new();

    if p == 1 || edges.len() <= 1 {
        let mut ctx = WorkerContext::new(st.n());
        for &(u, v) in edges {
            if insert {
                insert_edge_p(st, &mut ctx, u, v);
            } else {
                remove_edge_p(st, &mut ctx, u, v);
            }
        }
        ctxs.push(ctx);
    } else if opts.steal {
        let cursor = AtomicUsize::new(0);
        const GRAB: usize = 16;
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..p)
                .map(|_| {
                    let cursor = &cursor;
                    s.spawn(move || {
                        let mut ctx = WorkerContext::new(st.n());
                        loop {
                            let start = cursor.fetch_add(GRAB, Ordering::SeqCst);
                            if start >= edges.len() {
                                break;
                            }
                            let end = (start + GRAB).min(edges.len());
                            for &(u, v) in &edges[start..end] {
                                if insert {
                                    insert_edge_p(st, &mut ctx, u, v);
                                } else {
                                    remove_edge_p(st, &mut ctx, u, v);
                                }
                            }
                        }
                        ctx
                    })
                })
                .collect();
            for h in handles {
                ctxs.push(h.join().expect("worker panicked"));
            }
        });
    } else {
        let chunk = edges.len().div_ceil(p);
        std::thread::scope(|s| {
            let handles: Vec<_> = edges
                .chunks(chunk)
                .map(|part| {
                    s.spawn(move || {
                        let mut ctx = WorkerContext::new(st.n());
                        for &(u, v) in part {
                            if insert {
                                insert_edge_p(st, &mut ctx, u, v);
                            } else {
                                remove_edge_p(st, &mut ctx, u, v);
                            }
                        }
                        ctx
                    })
                })
                .collect();
            for h in handles {
                ctxs.push(h.join().expect("worker panicked"));
            }
        });
    }

    let mut stats = BatchStats::default();
    let mut dirty: Vec<u32> = Vec::new();
    for ctx in &mut ctxs {
        stats.hist_vplus.merge(&ctx.hist_vplus);
        stats.hist_vstar.merge(&ctx.hist_vstar);
        dirty.append(&mut ctx.dirty);
    }
    stats.applied = if insert {
        stats.hist_vplus.total() as usize
    } else {
        stats.hist_vstar.total() as usize
    };
    stats.skipped = edges.len() - stats.applied;

    if !insert && !dirty.is_empty() {
        // quiescent barrier phase: demotions flipped same-core edge
        // orientations, so recount out-degrees of everything touched
        dirty.sort_unstable();
        dirty.dedup();
        let mut buf = Vec::new();
        for &v in &dirty {
            debug_assert_eq!(st.t(v), 0);
            st.recount_deg_out(v, &mut buf);
        }
    }
    stats
}

/// Inserts a batch with `workers` workers over static contiguous chunks.
/// Cores and the k-order are correct at return. Must not overlap a removal
/// batch.
pub fn parallel_insert_batch(
    st: &MaintState,
    batch: &EdgeBatch,
    workers: usize,
) -> Result<BatchStats, BatchError> {
    parallel_insert_batch_opts(st, batch, BatchOptions::with_workers(workers))
}

pub fn parallel_insert_batch_opts(
    st: &MaintState,
    batch: &EdgeBatch,
    opts: BatchOptions,
) -> Result<BatchStats, BatchError> {
    validate_batch(st, batch, BatchKind::Insert)?;
    Ok(run_workers(st, &batch.edges, opts, true))
}

/// Removes a batch with `workers` workers. Must not overlap an insertion
/// batch.
pub fn parallel_remove_batch(
    st: &MaintState,
    batch: &EdgeBatch,
    workers: usize,
) -> Result<BatchStats, BatchError> {
    parallel_remove_batch_opts(st, batch, BatchOptions::with_workers(workers))
}

pub fn parallel_remove_batch_opts(
    st: &MaintState,
    batch: &EdgeBatch,
    opts: BatchOptions,
) -> Result<BatchStats, BatchError> {
    validate_batch(st, batch, BatchKind::Remove)?;
    Ok(run_workers(st, &batch.edges, opts, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bz::bz_decompose;
    use crate::gen::erdos_renyi;
    use crate::graph::Graph;
    use crate::seq;
    use crate::state::init_state;
    use crate::verify::verify;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn assert_clean(st: &MaintState) {
        let verdicts = verify(st);
        assert!(verdicts.all_ok(), "{:?}", verdicts.failures);
    }

    #[test]
    fn parallel_order_basics() {
        let g = Graph::new(4);
        g.add_edge(0, 1).unwrap();
        g.add_edge(1, 2).unwrap();
        g.add_edge(2, 3).unwrap();
        g.add_edge(3, 0).unwrap();
        let c4 = init_state(g);
        assert!(!parallel_order(&c4, 1, 1), "irreflexive");
        // lower core precedes higher core
        let g = Graph::new(4);
        g.add_edge(0, 1).unwrap();
        g.add_edge(1, 2).unwrap();
        g.add_edge(2, 0).unwrap();
        g.add_edge(2, 3).unwrap();
        let st = init_state(g);
        assert_eq!(st.core(3), 1);
        assert_eq!(st.core(0), 2);
        assert!(parallel_order(&st, 3, 0));
        assert!(!parallel_order(&st, 0, 3));
    }

    #[test]
    fn single_worker_insert_matches_seq() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for trial in 0..20 {
            let g = erdos_renyi(80, 200, trial);
            let mut batch = Vec::new();
            while batch.len() < 40 {
                let u = rng.gen_range(0..80u32);
                let v = rng.gen_range(0..80u32);
                if u != v
                    && !g.has_edge(u, v)
                    && !batch.contains(&(u, v))
                    && !batch.contains(&(v, u))
                {
                    batch.push((u, v));
                }
            }
            let st_par = init_state(g.clone_graph());
            let st_seq = init_state(g);
            parallel_insert_batch(
                &st_par,
                &EdgeBatch::new(batch.clone(), BatchKind::Insert),
                1,
            )
            .unwrap();
            let mut ctx = WorkerContext::new(80);
            for &(u, v) in &batch {
                seq::insert_edge_seq(&st_seq, &mut ctx, u, v).unwrap();
            }
            assert_eq!(st_par.cores(), st_seq.cores());
            assert_clean(&st_par);
        }
    }

    #[test]
    fn single_worker_remove_matches_seq() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for trial in 0..20 {
            let g = erdos_renyi(80, 240, 100 + trial);
            let edges = g.edges();
            let mut batch = Vec::new();
            while batch.len() < 40 {
                let e = edges[rng.gen_range(0..edges.len())];
                if !batch.contains(&e) {
                    batch.push(e);
                }
            }
            let st_par = init_state(g.clone_graph());
            let st_seq = init_state(g);
            parallel_remove_batch(
                &st_par,
                &EdgeBatch::new(batch.clone(), BatchKind::Remove),
                1,
            )
            .unwrap();
            let mut ctx = WorkerContext::new(80);
            for &(u, v) in &batch {
                seq::remove_edge_seq(&st_seq, &mut ctx, u, v).unwrap();
            }
            assert_eq!(st_par.cores(), st_seq.cores());
            assert_clean(&st_par);
        }
    }

    #[test]
    fn multi_worker_oracle_small() {
        for p in [2usize, 4] {
            for seed in 0..8u64 {
                let g = erdos_renyi(120, 360, 200 + seed);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut batch = Vec::new();
                let mut used: HashSet<(u32, u32)> = HashSet::new();
                while batch.len() < 80 {
                    let u = rng.gen_range(0..120u32);
                    let v = rng.gen_range(0..120u32);
                    let key = (u.min(v), u.max(v));
                    if u != v && !g.has_edge(u, v) && used.insert(key) {
                        batch.push((u, v));
                    }
                }
                let st = init_state(g);
                parallel_insert_batch(&st, &EdgeBatch::new(batch, BatchKind::Insert), p).unwrap();
                assert_eq!(st.cores(), bz_decompose(st.graph()).core, "p={p} seed={seed}");
                assert_clean(&st);
            }
        }
    }

    #[test]
    fn multi_worker_remove_oracle_small() {
        for p in [2usize, 4] {
            for seed in 0..8u64 {
                let g = erdos_renyi(120, 480, 300 + seed);
                let all = g.edges();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let picks =
                    rand::seq::index::sample(&mut rng, all.len(), 80).into_vec();
                let batch: Vec<(u32, u32)> = picks.iter().map(|&i| all[i]).collect();
                let st = init_state(g);
                parallel_remove_batch(&st, &EdgeBatch::new(batch, BatchKind::Remove), p).unwrap();
                assert_eq!(st.cores(), bz_decompose(st.graph()).core, "p={p} seed={seed}");
                assert_clean(&st);
            }
        }
    }

    #[test]
    fn empty_batches_change_nothing() {
        let g = erdos_renyi(40, 100, 1);
        let st = init_state(g);
        let before = st.cores();
        parallel_insert_batch(&st, &EdgeBatch::new(vec![], BatchKind::Insert), 4).unwrap();
        parallel_remove_batch(&st, &EdgeBatch::new(vec![], BatchKind::Remove), 4).unwrap();
        assert_eq!(st.cores(), before);
        assert_clean(&st);
    }

    #[test]
    fn duplicate_edges_rejected() {
        let st = init_state(Graph::new(4));
        let batch = EdgeBatch::new(vec![(0, 1), (1, 0)], BatchKind::Insert);
        assert!(matches!(
            parallel_insert_batch(&st, &batch, 2),
            Err(BatchError::Duplicate(_, _))
        ));
    }

    #[test]
    fn existing_edge_skipped_with_status() {
        let g = Graph::new(3);
        g.add_edge(0, 1).unwrap();
        let st = init_state(g);
        let mut ctx = WorkerContext::new(3);
        assert_eq!(
            insert_edge_p(&st, &mut ctx, 0, 1),
            EdgeOutcome::SkippedExisting
        );
        st.debug_assert_no_locks_held();
    }

    #[test]
    fn check_mcd_counts_in_flight_and_forces_redo() {
        // triangle {0,1,2} plus vertex 3 on (0,3),(1,3): all cores 2
        let g = Graph::new(4);
        for (a, b) in [(0, 1), (1, 2), (2, 0), (0, 3), (1, 3)] {
            g.add_edge(a, b).unwrap();
        }
        let st = init_state(g);
        assert_eq!(st.cores(), vec![2, 2, 2, 2]);
        // fake a concurrent demotion of 3 caught mid-propagation (t = 1)
        st.order_list(2).delete(st.pool(), 3);
        st.demote_mark(3, 1);
        st.t_dec(3);
        assert_eq!(st.t(3), 1);
        let probe = 0; // core-2 neighbor of the demoted vertex
        st.clear_mcd(probe);
        let mut buf = Vec::new();
        check_mcd(&st, probe, None, &mut buf);
        assert_eq!(st.mcd(probe), Some(3), "in-flight neighbor counted");
        assert_eq!(st.t(3), 3, "forced redo via the 1->3 exchange");
        // finished neighbor (t = 0) is excluded from the count
        st.t_dec(3);
        st.t_dec(3);
        st.t_dec(3);
        assert_eq!(st.t(3), 0);
        st.clear_mcd(probe);
        check_mcd(&st, probe, None, &mut buf);
        assert_eq!(st.mcd(probe), Some(2), "finished neighbor excluded");
    }

    #[test]
    fn concurrent_shared_endpoint_inserts() {
        // two workers hammer edges sharing endpoints; final cores must match
        let g = erdos_renyi(60, 120, 77);
        let mut batch = Vec::new();
        for v in 1..30u32 {
            if !g.has_edge(0, v) {
                batch.push((0, v));
            }
        }
        let st = init_state(g);
        parallel_insert_batch(&st, &EdgeBatch::new(batch, BatchKind::Insert), 4).unwrap();
        assert_eq!(st.cores(), bz_decompose(st.graph()).core);
        assert_clean(&st);
    }

    #[test]
    fn steal_mode_matches_static() {
        let g = erdos_renyi(100, 300, 55);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut batch = Vec::new();
        let mut used: HashSet<(u32, u32)> = HashSet::new();
        while batch.len() < 60 {
            let u = rng.gen_range(0..100u32);
            let v = rng.gen_range(0..100u32);
            if u != v && !g.has_edge(u, v) && used.insert((u.min(v), u.max(v))) {
                batch.push((u, v));
            }
        }
        let st1 = init_state(g.clone_graph());
        let st2 = init_state(g);
        let b = EdgeBatch::new(batch, BatchKind::Insert);
        parallel_insert_batch(&st1, &b, 3).unwrap();
        parallel_insert_batch_opts(
            &st2,
            &b,
            BatchOptions {
                workers: 3,
                steal: true,
            },
        )
        .unwrap();
        assert_eq!(st1.cores(), st2.cores());
        assert_clean(&st1);
        assert_clean(&st2);
    }

    #[test]
    fn s_parity_even_after_batches() {
        let g = erdos_renyi(50, 150, 31);
        let all = g.edges();
        let st = init_state(g);
        let batch: Vec<(u32, u32)> = all.iter().take(30).copied().collect();
        parallel_remove_batch(&st, &EdgeBatch::new(batch.clone(), BatchKind::Remove), 2).unwrap();
        parallel_insert_batch(&st, &EdgeBatch::new(batch, BatchKind::Insert), 2).unwrap();
        for v in 0..50u32 {
            assert_eq!(st.s(v) % 2, 0);
            assert_eq!(st.t(v), 0);
            assert!(!st.is_locked(v));
        }
        assert_clean(&st);
    }
}
