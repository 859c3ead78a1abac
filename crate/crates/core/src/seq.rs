//! Sequential order-based single-edge insertion and removal.
//!
//! This is the single-owner reference path: it shares `MaintState` with the
//! parallel module but must run with no concurrent workers. Insertion
//! maintains candidate in-degrees eagerly while traversing the affected
//! same-core vertices in k-order through the label-keyed priority queue;
//! removal propagates max-core-degree decrements. Both restore every
//! resting-state invariant before returning, so a run of these operations
//! doubles as the mid-tier oracle for the batch-parallel path.

use thiserror::Error;

use crate::ctx::WorkerContext;
use crate::par::{check_mcd, do_mcd, ending_promote, invalidate_promoted_neighbor_mcd};
use crate::pq::OrderedQueue;
use crate::state::MaintState;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OpError {
    #[error("vertex {0} out of range")]
    OutOfRange(u32),
    #[error("self-loop ({0},{0})")]
    SelfLoop(u32),
    #[error("edge ({0},{1}) already present")]
    EdgePresent(u32, u32),
    #[error("edge ({0},{1}) absent")]
    EdgeAbsent(u32, u32),
}

fn validate(st: &MaintState, u: u32, v: u32) -> Result<(), OpError> {
    let n = st.n() as u32;
    if u >= n {
        return Err(OpError::OutOfRange(u));
    }
    if v >= n {
        return Err(OpError::OutOfRange(v));
    }
    if u == v {
        return Err(OpError::SelfLoop(u));
    }
    Ok(())
}

/// Inserts one edge and restores cores and the k-order. Returns the size of
/// the searched set (zero when the insertion is absorbed without traversal).
pub fn insert_edge_seq(
    st: &MaintState,
    ctx: &mut WorkerContext,
    u: u32,
    v: u32,
) -> Result<usize, OpError> {
    validate(st, u, v)?;
    if st.graph().has_edge(u, v) {
        return Err(OpError::EdgePresent(u, v));
    }
    // orient so the k-order-smaller endpoint carries the new out-edge
    let (u, v) = if st.precedes_now(u, v) { (u, v) } else { (v, u) };
    let k = st.core(u);
    let added = st.graph().add_edge(u, v).expect("validated ids");
    debug_assert!(added);
    st.deg_out_inc(u);
    if st.core(v) >= st.core(u) {
        st.mcd_inc_if_known(u);
    }
    if st.core(u) >= st.core(v) {
        st.mcd_inc_if_known(v);
    }
    if st.deg_out(u) <= k {
        ctx.hist_vplus.record(0);
        return Ok(0);
    }

    ctx.begin_op();
    let list = st.order_list(k);
    let mut q = OrderedQueue::new(list);
    q.enqueue(st, list, u);
    ctx.set_in_q(u);
    while let Some(w) = q.dequeue_seq(st, list) {
        ctx.clear_in_q(w);
        if st.deg_in(w) + st.deg_out(w) > k {
            forward(st, ctx, &mut q, w, k);
        } else if st.deg_in(w) > 0 {
            backward(st, ctx, w, k);
        }
        // otherwise w is out of reach: skip
    }

    let survivors = ctx.live_vstar();
    ending_promote(st, &survivors, k);
    invalidate_promoted_neighbor_mcd(st, ctx, &survivors, k);
    ctx.hist_vplus.record(ctx.vplus_count);
    Ok(ctx.vplus_count)
}

/// Admits `w` to the candidate set and feeds its same-core successors into
/// the queue, bumping their candidate in-degrees.
fn forward(st: &MaintState, ctx: &mut WorkerContext, q: &mut OrderedQueue, w: u32, k: u32) {
    ctx.touch_vplus(w);
    ctx.add_vstar(w);
    let mut buf = std::mem::take(&mut ctx.scratch);
    st.graph().copy_neighbors(w, &mut buf);
    let list = st.order_list(k);
    for &y in &buf {
        if st.core(y) == k && st.precedes_now(w, y) {
            st.deg_in_inc(y);
            if !ctx.in_q(y) {
                q.enqueue(st, list, y);
                ctx.set_in_q(y);
            }
        }
    }
    ctx.scratch = buf;
}

/// `w` cannot join the candidate set: peel back every candidate whose
/// support drops to `k` or below, repositioning each evicted vertex right
/// after the running anchor so the k-order stays consistent.
fn backward(st: &MaintState, ctx: &mut WorkerContext, w: u32, k: u32) {
    ctx.touch_vplus(w);
    ctx.begin_backward();
    do_pre(st, ctx, w, k);
    st.set_deg_out(w, st.deg_out(w) + st.deg_in(w));
    st.set_deg_in(w, 0);
    let list = st.order_list(k);
    let mut pre = w;
    while let Some(x) = ctx.r.pop_front() {
        ctx.clear_in_r(x);
        ctx.evict_vstar(x);
        do_pre(st, ctx, x, k);
        do_post(st, ctx, x, k);
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

fn do_pre(st: &MaintState, ctx: &mut WorkerContext, x: u32, k: u32) {
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

fn do_post(st: &MaintState, ctx: &mut WorkerContext, x: u32, k: u32) {
    let mut buf = std::mem::take(&mut ctx.scratch2);
    st.graph().copy_neighbors(x, &mut buf);
    for &y in &buf {
        if st.deg_in(y) > 0 && st.precedes_now(x, y) {
            st.deg_in_dec(y);
            if ctx.in_vstar(y) && st.deg_in(y) + st.deg_out(y) <= k && !ctx.in_r(y) {
                ctx.set_in_r(y);
                ctx.r.push_back(y);
            }
        }
    }
    ctx.scratch2 = buf;
}

/// Removes one edge and restores cores, the k-order, and the degree
/// counters. Returns the number of vertices whose core dropped.
pub fn remove_edge_seq(
    st: &MaintState,
    ctx: &mut WorkerContext,
    u: u32,
    v: u32,
) -> Result<usize, OpError> {
    validate(st, u, v)?;
    if !st.graph().has_edge(u, v) {
        return Err(OpError::EdgeAbsent(u, v));
    }
    ctx.begin_op();
    ctx.dirty.clear();
    let ku = st.core(u);
    let kv = st.core(v);
    let k = ku.min(kv);
    {
        let mut buf = std::mem::take(&mut ctx.scratch2);
        check_mcd(st, u, None, &mut buf);
        check_mcd(st, v, None, &mut buf);
        ctx.scratch2 = buf;
    }
    let removed = st.graph().remove_edge(u, v).expect("validated ids");
    debug_assert!(removed);
    // out-degrees of everything touched are recounted at the end of the op
    ctx.dirty.push(u);
    ctx.dirty.push(v);
    // an endpoint's max-core degree drops only if the lost neighbor had
    // core at least its own (pre-removal cores)
    if kv >= ku {
        do_mcd(st, ctx, u, k, false);
    }
    if ku >= kv {
        do_mcd(st, ctx, v, k, false);
    }
    propagate_removal_seq(st, ctx, k);

    for i in 0..ctx.vstar.len() {
        let v = ctx.vstar[i];
        ctx.dirty.push(v);
    }
    repair_deg_out(st, ctx);
    let n_changed = ctx.vstar.len();
    ctx.hist_vstar.record(n_changed);
    Ok(n_changed)
}

fn propagate_removal_seq(st: &MaintState, ctx: &mut WorkerContext, k: u32) {
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
                check_mcd(st, y, Some(w), &mut chk);
                do_mcd(st, ctx, y, k, false);
                ctx.mark_visited(y);
                ctx.dirty.push(y);
            }
            ctx.scratch2 = chk;
            st.t_dec(w);
            if st.t(w) == 0 {
                break;
            }
        }
        ctx.scratch = buf;
    }
}

/// Demotions flip the orientation of edges against same-core neighbors, so
/// every touched vertex gets its remaining out-degree recounted against the
/// final order.
pub(crate) fn repair_deg_out(st: &MaintState, ctx: &mut WorkerContext) {
    let mut dirty = std::mem::take(&mut ctx.dirty);
    dirty.sort_unstable();
    dirty.dedup();
    let mut buf = std::mem::take(&mut ctx.scratch);
    for &v in &dirty {
        st.recount_deg_out(v, &mut buf);
    }
    ctx.scratch = buf;
    dirty.clear();
    ctx.dirty = dirty;
}
