//! Shared maintenance state: the graph, per-vertex counters, and the
//! per-core-value order lists.
//!
//! Layout notes. `core` and the removal status `t` share one atomic word so
//! a demotion can publish both in a single store. The status counter `s` is
//! bumped before and after every repositioning of a vertex in its order
//! list, so an odd value marks a move in flight and lock-free order readers
//! can revalidate. `deg_out`/`deg_in` are only ever mutated under the owning
//! vertex's lock; `mcd` uses `-1` as the "unknown, recompute on demand"
//! sentinel.

use std::sync::atomic::{AtomicBool, AtomicI64, AtomicU32, AtomicU64, Ordering::SeqCst};
use std::sync::OnceLock;

use crate::bz::{bz_decompose, CoreAssignment};
use crate::graph::Graph;
use crate::om::{EntryPool, OrderList};

pub struct MaintState {
    graph: Graph,
    pool: EntryPool,
    orders: Box<[OnceLock<OrderList>]>,
    core_t: Vec<AtomicU64>,
    s: Vec<AtomicU64>,
    locks: Vec<AtomicBool>,
    deg_out: Vec<AtomicU32>,
    deg_in: Vec<AtomicU32>,
    mcd: Vec<AtomicI64>,
}

/// Builds the resting state for a graph: cores and the k-order from one
/// peeling run, remaining out-degrees counted against that order, candidate
/// in-degrees zero, max-core degrees unknown (computed lazily).
pub fn init_state(graph: Graph) -> MaintState {
    let n = graph.n();
    let CoreAssignment { core, peel_order } = bz_decompose(&graph);
    let pool = EntryPool::new(n);

    let orders: Box<[OnceLock<OrderList>]> = (0..n + 2).map(|_| OnceLock::new()).collect();
    // peel order is contiguous by core value: one build per run
    let mut i = 0;
    while i < n {
        let k = core[peel_order[i] as usize];
        let mut j = i;
        while j < n && core[peel_order[j] as usize] == k {
            j += 1;
        }
        let list = orders[k as usize].get_or_init(|| OrderList::new(k));
        list.build(&pool, &peel_order[i..j]);
        i = j;
    }

    let mut rank = vec![0u32; n];
    for (r, &v) in peel_order.iter().enumerate() {
        rank[v as usize] = r as u32;
    }
    let mut deg_out = vec![0u32; n];
    for v in 0..n as u32 {
        deg_out[v as usize] = graph
            .neighbors(v)
            .iter()
            .filter(|&&w| rank[w as usize] > rank[v as usize])
            .count() as u32;
    }

    MaintState {
        graph,
        pool,
        orders,
        core_t: core.iter().map(|&c| AtomicU64::new((c as u64) << 32)).collect(),
        s: (0..n).map(|_| AtomicU64::new(0)).collect(),
        locks: (0..n).map(|_| AtomicBool::new(false)).collect(),
        deg_out: deg_out.into_iter().map(AtomicU32::new).collect(),
        deg_in: (0..n).map(|_| AtomicU32::new(0)).collect(),
        mcd: (0..n).map(|_| AtomicI64::new(-1)).collect(),
    }
}

impl MaintState {
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn pool(&self) -> &EntryPool {
        &self.pool
    }

    pub fn core(&self, v: u32) -> u32 {
        (self.core_t[v as usize].load(SeqCst) >> 32) as u32
    }

    /// One consistent `(core, t)` snapshot.
    pub fn core_and_t(&self, v: u32) -> (u32, u32) {
        let w = self.core_t[v as usize].load(SeqCst);
        ((w >> 32) as u32, w as u32)
    }

    pub fn t(&self, v: u32) -> u32 {
        self.core_t[v as usize].load(SeqCst) as u32
    }

    /// Core bump at the end of an insertion; `t` is zero throughout inserts.
    pub fn promote(&self, v: u32, new_core: u32) {
        self.core_t[v as usize].store((new_core as u64) << 32, SeqCst);
    }

    /// Atomically publishes `core = new_core, t = 2` (demotion + "ready to
    /// be propagated") as one store.
    pub fn demote_mark(&self, v: u32, new_core: u32) {
        self.core_t[v as usize].store(((new_core as u64) << 32) | 2, SeqCst);
    }

    pub fn t_dec(&self, v: u32) {
        let prev = self.core_t[v as usize].fetch_sub(1, SeqCst);
        debug_assert!(prev as u32 >= 1, "t underflow on {v}");
    }

    /// `CAS(t, 1, 3)`: flags a mid-propagation vertex for a redo pass.
    pub fn t_cas_1_to_3(&self, v: u32) -> bool {
        let cell = &self.core_t[v as usize];
        loop {
            let cur = cell.load(SeqCst);
            if cur as u32 != 1 {
                return false;
            }
            if cell
                .compare_exchange(cur, (cur & !0xffff_ffff) | 3, SeqCst, SeqCst)
                .is_ok()
            {
                return true;
            }
        }
    }

    pub fn s(&self, v: u32) -> u64 {
        self.s[v as usize].load(SeqCst)
    }

    pub fn s_inc(&self, v: u32) {
        self.s[v as usize].fetch_add(1, SeqCst);
    }

    pub fn deg_out(&self, v: u32) -> u32 {
        self.deg_out[v as usize].load(SeqCst)
    }

    pub fn deg_out_inc(&self, v: u32) {
        self.deg_out[v as usize].fetch_add(1, SeqCst);
    }

    pub fn deg_out_dec(&self, v: u32) {
        let prev = self.deg_out[v as usize].fetch_sub(1, SeqCst);
        debug_assert!(prev >= 1, "deg_out underflow on {v}");
    }

    pub fn set_deg_out(&self, v: u32, d: u32) {
        self.deg_out[v as usize].store(d, SeqCst);
    }

    pub fn deg_in(&self, v: u32) -> u32 {
        self.deg_in[v as usize].load(SeqCst)
    }

    pub fn deg_in_inc(&self, v: u32) {
        self.deg_in[v as usize].fetch_add(1, SeqCst);
    }

    pub fn deg_in_dec(&self, v: u32) {
        let prev = self.deg_in[v as usize].fetch_sub(1, SeqCst);
        debug_assert!(prev >= 1, "deg_in underflow on {v}");
    }

    pub fn set_deg_in(&self, v: u32, d: u32) {
        self.deg_in[v as usize].store(d, SeqCst);
    }

    pub fn mcd(&self, v: u32) -> Option<u32> {
        let x = self.mcd[v as usize].load(SeqCst);
        (x >= 0).then_some(x as u32)
    }

    pub fn set_mcd(&self, v: u32, val: u32) {
        self.mcd[v as usize].store(val as i64, SeqCst);
    }

    pub fn mcd_dec(&self, v: u32) {
        let prev = self.mcd[v as usize].fetch_sub(1, SeqCst);
        debug_assert!(prev >= 1, "mcd decrement on {v} without a value");
    }

    pub fn mcd_inc_if_known(&self, v: u32) {
        let cell = &self.mcd[v as usize];
        loop {
            let cur = cell.load(SeqCst);
            if cur < 0 {
                return;
            }
            if cell.compare_exchange(cur, cur + 1, SeqCst, SeqCst).is_ok() {
                return;
            }
        }
    }

    pub fn clear_mcd(&self, v: u32) {
        self.mcd[v as usize].store(-1, SeqCst);
    }

    pub(crate) fn lock_cell(&self, v: u32) -> &AtomicBool {
        &self.locks[v as usize]
    }

    /// Order list for core value `k`, created on first use.
    pub fn order_list(&self, k: u32) -> &OrderList {
        self.orders[k as usize].get_or_init(|| OrderList::new(k))
    }

    pub fn order_list_if_built(&self, k: u32) -> Option<&OrderList> {
        self.orders.get(k as usize).and_then(|c| c.get())
    }

    /// True iff `u` precedes `v` in the k-order, read directly (core first,
    /// labels on ties). Safe when neither vertex can move during the call:
    /// quiescence, or both locked by the caller.
    pub fn precedes_now(&self, u: u32, v: u32) -> bool {
        if u == v {
            return false;
        }
        let cu = self.core(u);
        let cv = self.core(v);
        if cu != cv {
            return cu < cv;
        }
        self.order_list(cu).order(&self.pool, u, v)
    }

    pub fn cores(&self) -> Vec<u32> {
        (0..self.n() as u32).map(|v| self.core(v)).collect()
    }

    /// Recomputes `deg_out` for `v` against the current order (quiescent or
    /// all-relevant-locks-held use only).
    pub fn recount_deg_out(&self, v: u32, scratch: &mut Vec<u32>) {
        self.graph.copy_neighbors(v, scratch);
        let d = scratch.iter().filter(|&&w| self.precedes_now(v, w)).count() as u32;
        self.set_deg_out(v, d);
    }

    /// Count of neighbors with core at least `core(v)` (the max-core degree
    /// definition), computed fresh.
    pub fn count_mcd_now(&self, v: u32, scratch: &mut Vec<u32>) -> u32 {
        let kv = self.core(v);
        self.graph.copy_neighbors(v, scratch);
        scratch.iter().filter(|&&w| self.core(w) >= kv).count() as u32
    }
}
