//! Per-worker scratch state. Strictly private to one worker; reused across
//! edge operations via stamp arrays so per-op clearing is O(1).

use std::collections::VecDeque;

/// Bucketed sizes of the searched/changed vertex sets, one count per edge
/// operation: buckets 0..=10 plus an overflow bucket.
#[derive(Debug, Clone, Default)]
pub struct Histogram {
    buckets: [u64; 12],
}

impl Histogram {
    pub fn record(&mut self, size: usize) {
        let i = size.min(11);
        self.buckets[i] += 1;
    }

    pub fn merge(&mut self, other: &Histogram) {
        for (a, b) in self.buckets.iter_mut().zip(other.buckets.iter()) {
            *a += b;
        }
    }

    pub fn total(&self) -> u64 {
        self.buckets.iter().sum()
    }

    pub fn bucket(&self, i: usize) -> u64 {
        self.buckets[i]
    }

    /// Fraction of operations with set size at most 10; 1.0 for no samples.
    pub fn frac_le10(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 1.0;
        }
        (total - self.buckets[11]) as f64 / total as f64
    }
}

pub struct WorkerContext {
    op_stamp: u64,
    bw_stamp: u64,
    visit_stamp: u64,
    in_q: Vec<u64>,
    in_r: Vec<u64>,
    in_vstar: Vec<u64>,
    in_vplus: Vec<u64>,
    visited: Vec<u64>,
    last_pos: Vec<u32>,
    pub(crate) vstar: Vec<u32>,
    pub(crate) r: VecDeque<u32>,
    pub(crate) locked: Vec<u32>,
    pub(crate) scratch: Vec<u32>,
    pub(crate) scratch2: Vec<u32>,
    pub(crate) dirty: Vec<u32>,
    pub(crate) vplus_count: usize,
    pub hist_vplus: Histogram,
    pub hist_vstar: Histogram,
}

impl WorkerContext {
    pub fn new(n: usize) -> Self {
        WorkerContext {
            op_stamp: 0,
            bw_stamp: 0,
            visit_stamp: 0,
            in_q: vec![0; n],
            in_r: vec![0; n],
            in_vstar: vec![0; n],
            in_vplus: vec![0; n],
            visited: vec![0; n],
            last_pos: vec![0; n],
            vstar: Vec::new(),
            r: VecDeque::new(),
            locked: Vec::new(),
            scratch: Vec::new(),
            scratch2: Vec::new(),
            dirty: Vec::new(),
            vplus_count: 0,
            hist_vplus: Histogram::default(),
            hist_vstar: Histogram::default(),
        }
    }

    /// Resets per-operation sets (stamps bump, vectors clear).
    pub(crate) fn begin_op(&mut self) {
        self.op_stamp += 1;
        self.vstar.clear();
        self.r.clear();
        debug_assert!(self.locked.is_empty(), "locks leaked across operations");
        self.locked.clear();
        self.vplus_count = 0;
    }

    pub(crate) fn set_in_q(&mut self, v: u32) {
        self.in_q[v as usize] = self.op_stamp;
    }

    pub(crate) fn clear_in_q(&mut self, v: u32) {
        self.in_q[v as usize] = 0;
    }

    pub(crate) fn in_q(&self, v: u32) -> bool {
        self.in_q[v as usize] == self.op_stamp
    }

    /// Fresh membership scope for one backward cascade's eviction queue.
    pub(crate) fn begin_backward(&mut self) {
        self.bw_stamp += 1;
        self.r.clear();
    }

    pub(crate) fn set_in_r(&mut self, v: u32) {
        self.in_r[v as usize] = self.bw_stamp;
    }

    pub(crate) fn clear_in_r(&mut self, v: u32) {
        self.in_r[v as usize] = 0;
    }

    pub(crate) fn in_r(&self, v: u32) -> bool {
        self.in_r[v as usize] == self.bw_stamp
    }

    pub(crate) fn add_vstar(&mut self, v: u32) {
        self.in_vstar[v as usize] = self.op_stamp;
        self.last_pos[v as usize] = self.vstar.len() as u32;
        self.vstar.push(v);
    }

    pub(crate) fn evict_vstar(&mut self, v: u32) {
        self.in_vstar[v as usize] = 0;
    }

    pub(crate) fn in_vstar(&self, v: u32) -> bool {
        self.in_vstar[v as usize] == self.op_stamp
    }

    /// Marks first touch in the searching set; returns true if fresh.
    pub(crate) fn touch_vplus(&mut self, v: u32) -> bool {
        if self.in_vplus[v as usize] == self.op_stamp {
            return false;
        }
        self.in_vplus[v as usize] = self.op_stamp;
        self.vplus_count += 1;
        true
    }

    /// Surviving candidates in insertion order (re-additions keep their
    /// latest position).
    pub(crate) fn live_vstar(&self) -> Vec<u32> {
        self.vstar
            .iter()
            .enumerate()
            .filter(|&(i, &v)| self.in_vstar(v) && self.last_pos[v as usize] as usize == i)
            .map(|(_, &v)| v)
            .collect()
    }

    /// Fresh visited scope for one removal propagation source (kept across
    /// its redo passes).
    pub(crate) fn begin_visit_scope(&mut self) {
        self.visit_stamp += 1;
    }

    pub(crate) fn mark_visited(&mut self, v: u32) {
        self.visited[v as usize] = self.visit_stamp;
    }

    pub(crate) fn is_visited(&self, v: u32) -> bool {
        self.visited[v as usize] == self.visit_stamp
    }

    pub(crate) fn hold(&mut self, v: u32) {
        self.locked.push(v);
    }

    pub(crate) fn unhold(&mut self, v: u32) {
        let i = self
            .locked
            .iter()
            .position(|&x| x == v)
            .expect("unhold of vertex not held");
        self.locked.swap_remove(i);
    }
}
