//! Worker-private min-priority queue over order-list labels.
//!
//! Members carry a `(top, bottom)` label snapshot plus the vertex's status
//! counter and the list version the snapshot was taken under. Other workers
//! may reorder queued vertices or relabel the list; the queue stays honest
//! by marking itself stale whenever a snapshot may be inconsistent and
//! refreshing every member against a quiescent view (list relabel counter
//! zero and version unchanged across the scan) before the next dequeue.
//! Dequeue condition-locks the minimum with `core = k`, discarding members
//! whose core moved on, and re-checks the status counter after locking so a
//! vertex reordered since its snapshot forces a refresh instead of being
//! returned out of order.

use crate::lock::{backoff, cond_lock};
use crate::om::OrderList;
use crate::state::MaintState;

#[derive(Clone, Copy)]
struct Member {
    v: u32,
    top: u64,
    bot: u64,
    s: u64,
}

impl Member {
    fn key(&self) -> (u64, u64, u32) {
        (self.top, self.bot, self.v)
    }
}

pub struct OrderedQueue {
    heap: Vec<Member>,
    /// `None` marks a stale snapshot set.
    ver: Option<u64>,
}

impl OrderedQueue {
    pub fn new(list: &OrderList) -> Self {
        let v = list.ver();
        OrderedQueue {
            heap: Vec::new(),
            ver: (v & 1 == 0).then_some(v),
        }
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn contains(&self, v: u32) -> bool {
        self.heap.iter().any(|m| m.v == v)
    }

    /// Records `v` with current label/status snapshots; any inconsistency
    /// observed around the read marks the queue stale for a later refresh.
    pub fn enqueue(&mut self, st: &MaintState, list: &OrderList, v: u32) {
        let ver0 = list.ver();
        let s0 = st.s(v);
        let (top, bot) = st.pool().label_key(v);
        self.heap.push(Member { v, top, bot, s: s0 });
        self.sift_up(self.heap.len() - 1);
        if list.ver() != ver0 || self.ver != Some(ver0) || st.s(v) != s0 || s0 & 1 == 1 {
            self.ver = None;
        }
    }

    /// Refreshes every member's snapshot against a stable view of the list:
    /// the relabel counter must be zero and the version unchanged across the
    /// whole scan, and each member's status counter must be even and stable
    /// around its label read. Restarts until both hold.
    pub fn update_version(&mut self, st: &MaintState, list: &OrderList) {
        let mut spins = 0u32;
        'outer: loop {
            let ver0 = list.ver();
            if list.cnt() != 0 || ver0 & 1 == 1 {
                backoff(&mut spins);
                continue;
            }
            if self.ver != Some(ver0) {
                for m in self.heap.iter_mut() {
                    loop {
                        let s0 = st.s(m.v);
                        if s0 & 1 == 1 {
                            backoff(&mut spins);
                            continue;
                        }
                        let (top, bot) = st.pool().label_key(m.v);
                        if st.s(m.v) != s0 {
                            continue;
                        }
                        m.top = top;
                        m.bot = bot;
                        m.s = s0;
                        break;
                    }
                }
            }
            if list.cnt() != 0 || list.ver() != ver0 {
                backoff(&mut spins);
                continue 'outer;
            }
            self.ver = Some(ver0);
            self.rebuild();
            return;
        }
    }

    /// Pops the minimum member that still has `core = k`, locked. Members
    /// whose core changed are discarded (reported through `on_discard`);
    /// a member whose status counter moved since its snapshot is unlocked
    /// and the queue refreshed. Returns `None` when drained.
    pub fn dequeue_locked(
        &mut self,
        st: &MaintState,
        list: &OrderList,
        k: u32,
        mut on_discard: impl FnMut(u32),
    ) -> Option<u32> {
        loop {
            if self.heap.is_empty() {
                return None;
            }
            if self.ver.is_none() {
                self.update_version(st, list);
            }
            let m = self.heap[0];
            if !cond_lock(st, m.v, || st.core(m.v) == k) {
                self.pop_root();
                on_discard(m.v);
                continue;
            }
            if st.s(m.v) != m.s {
                st.unlock(m.v);
                self.ver = None;
                continue;
            }
            self.pop_root();
            return Some(m.v);
        }
    }

    /// Single-owner dequeue: no locking, but label snapshots still refresh
    /// after relabels so the minimum is genuine.
    pub fn dequeue_seq(&mut self, st: &MaintState, list: &OrderList) -> Option<u32> {
        if self.heap.is_empty() {
            return None;
        }
        if self.ver.is_none() {
            self.update_version(st, list);
        }
        Some(self.pop_root().v)
    }

    fn pop_root(&mut self) -> Member {
        let last = self.heap.len() - 1;
        self.heap.swap(0, last);
        let m = self.heap.pop().unwrap();
        if !self.heap.is_empty() {
            self.sift_down(0);
        }
        m
    }

    fn rebuild(&mut self) {
        for i in (0..self.heap.len() / 2).rev() {
            self.sift_down(i);
        }
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let p = (i - 1) / 2;
            if self.heap[i].key() < self.heap[p].key() {
                self.heap.swap(i, p);
                i = p;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        let n = self.heap.len();
        loop {
            let mut best = i;
            for c in [2 * i + 1, 2 * i + 2] {
                if c < n && self.heap[c].key() < self.heap[best].key() {
                    best = c;
                }
            }
            if best == i {
                return;
            }
            self.heap.swap(i, best);
            i = best;
        }
    }
}
