//! Per-vertex spinlocks and the conditional-lock primitive.
//!
//! Locks are single compare-and-exchange flags with bounded spinning and a
//! yielding back-off; fairness is assumed, not enforced. Debug builds track
//! a per-thread ledger of held vertices so re-entrant acquisition and leaked
//! locks are caught in tests.

use std::sync::atomic::Ordering::{Acquire, Release, SeqCst};

use crate::state::MaintState;

const SPINS_BEFORE_YIELD: u32 = 32;

pub(crate) fn backoff(spins: &mut u32) {
    *spins = spins.saturating_add(1);
    if *spins < SPINS_BEFORE_YIELD {
        std::hint::spin_loop();
    } else {
        std::thread::yield_now();
    }
}

#[cfg(debug_assertions)]
mod ledger {
    use std::cell::RefCell;
    use std::collections::HashSet;

    thread_local! {
        static HELD: RefCell<HashSet<(usize, u32)>> = RefCell::new(HashSet::new());
    }

    pub fn acquire(state: usize, v: u32) {
        HELD.with(|h| {
            assert!(
                h.borrow_mut().insert((state, v)),
                "re-entrant lock of vertex {v}"
            );
        });
    }

    pub fn assert_not_held(state: usize, v: u32) {
        HELD.with(|h| {
            assert!(
                !h.borrow().contains(&(state, v)),
                "re-entrant lock of vertex {v}"
            );
        });
    }

    pub fn release(state: usize, v: u32) {
        HELD.with(|h| {
            assert!(
                h.borrow_mut().remove(&(state, v)),
                "unlock of vertex {v} not held by this thread"
            );
        });
    }

    pub fn assert_none_held(state: usize) {
        HELD.with(|h| {
            let held: Vec<u32> = h
                .borrow()
                .iter()
                .filter(|&&(s, _)| s == state)
                .map(|&(_, v)| v)
                .collect();
            assert!(held.is_empty(), "locks leaked: {held:?}");
        });
    }
}

impl MaintState {
    pub fn try_lock(&self, v: u32) -> bool {
        let ok = self
            .lock_cell(v)
            .compare_exchange(false, true, Acquire, Acquire)
            .is_ok();
        #[cfg(debug_assertions)]
        if ok {
            ledger::acquire(self as *const _ as usize, v);
        } else {
            ledger::assert_not_held(self as *const _ as usize, v);
        }
        ok
    }

    pub fn unlock(&self, v: u32) {
        #[cfg(debug_assertions)]
        ledger::release(self as *const _ as usize, v);
        self.lock_cell(v).store(false, Release);
    }

    pub fn is_locked(&self, v: u32) -> bool {
        self.lock_cell(v).load(SeqCst)
    }

    pub fn lock_blocking(&self, v: u32) {
        let mut spins = 0;
        loop {
            if !self.is_locked(v) && self.try_lock(v) {
                return;
            }
            backoff(&mut spins);
        }
    }

    /// Debug hook: asserts this thread holds no vertex locks of this state.
    pub fn debug_assert_no_locks_held(&self) {
        #[cfg(debug_assertions)]
        ledger::assert_none_held(self as *const _ as usize);
    }
}

/// Acquires `x` only while `c` holds: the condition is checked before the
/// compare-and-exchange and again after it, and the lock is dropped (with a
/// `false` return) if the condition no longer holds. Returns `false` without
/// blocking further as soon as `c` is observed false.
pub fn cond_lock<F: Fn() -> bool>(st: &MaintState, x: u32, c: F) -> bool {
    let mut spins = 0;
    while c() {
        if !st.is_locked(x) && st.try_lock(x) {
            if c() {
                return true;
            }
            st.unlock(x);
            return false;
        }
        backoff(&mut spins);
    }
    false
}

/// Locks `u` and `v` together: the lower id first, then a try-acquire of the
/// second, releasing and retrying on failure so no two workers can hold one
/// each of the same pair.
pub fn lock_pair(st: &MaintState, u: u32, v: u32) {
    debug_assert_ne!(u, v);
    let (a, b) = (u.min(v), u.max(v));
    let mut spins = 0;
    loop {
        st.lock_blocking(a);
        if st.try_lock(b) {
            return;
        }
        st.unlock(a);
        backoff(&mut spins);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::state::init_state;
    use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
    use std::sync::mpsc;
    use std::sync::Barrier;
    use std::time::Duration;

    fn small_state(n: usize) -> MaintState {
        init_state(Graph::new(n))
    }

    #[test]
    fn cond_lock_false_condition() {
        let st = small_state(2);
        assert!(!cond_lock(&st, 0, || false));
        assert!(!st.is_locked(0));
    }

    #[test]
    fn cond_lock_stable_true() {
        let st = small_state(2);
        assert!(cond_lock(&st, 0, || true));
        assert!(st.is_locked(0));
        st.unlock(0);
    }

    #[test]
    fn cond_lock_contender_sees_flip() {
        // holder flips the condition false, then releases; the contender
        // must come back with false and no lock held
        let st = small_state(1);
        let flag = AtomicBool::new(true);
        let barrier = Barrier::new(2);
        std::thread::scope(|s| {
            s.spawn(|| {
                st.lock_blocking(0);
                barrier.wait(); // contender starts spinning now
                std::thread::sleep(Duration::from_millis(20));
                flag.store(false, Ordering::SeqCst);
                st.unlock(0);
            });
            s.spawn(|| {
                barrier.wait();
                let got = cond_lock(&st, 0, || flag.load(Ordering::SeqCst));
                assert!(!got);
                assert!(!flag.load(Ordering::SeqCst));
            });
        });
        assert!(!st.is_locked(0));
    }

    #[test]
    fn lock_pair_opposite_orders_no_deadlock() {
        let st = small_state(2);
        let (tx, rx) = mpsc::channel();
        std::thread::scope(|s| {
            for flip in [false, true] {
                let tx = tx.clone();
                let st = &st;
                s.spawn(move || {
                    for _ in 0..2_000 {
                        let (u, v) = if flip { (1, 0) } else { (0, 1) };
                        lock_pair(st, u, v);
                        st.unlock(u);
                        st.unlock(v);
                    }
                    tx.send(()).unwrap();
                });
            }
            for _ in 0..2 {
                rx.recv_timeout(Duration::from_secs(30))
                    .expect("pair-locking deadlocked");
            }
        });
    }

    #[test]
    fn disjoint_pairs_all_proceed() {
        let st = small_state(16);
        let done = AtomicUsize::new(0);
        std::thread::scope(|s| {
            for i in 0..8u32 {
                let st = &st;
                let done = &done;
                s.spawn(move || {
                    lock_pair(st, 2 * i, 2 * i + 1);
                    done.fetch_add(1, Ordering::SeqCst);
                    st.unlock(2 * i);
                    st.unlock(2 * i + 1);
                });
            }
        });
        assert_eq!(done.load(Ordering::SeqCst), 8);
    }

    #[test]
    #[should_panic(expected = "re-entrant lock")]
    #[cfg(debug_assertions)]
    fn reentrant_lock_panics_in_debug() {
        let st = small_state(1);
        assert!(st.try_lock(0));
        let _ = st.try_lock(0);
    }
}
