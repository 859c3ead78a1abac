//! Quiescent-state verification: core numbers against a fresh peeling run,
//! order validity, max-core-degree consistency, status quiescence, and a
//! structural audit of every order list. Failures are verdicts, not panics.

use crate::bz::bz_decompose;
use crate::state::MaintState;

#[derive(Debug, Clone)]
pub struct Verdicts {
    /// (a) every core equals the peeling oracle on the current graph
    pub core_ok: bool,
    /// (b) recounted out-neighbors-after equal the stored counter and never
    /// exceed the core; counters sum to m
    pub order_ok: bool,
    /// (c) every known max-core degree matches its definition and is >= core
    pub mcd_ok: bool,
    /// (d) status counters even, removal status zero, no locks held,
    /// candidate in-degrees zero
    pub quiescent_ok: bool,
    /// (e) order lists structurally sound and partitioning the vertices by
    /// core value
    pub om_ok: bool,
    pub failures: Vec<String>,
}

impl Verdicts {
    pub fn all_ok(&self) -> bool {
        self.core_ok && self.order_ok && self.mcd_ok && self.quiescent_ok && self.om_ok
    }
}

pub fn verify(st: &MaintState) -> Verdicts {
    let n = st.n();
    let mut failures = Vec::new();

    let expect = bz_decompose(st.graph()).core;
    let mut core_ok = true;
    for v in 0..n as u32 {
        if st.core(v) != expect[v as usize] {
            core_ok = false;
            failures.push(format!(
                "core: vertex {v} has {} but decomposition says {}",
                st.core(v),
                expect[v as usize]
            ));
            break;
        }
    }

    let mut order_ok = true;
    let mut buf = Vec::new();
    let mut sum = 0u64;
    for v in 0..n as u32 {
        st.graph().copy_neighbors(v, &mut buf);
        let recount = buf.iter().filter(|&&w| st.precedes_now(v, w)).count() as u32;
        sum += recount as u64;
        if recount != st.deg_out(v) {
            order_ok = false;
            failures.push(format!(
                "order: vertex {v} stores deg_out {} but recount gives {recount}",
                st.deg_out(v)
            ));
            break;
        }
        if recount > st.core(v) {
            order_ok = false;
            failures.push(format!(
                "order: vertex {v} has deg_out {recount} above core {}",
                st.core(v)
            ));
            break;
        }
    }
    if order_ok && sum != st.graph().m() as u64 {
        order_ok = false;
        failures.push(format!(
            "order: deg_out sums to {sum}, expected m = {}",
            st.graph().m()
        ));
    }

    let mut mcd_ok = true;
    for v in 0..n as u32 {
        if let Some(m) = st.mcd(v) {
            let actual = st.count_mcd_now(v, &mut buf);
            if m != actual {
                mcd_ok = false;
                failures.push(format!(
                    "mcd: vertex {v} caches {m} but definition gives {actual}"
                ));
                break;
            }
            if m < st.core(v) {
                mcd_ok = false;
                failures.push(format!(
                    "mcd: vertex {v} has mcd {m} below core {}",
                    st.core(v)
                ));
                break;
            }
        }
    }

    let mut quiescent_ok = true;
    for v in 0..n as u32 {
        if st.s(v) % 2 != 0 || st.t(v) != 0 || st.is_locked(v) || st.deg_in(v) != 0 {
            quiescent_ok = false;
            failures.push(format!(
                "quiescence: vertex {v} has s={} t={} locked={} deg_in={}",
                st.s(v),
                st.t(v),
                st.is_locked(v),
                st.deg_in(v)
            ));
            break;
        }
    }

    let mut om_ok = true;
    let mut seen = vec![false; n];
    let mut total = 0usize;
    for k in 0..(n as u32 + 2) {
        let Some(list) = st.order_list_if_built(k) else {
            continue;
        };
        match list.audit(st.pool()) {
            Ok(cnt) => total += cnt,
            Err(e) => {
                om_ok = false;
                failures.push(format!("om: list k={k}: {e}"));
                continue;
            }
        }
        for v in list.collect(st.pool()) {
            if st.core(v) != k {
                om_ok = false;
                failures.push(format!(
                    "om: vertex {v} sits in list k={k} but has core {}",
                    st.core(v)
                ));
                break;
            }
            if seen[v as usize] {
                om_ok = false;
                failures.push(format!("om: vertex {v} appears in two lists"));
                break;
            }
            seen[v as usize] = true;
        }
    }
    if om_ok && total != n {
        om_ok = false;
        failures.push(format!("om: lists hold {total} vertices, expected {n}"));
    }

    Verdicts {
        core_ok,
        order_ok,
        mcd_ok,
        quiescent_ok,
        om_ok,
        failures,
    }
}
