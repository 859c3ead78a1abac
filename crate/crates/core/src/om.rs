//! Two-level order-maintenance lists.
//!
//! Each core value owns one [`OrderList`]: a doubly-linked sequence of
//! groups, each holding a bounded chain of entries. A group carries a top
//! label, an entry a bottom label; an entry additionally caches its group's
//! top label so that order queries read entry state only. `x` precedes `y`
//! iff `(top(x), bot(x)) < (top(y), bot(y))` lexicographically.
//!
//! Order queries take no locks: they read the label atomics and validate
//! against the list's relabel version/counter, retrying if a relabel was in
//! flight. Structural mutation (insert, delete, relabel) serializes on the
//! list's mutex. When an insert finds no bottom-label gap, the relabel
//! process runs: the group splits when full (new groups get at most half the
//! capacity), the top labels rebalance by walking successor groups until the
//! label gap exceeds the square of the walk length and re-gapping the walked
//! groups, and bottom labels redistribute uniformly. `ver` is incremented
//! before and after each relabel, so an odd value marks one in flight; `cnt`
//! counts workers inside a relabel and is what the priority-queue refresh
//! polls before trusting a label scan.

use std::sync::atomic::{AtomicU32, AtomicU64, Ordering::SeqCst};

use parking_lot::{Mutex, MutexGuard};

pub const NIL: u32 = u32::MAX;

/// Top labels live in `[0, N^2]`, bottom labels in `[0, N]`, for a
/// configured item bound of `N = 2^31`.
const TOP_SPACE: u64 = 1 << 62;
const BOT_SPACE: u64 = 1 << 31;
/// Fixed top-label stride for groups split off the tail; a midpoint toward
/// the space end would burn the right edge exponentially and starve the
/// forward rebalance walk.
const TAIL_GAP: u64 = 1 << 31;

/// Per-entry label and link storage, indexed by vertex id. A vertex belongs
/// to at most one list at a time; links are meaningful only under the owning
/// list's mutex, labels are readable by anyone.
pub struct EntryPool {
    top: Vec<AtomicU64>,
    bot: Vec<AtomicU64>,
    grp: Vec<AtomicU32>,
    prev: Vec<AtomicU32>,
    next: Vec<AtomicU32>,
    capacity: u32,
}

impl EntryPool {
    pub fn new(n: usize) -> Self {
        // group capacity: ceil(log2 n), floored at 4
        let bound = n.max(2) as u64;
        let capacity = (64 - (bound - 1).leading_zeros()).max(4);
        EntryPool {
            top: (0..n).map(|_| AtomicU64::new(0)).collect(),
            bot: (0..n).map(|_| AtomicU64::new(0)).collect(),
            grp: (0..n).map(|_| AtomicU32::new(NIL)).collect(),
            prev: (0..n).map(|_| AtomicU32::new(NIL)).collect(),
            next: (0..n).map(|_| AtomicU32::new(NIL)).collect(),
            capacity,
        }
    }

    pub fn len(&self) -> usize {
        self.top.len()
    }

    pub fn is_empty(&self) -> bool {
        self.top.is_empty()
    }

    pub fn group_capacity(&self) -> u32 {
        self.capacity
    }

    /// Raw `(top, bottom)` label snapshot; callers are responsible for
    /// validating against the list version.
    pub fn label_key(&self, v: u32) -> (u64, u64) {
        (
            self.top[v as usize].load(SeqCst),
            self.bot[v as usize].load(SeqCst),
        )
    }

    pub fn in_some_list(&self, v: u32) -> bool {
        self.grp[v as usize].load(SeqCst) != NIL
    }
}

struct Group {
    label: u64,
    first: u32,
    last: u32,
    count: u32,
    prev: u32,
    next: u32,
}

struct ListCore {
    groups: Vec<Group>,
    free: Vec<u32>,
    head: u32,
    tail: u32,
    len: usize,
}

impl ListCore {
    fn alloc(&mut self, label: u64, prev: u32, next: u32) -> u32 {
        let g = Group {
            label,
            first: NIL,
            last: NIL,
            count: 0,
            prev,
            next,
        };
        if let Some(id) = self.free.pop() {
            self.groups[id as usize] = g;
            id
        } else {
            self.groups.push(g);
            (self.groups.len() - 1) as u32
        }
    }
}

/// One ordered sequence (the vertices of a single core value).
pub struct OrderList {
    k: u32,
    ver: AtomicU64,
    cnt: AtomicU64,
    moved: AtomicU64,
    inner: Mutex<ListCore>,
}

impl OrderList {
    pub fn new(k: u32) -> Self {
        OrderList {
            k,
            ver: AtomicU64::new(0),
            cnt: AtomicU64::new(0),
            moved: AtomicU64::new(0),
            inner: Mutex::new(ListCore {
                groups: Vec::new(),
                free: Vec::new(),
                head: NIL,
                tail: NIL,
                len: 0,
            }),
        }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn ver(&self) -> u64 {
        self.ver.load(SeqCst)
    }

    pub fn cnt(&self) -> u64 {
        self.cnt.load(SeqCst)
    }

    /// Total entries repositioned by relabels so far (amortized-cost probe).
    pub fn moved_entries(&self) -> u64 {
        self.moved.load(SeqCst)
    }

    pub fn len(&self) -> usize {
        self.inner.lock().len
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// True iff `x` precedes `y`. Lock-free: label reads are validated
    /// against the relabel version so a torn snapshot is retried. Both
    /// entries must be members of this list; the result for an entry whose
    /// membership changes mid-call is the caller's problem (the maintenance
    /// layer revalidates through the vertex status counters).
    pub fn order(&self, pool: &EntryPool, x: u32, y: u32) -> bool {
        if x == y {
            return false;
        }
        let mut spins = 0u32;
        loop {
            let v0 = self.ver.load(SeqCst);
            if self.cnt.load(SeqCst) != 0 || v0 & 1 == 1 {
                crate::lock::backoff(&mut spins);
                continue;
            }
            let kx = pool.label_key(x);
            let ky = pool.label_key(y);
            if self.ver.load(SeqCst) == v0 && self.cnt.load(SeqCst) == 0 {
                return kx < ky;
            }
            crate::lock::backoff(&mut spins);
        }
    }

    pub fn lock(&self) -> OmGuard<'_> {
        OmGuard {
            list: self,
            core: self.inner.lock(),
        }
    }

    pub fn insert_head(&self, pool: &EntryPool, y: u32) {
        self.lock().insert_head(pool, y);
    }

    pub fn insert_tail(&self, pool: &EntryPool, y: u32) {
        self.lock().insert_tail(pool, y);
    }

    pub fn insert_after(&self, pool: &EntryPool, x: u32, y: u32) {
        self.lock().insert_after(pool, x, y);
    }

    pub fn delete(&self, pool: &EntryPool, x: u32) {
        self.lock().delete(pool, x);
    }

    /// Bulk construction from an already-ordered slice (initialization).
    pub fn build(&self, pool: &EntryPool, items: &[u32]) {
        let mut g = self.lock();
        assert_eq!(g.core.len, 0, "build on non-empty list");
        if items.is_empty() {
            return;
        }
        let chunk = (pool.capacity as usize + 1) / 2;
        let n_groups = items.len().div_ceil(chunk);
        // spread over the lower half of the space so tail appends keep room
        let top_gap = (TOP_SPACE / 2) / (n_groups as u64 + 1);
        let mut prev_gid = NIL;
        for (gi, part) in items.chunks(chunk).enumerate() {
            let label = (gi as u64 + 1) * top_gap;
            let gid = g.core.alloc(label, prev_gid, NIL);
            if prev_gid == NIL {
                g.core.head = gid;
            } else {
                g.core.groups[prev_gid as usize].next = gid;
            }
            g.core.groups[gid as usize].count = part.len() as u32;
            g.core.groups[gid as usize].first = part[0];
            g.core.groups[gid as usize].last = *part.last().unwrap();
            let bot_gap = BOT_SPACE / (part.len() as u64 + 1);
            for (i, &v) in part.iter().enumerate() {
                pool.top[v as usize].store(label, SeqCst);
                pool.bot[v as usize].store((i as u64 + 1) * bot_gap, SeqCst);
                pool.grp[v as usize].store(gid, SeqCst);
                pool.prev[v as usize].store(if i == 0 { NIL } else { part[i - 1] }, SeqCst);
                pool.next[v as usize]
                    .store(if i + 1 == part.len() { NIL } else { part[i + 1] }, SeqCst);
            }
            prev_gid = gid;
        }
        g.core.tail = prev_gid;
        g.core.len = items.len();
    }

    /// Members in order; takes the list lock.
    pub fn collect(&self, pool: &EntryPool) -> Vec<u32> {
        let g = self.lock();
        let mut out = Vec::with_capacity(g.core.len);
        let mut gid = g.core.head;
        while gid != NIL {
            let grp = &g.core.groups[gid as usize];
            let mut e = grp.first;
            while e != NIL {
                out.push(e);
                e = pool.next[e as usize].load(SeqCst);
            }
            gid = grp.next;
        }
        out
    }

    /// Structural audit: label monotonicity, capacity bounds, link and count
    /// consistency, cached top labels. Returns the member count.
    pub fn audit(&self, pool: &EntryPool) -> Result<usize, String> {
        let g = self.lock();
        if self.ver.load(SeqCst) & 1 == 1 || self.cnt.load(SeqCst) != 0 {
            return Err(format!("list k={}: relabel marked in flight at rest", self.k));
        }
        let mut total = 0usize;
        let mut gid = g.core.head;
        let mut prev_gid = NIL;
        let mut last_top: Option<u64> = None;
        while gid != NIL {
            let grp = &g.core.groups[gid as usize];
            if grp.prev != prev_gid {
                return Err(format!("group {gid}: bad prev link"));
            }
            if let Some(t) = last_top {
                if grp.label <= t {
                    return Err(format!("group {gid}: top label not increasing"));
                }
            }
            if grp.label > TOP_SPACE {
                return Err(format!("group {gid}: top label out of range"));
            }
            last_top = Some(grp.label);
            if grp.count == 0 || grp.count > pool.capacity {
                return Err(format!(
                    "group {gid}: count {} outside (0, {}]",
                    grp.count, pool.capacity
                ));
            }
            let mut e = grp.first;
            let mut prev_e = NIL;
            let mut cnt = 0u32;
            let mut last_bot: Option<u64> = None;
            while e != NIL {
                if pool.grp[e as usize].load(SeqCst) != gid {
                    return Err(format!("entry {e}: group backref mismatch"));
                }
                if pool.top[e as usize].load(SeqCst) != grp.label {
                    return Err(format!("entry {e}: cached top label stale"));
                }
                if pool.prev[e as usize].load(SeqCst) != prev_e {
                    return Err(format!("entry {e}: bad prev link"));
                }
                let b = pool.bot[e as usize].load(SeqCst);
                if let Some(lb) = last_bot {
                    if b <= lb {
                        return Err(format!("entry {e}: bottom label not increasing"));
                    }
                }
                if b > BOT_SPACE {
                    return Err(format!("entry {e}: bottom label out of range"));
                }
                last_bot = Some(b);
                prev_e = e;
                e = pool.next[e as usize].load(SeqCst);
                cnt += 1;
            }
            if prev_e != grp.last || cnt != grp.count {
                return Err(format!("group {gid}: member chain inconsistent"));
            }
            total += cnt as usize;
            prev_gid = gid;
            gid = grp.next;
        }
        if prev_gid != g.core.tail {
            return Err("tail link mismatch".into());
        }
        if total != g.core.len {
            return Err(format!("len {} but {} members found", g.core.len, total));
        }
        Ok(total)
    }
}

/// Mutation handle; holds the list mutex so a caller can perform several
/// inserts as one critical section.
pub struct OmGuard<'a> {
    list: &'a OrderList,
    core: MutexGuard<'a, ListCore>,
}

impl<'a> OmGuard<'a> {
    fn relabel_begin(&self) {
        self.list.cnt.fetch_add(1, SeqCst);
        self.list.ver.fetch_add(1, SeqCst);
    }

    fn relabel_end(&self) {
        self.list.ver.fetch_add(1, SeqCst);
        self.list.cnt.fetch_sub(1, SeqCst);
    }

    /// Uniformly respaces the bottom labels of `gid`'s members.
    fn respace_bots(&mut self, pool: &EntryPool, gid: u32) {
        let grp = &self.core.groups[gid as usize];
        let count = grp.count as u64;
        let gap = BOT_SPACE / (count + 1);
        let mut e = grp.first;
        let mut i = 1u64;
        while e != NIL {
            pool.bot[e as usize].store(i * gap, SeqCst);
            e = pool.next[e as usize].load(SeqCst);
            i += 1;
        }
        self.list.moved.fetch_add(count, SeqCst);
    }

    /// Walks successors of `gid` until the top-label gap exceeds the square
    /// of the walk length, then re-gaps the walked groups (gap = walk
    /// length). Guarantees a gap of at least 2 after `gid`.
    fn rebalance_tops(&mut self, pool: &EntryPool, gid: u32) {
        let base = self.core.groups[gid as usize].label;
        let mut walked: Vec<u32> = Vec::new();
        let mut cur = self.core.groups[gid as usize].next;
        let mut j: u64 = 0;
        loop {
            j += 1;
            let bound = if cur == NIL {
                TOP_SPACE
            } else {
                self.core.groups[cur as usize].label
            };
            if bound - base > j * j {
                break;
            }
            if cur == NIL {
                panic!("order-maintenance top-label space exhausted (k = {})", self.list.k);
            }
            walked.push(cur);
            cur = self.core.groups[cur as usize].next;
        }
        for (i, &g2) in walked.iter().enumerate() {
            let label = base + (i as u64 + 1) * j;
            self.core.groups[g2 as usize].label = label;
            let mut e = self.core.groups[g2 as usize].first;
            let mut cnt = 0u64;
            while e != NIL {
                pool.top[e as usize].store(label, SeqCst);
                e = pool.next[e as usize].load(SeqCst);
                cnt += 1;
            }
            self.list.moved.fetch_add(cnt, SeqCst);
        }
    }

    /// Splits a full group: the first half stays, the rest moves to a fresh
    /// group inserted right after (rebalancing top labels if there is no
    /// room). Bottom labels are respaced in both halves.
    fn split(&mut self, pool: &EntryPool, gid: u32) {
        self.relabel_begin();
        let keep = (pool.capacity as usize + 1) / 2;

        let mut members = Vec::with_capacity(self.core.groups[gid as usize].count as usize);
        let mut e = self.core.groups[gid as usize].first;
        while e != NIL {
            members.push(e);
            e = pool.next[e as usize].load(SeqCst);
        }
        debug_assert!(members.len() > keep);

        let base = self.core.groups[gid as usize].label;
        let mut next_gid = self.core.groups[gid as usize].next;
        let new_label = if next_gid == NIL {
            let stride = TAIL_GAP.min((TOP_SPACE - base) / 2);
            if stride == 0 {
                panic!(
                    "order-maintenance top-label space exhausted (k = {})",
                    self.list.k
                );
            }
            base + stride
        } else {
            if self.core.groups[next_gid as usize].label - base < 2 {
                self.rebalance_tops(pool, gid);
                next_gid = self.core.groups[gid as usize].next;
            }
            let bound = if next_gid == NIL {
                TOP_SPACE
            } else {
                self.core.groups[next_gid as usize].label
            };
            debug_assert!(bound - base >= 2);
            base + (bound - base) / 2
        };

        let ng = self.core.alloc(new_label, gid, next_gid);
        self.core.groups[gid as usize].next = ng;
        if next_gid == NIL {
            self.core.tail = ng;
        } else {
            self.core.groups[next_gid as usize].prev = ng;
        }

        let (stay, moved) = members.split_at(keep);
        {
            let g = &mut self.core.groups[gid as usize];
            g.count = stay.len() as u32;
            g.last = *stay.last().unwrap();
        }
        pool.next[*stay.last().unwrap() as usize].store(NIL, SeqCst);
        {
            let g = &mut self.core.groups[ng as usize];
            g.count = moved.len() as u32;
            g.first = moved[0];
            g.last = *moved.last().unwrap();
        }
        pool.prev[moved[0] as usize].store(NIL, SeqCst);
        for &v in moved {
            pool.grp[v as usize].store(ng, SeqCst);
            pool.top[v as usize].store(new_label, SeqCst);
        }
        self.list.moved.fetch_add(moved.len() as u64, SeqCst);
        self.respace_bots(pool, gid);
        self.respace_bots(pool, ng);
        self.relabel_end();
    }

    /// Links `y` between `before` and `after` within group `gid` and assigns
    /// it the bottom label `label`.
    fn link(&mut self, pool: &EntryPool, gid: u32, before: u32, after: u32, y: u32, label: u64) {
        pool.grp[y as usize].store(gid, SeqCst);
        pool.top[y as usize].store(self.core.groups[gid as usize].label, SeqCst);
        pool.bot[y as usize].store(label, SeqCst);
        pool.prev[y as usize].store(before, SeqCst);
        pool.next[y as usize].store(after, SeqCst);
        if before == NIL {
            self.core.groups[gid as usize].first = y;
        } else {
            pool.next[before as usize].store(y, SeqCst);
        }
        if after == NIL {
            self.core.groups[gid as usize].last = y;
        } else {
            pool.prev[after as usize].store(y, SeqCst);
        }
        self.core.groups[gid as usize].count += 1;
        self.core.len += 1;
    }

    fn insert_edge_of_group(&mut self, pool: &EntryPool, y: u32, at_head: bool) {
        debug_assert!(!pool.in_some_list(y), "entry {y} already in a list");
        if self.core.len == 0 {
            let gid = self.core.alloc(TOP_SPACE / 2, NIL, NIL);
            self.core.head = gid;
            self.core.tail = gid;
            self.link(pool, gid, NIL, NIL, y, BOT_SPACE / 2);
            return;
        }
        let gid = if at_head { self.core.head } else { self.core.tail };
        if self.core.groups[gid as usize].count >= pool.capacity {
            self.split(pool, gid);
        }
        // after a head split the head group is unchanged; after a tail split
        // the tail group is the new one
        let gid = if at_head { self.core.head } else { self.core.tail };
        if at_head {
            let first = self.core.groups[gid as usize].first;
            let mut bound = pool.bot[first as usize].load(SeqCst);
            if bound < 2 {
                self.relabel_begin();
                self.respace_bots(pool, gid);
                self.relabel_end();
                bound = pool.bot[first as usize].load(SeqCst);
            }
            self.link(pool, gid, NIL, first, y, bound / 2);
        } else {
            let last = self.core.groups[gid as usize].last;
            let mut lower = pool.bot[last as usize].load(SeqCst);
            if BOT_SPACE - lower < 2 {
                self.relabel_begin();
                self.respace_bots(pool, gid);
                self.relabel_end();
                lower = pool.bot[last as usize].load(SeqCst);
            }
            self.link(pool, gid, last, NIL, y, lower + (BOT_SPACE - lower) / 2);
        }
    }

    /// New first entry.
    pub fn insert_head(&mut self, pool: &EntryPool, y: u32) {
        self.insert_edge_of_group(pool, y, true);
    }

    /// New last entry.
    pub fn insert_tail(&mut self, pool: &EntryPool, y: u32) {
        self.insert_edge_of_group(pool, y, false);
    }

    /// Places `y` immediately after `x`, which must be in this list.
    pub fn insert_after(&mut self, pool: &EntryPool, x: u32, y: u32) {
        debug_assert!(!pool.in_some_list(y), "entry {y} already in a list");
        debug_assert!(pool.in_some_list(x), "anchor {x} not in a list");
        let mut gid = pool.grp[x as usize].load(SeqCst);
        if self.core.groups[gid as usize].count >= pool.capacity {
            self.split(pool, gid);
            gid = pool.grp[x as usize].load(SeqCst);
        }
        let nxt = pool.next[x as usize].load(SeqCst);
        let lower = pool.bot[x as usize].load(SeqCst);
        let upper = if nxt == NIL {
            BOT_SPACE
        } else {
            pool.bot[nxt as usize].load(SeqCst)
        };
        if upper - lower < 2 {
            self.relabel_begin();
            self.respace_bots(pool, gid);
            self.relabel_end();
        }
        let nxt = pool.next[x as usize].load(SeqCst);
        let lower = pool.bot[x as usize].load(SeqCst);
        let upper = if nxt == NIL {
            BOT_SPACE
        } else {
            pool.bot[nxt as usize].load(SeqCst)
        };
        debug_assert!(upper - lower >= 2);
        self.link(pool, gid, x, nxt, y, lower + (upper - lower) / 2);
    }

    /// Unlinks `x`; other labels are untouched. Empty groups are removed
    /// eagerly.
    pub fn delete(&mut self, pool: &EntryPool, x: u32) {
        let gid = pool.grp[x as usize].load(SeqCst);
        debug_assert_ne!(gid, NIL, "delete of entry {x} not in a list");
        let p = pool.prev[x as usize].load(SeqCst);
        let n = pool.next[x as usize].load(SeqCst);
        if p == NIL {
            self.core.groups[gid as usize].first = n;
        } else {
            pool.next[p as usize].store(n, SeqCst);
        }
        if n == NIL {
            self.core.groups[gid as usize].last = p;
        } else {
            pool.prev[n as usize].store(p, SeqCst);
        }
        pool.grp[x as usize].store(NIL, SeqCst);
        pool.prev[x as usize].store(NIL, SeqCst);
        pool.next[x as usize].store(NIL, SeqCst);
        self.core.groups[gid as usize].count -= 1;
        self.core.len -= 1;
        if self.core.groups[gid as usize].count == 0 {
            let gp = self.core.groups[gid as usize].prev;
            let gn = self.core.groups[gid as usize].next;
            if gp == NIL {
                self.core.head = gn;
            } else {
                self.core.groups[gp as usize].next = gn;
            }
            if gn == NIL {
                self.core.tail = gp;
            } else {
                self.core.groups[gn as usize].prev = gp;
            }
            self.core.free.push(gid);
        }
    }
}
