//! Static core decomposition by bucket peeling.
//!
//! Repeatedly removes a minimum-degree vertex; the degree at removal time is
//! its core number. A bucket queue keyed by current degree gives linear time;
//! ties within a bucket resolve FIFO, which fixes one concrete peel order out
//! of the many valid ones. The peel order doubles as the initial vertex order
//! for the maintenance structures, and the whole routine serves as the
//! ground-truth oracle for them.

use std::collections::VecDeque;

use crate::graph::Graph;

#[derive(Debug, Clone)]
pub struct CoreAssignment {
    /// `core[v]` = largest k such that v lies in the k-core.
    pub core: Vec<u32>,
    /// All vertices in dequeue order; core numbers are non-decreasing along it.
    pub peel_order: Vec<u32>,
}

impl CoreAssignment {
    pub fn max_core(&self) -> u32 {
        self.core.iter().copied().max().unwrap_or(0)
    }
}

pub fn bz_decompose(g: &Graph) -> CoreAssignment {
    let n = g.n();
    let mut deg: Vec<u32> = (0..n).map(|v| g.degree(v as u32) as u32).collect();
    let max_deg = deg.iter().copied().max().unwrap_or(0) as usize;
    let mut buckets: Vec<VecDeque<u32>> = vec![VecDeque::new(); max_deg + 1];
    for v in 0..n as u32 {
        buckets[deg[v as usize] as usize].push_back(v);
    }

    let mut core = vec![0u32; n];
    let mut peel_order = Vec::with_capacity(n);
    let mut peeled = vec![false; n];
    let mut scratch = Vec::new();
    let mut d = 0usize;
    while peel_order.len() < n {
        // entries may be stale: a vertex re-enqueues each time its degree drops
        let Some(u) = buckets[d].pop_front() else {
            d += 1;
            continue;
        };
        if peeled[u as usize] || deg[u as usize] as usize != d {
            continue;
        }
        peeled[u as usize] = true;
        core[u as usize] = d as u32;
        peel_order.push(u);
        g.copy_neighbors(u, &mut scratch);
        for &v in &scratch {
            if !peeled[v as usize] && deg[v as usize] as usize > d {
                deg[v as usize] -= 1;
                buckets[deg[v as usize] as usize].push_back(v);
            }
        }
    }
    CoreAssignment { core, peel_order }
}
