//! Seeded random-graph generators used by benchmarks and tests.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::Graph;

/// Erdős–Rényi-style G(n, m): `m` distinct edges drawn uniformly.
pub fn erdos_renyi(n: usize, m: usize, seed: u64) -> Graph {
    assert!(n >= 2, "need at least two vertices");
    let max_m = n * (n - 1) / 2;
    assert!(m <= max_m, "m = {m} exceeds simple-graph bound {max_m}");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Graph::new(n);
    let mut seen: HashSet<u64> = HashSet::with_capacity(m * 2);
    while g.m() < m {
        let u = rng.gen_range(0..n as u32);
        let v = rng.gen_range(0..n as u32);
        if u == v {
            continue;
        }
        let key = ((u.min(v) as u64) << 32) | u.max(v) as u64;
        if seen.insert(key) {
            g.add_edge(u, v).unwrap();
        }
    }
    g
}

/// Barabási–Albert preferential attachment: each new vertex attaches
/// `m_per` distinct edges, endpoints drawn degree-proportionally.
pub fn barabasi_albert(n: usize, m_per: usize, seed: u64) -> Graph {
    assert!(m_per >= 1 && n > m_per);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Graph::new(n);
    // endpoint pool: each vertex appears once per incident edge
    let mut pool: Vec<u32> = (0..=m_per as u32).collect();
    for v in 1..=m_per as u32 {
        g.add_edge(0, v).unwrap();
        pool.push(0);
    }
    for v in (m_per + 1) as u32..n as u32 {
        let mut picked: HashSet<u32> = HashSet::with_capacity(m_per);
        while picked.len() < m_per {
            let t = pool[rng.gen_range(0..pool.len())];
            if t != v {
                picked.insert(t);
            }
        }
        for t in picked {
            g.add_edge(v, t).unwrap();
            pool.push(v);
            pool.push(t);
        }
    }
    g
}
