//! Mutable undirected simple-graph storage with edge-list ingestion and
//! batch sampling.
//!
//! Adjacency is a dynamic array per vertex; removal is a scan plus
//! swap-remove, so neighbor order is not meaningful. The structure itself
//! does no vertex-level locking: concurrent mutators must hold the vertex
//! locks of both endpoints (see the maintenance modules). Each adjacency
//! list sits behind its own mutex so that `&self` mutation is sound.

use std::collections::{HashMap, HashSet};
use std::io::BufRead;
use std::sync::atomic::{AtomicUsize, Ordering};

use parking_lot::Mutex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("vertex id {id} out of range (n = {n})")]
    OutOfRange { id: u32, n: usize },
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected {expected} integer fields, got {got}")]
    FieldCount {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("line {line}: malformed integer `{token}`")]
    BadInt { line: usize, token: String },
}

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("requested {count} edges but graph has only {m}")]
    CountExceedsEdges { count: usize, m: usize },
    #[error("temporal-suffix sampling requires a graph loaded with timestamps")]
    NoTimestamps,
}

/// Undirected simple graph over dense vertex ids `0..n`.
pub struct Graph {
    adj: Vec<Mutex<Vec<u32>>>,
    m: AtomicUsize,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph {
            adj: (0..n).map(|_| Mutex::new(Vec::new())).collect(),
            m: AtomicUsize::new(0),
        }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    /// Current number of (undirected) edges.
    pub fn m(&self) -> usize {
        self.m.load(Ordering::SeqCst)
    }

    fn check(&self, v: u32) -> Result<(), GraphError> {
        if (v as usize) < self.adj.len() {
            Ok(())
        } else {
            Err(GraphError::OutOfRange {
                id: v,
                n: self.adj.len(),
            })
        }
    }

    /// Inserts `(u, v)` into both adjacency lists. Returns `false` (leaving
    /// the graph unchanged) if the edge is already present or `u == v`.
    pub fn add_edge(&self, u: u32, v: u32) -> Result<bool, GraphError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Ok(false);
        }
        let (a, b) = (u.min(v), u.max(v));
        let mut la = self.adj[a as usize].lock();
        let mut lb = self.adj[b as usize].lock();
        if la.contains(&b) {
            return Ok(false);
        }
        la.push(b);
        lb.push(a);
        self.m.fetch_add(1, Ordering::SeqCst);
        Ok(true)
    }

    /// Deletes `(u, v)` from both adjacency lists via swap-remove.
    /// Returns `false` if the edge is absent.
    pub fn remove_edge(&self, u: u32, v: u32) -> Result<bool, GraphError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Ok(false);
        }
        let (a, b) = (u.min(v), u.max(v));
        let mut la = self.adj[a as usize].lock();
        let mut lb = self.adj[b as usize].lock();
        let Some(pa) = la.iter().position(|&x| x == b) else {
            return Ok(false);
        };
        la.swap_remove(pa);
        let pb = lb
            .iter()
            .position(|&x| x == a)
            .expect("adjacency symmetry");
        lb.swap_remove(pb);
        self.m.fetch_sub(1, Ordering::SeqCst);
        Ok(true)
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        if u == v || u as usize >= self.n() || v as usize >= self.n() {
            return false;
        }
        self.adj[u as usize].lock().contains(&v)
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].lock().len()
    }

    /// Copies `v`'s neighbor list into `out` (cleared first).
    pub fn copy_neighbors(&self, v: u32, out: &mut Vec<u32>) {
        out.clear();
        out.extend_from_slice(&self.adj[v as usize].lock());
    }

    pub fn neighbors(&self, v: u32) -> Vec<u32> {
        self.adj[v as usize].lock().clone()
    }

    /// All edges as `(u, v)` pairs with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.m());
        for u in 0..self.n() as u32 {
            for &v in self.adj[u as usize].lock().iter() {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Deep copy, used to isolate benchmark repetitions.
    pub fn clone_graph(&self) -> Graph {
        Graph {
            adj: self
                .adj
                .iter()
                .map(|l| Mutex::new(l.lock().clone()))
                .collect(),
            m: AtomicUsize::new(self.m()),
        }
    }

    /// Full-scan consistency check: symmetry, simplicity, and the edge count.
    pub fn audit(&self) -> Result<(), String> {
        let mut half = 0usize;
        for u in 0..self.n() as u32 {
            let lu = self.adj[u as usize].lock().clone();
            let mut seen = HashSet::new();
            for &v in &lu {
                if v == u {
                    return Err(format!("self-loop at {u}"));
                }
                if v as usize >= self.n() {
                    return Err(format!("dangling neighbor {v} of {u}"));
                }
                if !seen.insert(v) {
                    return Err(format!("duplicate edge ({u},{v})"));
                }
                if !self.adj[v as usize].lock().contains(&u) {
                    return Err(format!("asymmetric edge ({u},{v})"));
                }
            }
            half += lu.len();
        }
        if half != 2 * self.m() {
            return Err(format!("m = {} but degree sum = {half}", self.m()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeListFormat {
    /// One edge per line: `u v`.
    Static,
    /// One edge per line with a timestamp column: `u v ts`.
    Temporal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchKind {
    Insert,
    Remove,
}

/// A batch of unordered edge pairs destined for one parallel apply.
#[derive(Debug, Clone)]
pub struct EdgeBatch {
    pub edges: Vec<(u32, u32)>,
    pub kind: BatchKind,
}

impl EdgeBatch {
    pub fn new(edges: Vec<(u32, u32)>, kind: BatchKind) -> Self {
        EdgeBatch { edges, kind }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Same edges, flipped direction of application.
    pub fn with_kind(&self, kind: BatchKind) -> EdgeBatch {
        EdgeBatch {
            edges: self.edges.clone(),
            kind,
        }
    }
}

/// A graph plus the id remapping (and timestamps) recorded at load time.
pub struct LoadedGraph {
    pub graph: Graph,
    /// `id_map[internal] = external`, in first-seen order.
    pub id_map: Vec<u64>,
    /// Per retained edge `(u, v, ts)`, first occurrence wins. Present only
    /// for the temporal format.
    pub timestamps: Option<Vec<(u32, u32, u64)>>,
}

impl LoadedGraph {
    /// Wraps an in-memory graph with an identity id map (generators, tests).
    pub fn from_graph(graph: Graph) -> Self {
        let n = graph.n();
        LoadedGraph {
            graph,
            id_map: (0..n as u64).collect(),
            timestamps: None,
        }
    }

    pub fn write_id_map<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "external_id,internal_id")?;
        for (internal, external) in self.id_map.iter().enumerate() {
            writeln!(w, "{external},{internal}")?;
        }
        Ok(())
    }
}

/// Parses a whitespace-separated edge list. Lines starting with `#` or `%`
/// are ignored; external ids are remapped to dense `0..n` in first-seen
/// order; self-loops and duplicate edges are dropped.
pub fn load_edge_list<R: BufRead>(
    reader: R,
    format: EdgeListFormat,
) -> Result<LoadedGraph, LoadError> {
    let expected = match format {
        EdgeListFormat::Static => 2,
        EdgeListFormat::Temporal => 3,
    };
    let mut extern_to_dense: HashMap<u64, u32> = HashMap::new();
    let mut id_map: Vec<u64> = Vec::new();
    let mut seen: HashSet<u64> = HashSet::new();
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    let mut stamps: Vec<(u32, u32, u64)> = Vec::new();

    let dense = |ext: u64, map: &mut HashMap<u64, u32>, ids: &mut Vec<u64>| -> u32 {
        *map.entry(ext).or_insert_with(|| {
            ids.push(ext);
            (ids.len() - 1) as u32
        })
    };

    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        if fields.len() != expected {
            return Err(LoadError::FieldCount {
                line: idx + 1,
                expected,
                got: fields.len(),
            });
        }
        let parse = |tok: &str| -> Result<u64, LoadError> {
            tok.parse::<u64>().map_err(|_| LoadError::BadInt {
                line: idx + 1,
                token: tok.to_string(),
            })
        };
        let eu = parse(fields[0])?;
        let ev = parse(fields[1])?;
        let u = dense(eu, &mut extern_to_dense, &mut id_map);
        let v = dense(ev, &mut extern_to_dense, &mut id_map);
        if u == v {
            continue;
        }
        let key = ((u.min(v) as u64) << 32) | u.max(v) as u64;
        if !seen.insert(key) {
            continue;
        }
        pairs.push((u, v));
        if format == EdgeListFormat::Temporal {
            stamps.push((u, v, parse(fields[2])?));
        }
    }

    let graph = Graph::new(id_map.len());
    for &(u, v) in &pairs {
        let added = graph.add_edge(u, v).expect("ids are dense");
        debug_assert!(added);
    }
    Ok(LoadedGraph {
        graph,
        id_map,
        timestamps: (format == EdgeListFormat::Temporal).then_some(stamps),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMode {
    /// Distinct existing edges drawn uniformly.
    Uniform,
    /// The `count` latest-timestamped edges (requires the temporal loader).
    TemporalSuffix,
}

/// Draws `count` distinct existing edges. Deterministic for a fixed seed.
/// The returned batch has `kind = Remove` since every edge is present;
/// callers re-kind it for re-insertion.
pub fn sample_batch(
    loaded: &LoadedGraph,
    count: usize,
    mode: SampleMode,
    seed: u64,
) -> Result<EdgeBatch, SampleError> {
    let m = loaded.graph.m();
    if count > m {
        return Err(SampleError::CountExceedsEdges { count, m });
    }
    let edges = match mode {
        SampleMode::Uniform => {
            let all = loaded.graph.edges();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rand::seq::index::sample(&mut rng, all.len(), count)
                .into_iter()
                .map(|i| all[i])
                .collect()
        }
        SampleMode::TemporalSuffix => {
            let Some(stamps) = &loaded.timestamps else {
                return Err(SampleError::NoTimestamps);
            };
            let mut by_ts: Vec<(u32, u32, u64)> = stamps.clone();
            by_ts.sort_by_key(|&(u, v, ts)| (ts, u, v));
            by_ts
                .iter()
                .rev()
                .take(count)
                .map(|&(u, v, _)| (u, v))
                .collect()
        }
    };
    Ok(EdgeBatch::new(edges, BatchKind::Remove))
}
