//! Dynamic k-core maintenance over streaming edge insertions and removals.
//!
//! The engine keeps every vertex's core number — and a total vertex order
//! consistent with a peeling run — correct while batches of edges are
//! applied by parallel workers. Static decomposition ([`bz_decompose`])
//! initializes the state and serves as the correctness oracle; sequential
//! single-edge maintenance ([`insert_edge_seq`], [`remove_edge_seq`]) is the
//! single-worker reference; the batch-parallel path
//! ([`parallel_insert_batch`], [`parallel_remove_batch`]) synchronizes
//! through per-vertex locks, status counters, and label-versioned priority
//! queues over the order-maintenance lists in [`om`].

pub mod bench;
pub mod bz;
mod ctx;
pub mod gen;
pub mod graph;
mod lock;
pub mod om;
pub mod par;
pub mod pq;
pub mod seq;
pub mod state;
pub mod verify;

pub use bz::{bz_decompose, CoreAssignment};
pub use ctx::{Histogram, WorkerContext};
pub use graph::{
    load_edge_list, sample_batch, BatchKind, EdgeBatch, EdgeListFormat, Graph, LoadedGraph,
    SampleMode,
};
pub use lock::{cond_lock, lock_pair};
pub use par::{
    insert_edge_p, parallel_insert_batch, parallel_order, parallel_remove_batch, remove_edge_p,
    BatchError, BatchOptions, BatchStats, EdgeOutcome,
};
pub use seq::{insert_edge_seq, remove_edge_seq, OpError};
pub use state::{init_state, MaintState};
pub use verify::{verify, Verdicts};
