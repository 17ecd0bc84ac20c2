//! Fully associative multi-core LRU cache simulator.

mod lru;
mod reuse;
mod sim;
mod trace;

pub use lru::{Evicted, LruCache};
pub use reuse::{histogram_of_lines, reuse_distance_histogram, ReuseHistogram};
pub use sim::{simulate, BoundaryTraffic, SimConfig, Simulator, TrafficReport};
pub use trace::{
    Access, AccessKind, AccessTrace, AddressMap, TraceSource, PAGE_BYTES, TRACE_MAGIC,
    TRACE_VERSION,
};
