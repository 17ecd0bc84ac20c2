//! LRU stack distances over cache lines.

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;
use serde::Serialize;

use super::trace::{AccessTrace, TraceSource};
use crate::error::SimError;

/// Stack distances are 1-based: re-touching the most recent line is 1, and
/// `a, b, a` gives 2 for the second `a`.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ReuseHistogram {
    pub line_bytes: u64,
    pub counts: BTreeMap<u64, u64>,
    /// First touches (infinite distance).
    pub cold: u64,
}

impl ReuseHistogram {
    pub fn total(&self) -> u64 {
        self.cold + self.counts.values().sum::<u64>()
    }

    /// Misses of a fully associative LRU cache of `lines` lines.
    pub fn misses(&self, lines: u64) -> u64 {
        self.cold
            + self
                .counts
                .range(lines.saturating_add(1)..)
                .map(|(_, c)| c)
                .sum::<u64>()
    }

    /// Line fill traffic in bytes for a cache of `capacity_bytes`.
    pub fn traffic_bytes(&self, capacity_bytes: u64) -> u64 {
        self.misses(capacity_bytes / self.line_bytes) * self.line_bytes
    }
}

struct Fenwick(Vec<i64>);

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick(vec![0; n + 1])
    }

    fn add(&mut self, i: usize, d: i64) {
        let mut i = i + 1;
        while i < self.0.len() {
            self.0[i] += d;
            i += i & i.wrapping_neg();
        }
    }

    /// Sum over `0..=i`.
    fn prefix(&self, i: usize) -> i64 {
        let mut i = i + 1;
        let mut s = 0;
        while i > 0 {
            s += self.0[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

/// Histogram over the lockstep interleaving of all cores.
pub fn reuse_distance_histogram(
    trace: &dyn TraceSource,
    line_bytes: u64,
) -> Result<ReuseHistogram, SimError> {
    let trace = AccessTrace::collect(trace);
    let mut lines = Vec::new();
    for (_, a) in trace.interleaved() {
        lines.extend(a.lines(line_bytes)?);
    }
    Ok(histogram_of_lines(&lines, line_bytes))
}

pub fn histogram_of_lines(lines: &[u64], line_bytes: u64) -> ReuseHistogram {
    let mut bit = Fenwick::new(lines.len());
    let mut last: FxHashMap<u64, usize> = FxHashMap::default();
    let mut h = ReuseHistogram {
        line_bytes,
        ..Default::default()
    };
    for (t, &line) in lines.iter().enumerate() {
        match last.insert(line, t) {
            Some(t0) => {
                // distinct lines touched strictly between t0 and t, plus this one
                let between = bit.prefix(t - 1) - bit.prefix(t0);
                *h.counts.entry(between as u64 + 1).or_insert(0) += 1;
                bit.add(t0, -1);
            }
            None => h.cold += 1,
        }
        bit.add(t, 1);
    }
    h
}
