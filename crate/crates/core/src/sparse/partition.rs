//! Contiguous work partitioning over rows or chunks.

use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{CrsMatrix, SellMatrix};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionMode {
    #[default]
    ByRows,
    ByNnz,
}

impl FromStr for PartitionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "by_rows" | "rows" => Ok(PartitionMode::ByRows),
            "by_nnz" | "nnz" => Ok(PartitionMode::ByNnz),
            other => Err(format!("unknown partition mode `{other}` (by_rows, by_nnz)")),
        }
    }
}

/// Exactly `nparts` contiguous ranges covering `0..weights.len()`; some may
/// be empty when there are fewer items than parts.
pub fn partition_weights(weights: &[u64], nparts: usize, mode: PartitionMode) -> Vec<Range<usize>> {
    let nparts = nparts.max(1);
    match mode {
        PartitionMode::ByRows => even_split(weights.len(), nparts),
        PartitionMode::ByNnz => balanced_split(weights, nparts),
    }
}

pub fn partition_crs(a: &CrsMatrix, nparts: usize, mode: PartitionMode) -> Vec<Range<usize>> {
    let w: Vec<u64> = a.row_lengths().into_iter().map(|l| l as u64).collect();
    partition_weights(&w, nparts, mode)
}

/// Ranges over chunk indices.
pub fn partition_sell(a: &SellMatrix, nparts: usize, mode: PartitionMode) -> Vec<Range<usize>> {
    partition_weights(&a.chunk_weights(), nparts, mode)
}

fn even_split(n: usize, nparts: usize) -> Vec<Range<usize>> {
    let base = n / nparts;
    let extra = n % nparts;
    let mut start = 0;
    (0..nparts)
        .map(|p| {
            let len = base + usize::from(p < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

/// Greedy fill against the smallest feasible bottleneck, found by bisection.
fn balanced_split(w: &[u64], nparts: usize) -> Vec<Range<usize>> {
    if w.is_empty() {
        return vec![0..0; nparts];
    }
    let parts_needed = |cap: u64| {
        let mut parts = 1usize;
        let mut sum = 0u64;
        for &x in w {
            if sum + x > cap {
                parts += 1;
                sum = 0;
            }
            sum += x;
        }
        parts
    };
    let mut lo = w.iter().copied().max().unwrap_or(0);
    let mut hi = w.iter().sum::<u64>().max(lo);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if parts_needed(mid) <= nparts {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let cap = lo;
    let mut ranges = Vec::with_capacity(nparts);
    let mut start = 0;
    let mut sum = 0u64;
    for (i, &x) in w.iter().enumerate() {
        if sum + x > cap {
            ranges.push(start..i);
            start = i;
            sum = 0;
        }
        sum += x;
    }
    ranges.push(start..w.len());

    // Splitting a range never raises the bottleneck; prefer splitting the
    // longest so that threads still get distinct rows.
    while ranges.len() < nparts {
        let (idx, longest) = ranges
            .iter()
            .enumerate()
            .max_by_key(|(i, r)| (r.len(), std::cmp::Reverse(*i)))
            .map(|(i, r)| (i, r.clone()))
            .expect("non-empty");
        if longest.len() < 2 {
            ranges.push(w.len()..w.len());
            continue;
        }
        let mid = longest.start + longest.len() / 2;
        ranges[idx] = longest.start..mid;
        ranges.insert(idx + 1, mid..longest.end);
    }
    ranges
}
