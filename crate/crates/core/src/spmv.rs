//! Sparse matrix-vector multiplication `y += A x` for CRS and SELL-C-sigma.

use serde::{Deserialize, Serialize};

use crate::cache_sim::{Access, AccessTrace, AddressMap};
use crate::ecm::{KernelProfile, Unit, Volume};
use crate::error::SparseError;
use crate::machine::MachineModel;
use crate::sparse::{partition_crs, partition_sell, CrsMatrix, PartitionMode, SellMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpmvConfig {
    /// Interleaved partial sums per row.
    pub accumulators: usize,
    pub threads: usize,
    pub partition_mode: PartitionMode,
    pub emit_trace: bool,
}

impl Default for SpmvConfig {
    fn default() -> Self {
        SpmvConfig {
            accumulators: 1,
            threads: 1,
            partition_mode: PartitionMode::ByRows,
            emit_trace: false,
        }
    }
}

impl SpmvConfig {
    pub fn new(accumulators: usize, threads: usize) -> Self {
        SpmvConfig {
            accumulators,
            threads,
            ..Default::default()
        }
    }

    fn check(&self) -> Result<(), SparseError> {
        if self.accumulators == 0 || self.threads == 0 {
            return Err(SparseError::Parameter(
                "accumulators and threads must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Sum `vals[j] * x[cols[j]]` into `k` interleaved accumulators, reduced in order.
#[inline]
fn row_dot<F: Fn(usize) -> (u32, f64)>(len: usize, entry: F, x: &[f64], k: usize) -> f64 {
    if k == 1 {
        let mut s = 0.0;
        for j in 0..len {
            let (c, v) = entry(j);
            s += v * x[c as usize];
        }
        return s;
    }
    let mut acc = [0.0f64; 16];
    let mut heap;
    let acc: &mut [f64] = if k <= 16 {
        &mut acc[..k]
    } else {
        heap = vec![0.0; k];
        &mut heap
    };
    let mut j = 0;
    while j < len {
        let n = k.min(len - j);
        for (i, a) in acc[..n].iter_mut().enumerate() {
            let (c, v) = entry(j + i);
            *a += v * x[c as usize];
        }
        j += n;
    }
    acc.iter().fold(0.0, |s, a| s + a)
}

/// Split `y` into the disjoint pieces named by `ranges` (scaled by `unit`).
fn split_ranges<'a>(
    mut y: &'a mut [f64],
    ranges: &[std::ops::Range<usize>],
    unit: usize,
) -> Vec<(usize, &'a mut [f64])> {
    let mut out = Vec::with_capacity(ranges.len());
    let mut offset = 0;
    for r in ranges {
        let start = (r.start * unit).min(offset + y.len());
        let end = (r.end * unit).min(offset + y.len());
        let (_, rest) = y.split_at_mut(start - offset);
        let (mine, rest) = rest.split_at_mut(end - start);
        out.push((start, mine));
        y = rest;
        offset = end;
    }
    out
}

pub fn spmv_crs(a: &CrsMatrix, x: &[f64], y: &mut [f64], cfg: &SpmvConfig) -> Result<(), SparseError> {
    cfg.check()?;
    if x.len() != a.ncols || y.len() != a.nrows {
        return Err(SparseError::Dimension(format!(
            "A is {}x{}, x has {}, y has {}",
            a.nrows,
            a.ncols,
            x.len(),
            y.len()
        )));
    }
    let k = cfg.accumulators;
    let work = |first: usize, ys: &mut [f64]| {
        for (o, yi) in ys.iter_mut().enumerate() {
            let (cols, vals) = a.row(first + o);
            *yi += row_dot(cols.len(), |j| (cols[j], vals[j]), x, k);
        }
    };
    if cfg.threads == 1 {
        work(0, y);
        return Ok(());
    }
    let ranges = partition_crs(a, cfg.threads, cfg.partition_mode);
    std::thread::scope(|s| {
        for (first, ys) in split_ranges(y, &ranges, 1) {
            s.spawn(move || work(first, ys));
        }
    });
    Ok(())
}

/// `x` is in permuted column order, `y` in permuted row order with either
/// `nrows_orig` or `nrows_padded` entries.
pub fn spmv_sell(a: &SellMatrix, x: &[f64], y: &mut [f64], cfg: &SpmvConfig) -> Result<(), SparseError> {
    cfg.check()?;
    if x.len() != a.ncols || (y.len() != a.nrows_orig && y.len() != a.nrows_padded) {
        return Err(SparseError::Dimension(format!(
            "SELL matrix is {}({})x{}, x has {}, y has {}",
            a.nrows_orig,
            a.nrows_padded,
            a.ncols,
            x.len(),
            y.len()
        )));
    }
    let c = a.c;
    let k = cfg.accumulators;
    let work = |first_row: usize, ys: &mut [f64]| {
        let first_chunk = first_row / c;
        for (o, yi) in ys.iter_mut().enumerate() {
            let row = first_row + o;
            let chunk = first_chunk + (row - first_chunk * c) / c;
            let lane = row % c;
            let base = a.cs[chunk] + lane;
            let width = a.cl[chunk] as usize;
            *yi += row_dot(width, |j| (a.col[base + j * c], a.val[base + j * c]), x, k);
        }
    };
    if cfg.threads == 1 {
        work(0, y);
        return Ok(());
    }
    let ranges = partition_sell(a, cfg.threads, cfg.partition_mode);
    std::thread::scope(|s| {
        for (first, ys) in split_ranges(y, &ranges, c) {
            s.spawn(move || work(first, ys));
        }
    });
    Ok(())
}

/// Minimal memory traffic with perfect reuse of `x` and `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpmvTraffic {
    pub flops: f64,
    pub v_mem: f64,
    pub intensity: f64,
}

pub fn crs_traffic(a: &CrsMatrix) -> SpmvTraffic {
    traffic(a.nnz(), a.nnz(), a.ncols, a.nrows)
}

/// Padded slots are streamed like nonzeros, so they count in the volume.
pub fn sell_traffic(a: &SellMatrix) -> SpmvTraffic {
    traffic(a.nnz, a.slots(), a.ncols, a.nrows_padded)
}

fn traffic(nnz: usize, slots: usize, ncols: usize, nrows: usize) -> SpmvTraffic {
    let flops = 2.0 * nnz as f64;
    let v_mem = 12.0 * slots as f64 + 8.0 * ncols as f64 + 16.0 * nrows as f64;
    SpmvTraffic {
        flops,
        v_mem,
        intensity: if v_mem > 0.0 { flops / v_mem } else { 0.0 },
    }
}

/// Per-SIMD-iteration profile of the CRS kernel with optimal reuse.
pub fn spmv_profile_crs(a: &CrsMatrix, model: &MachineModel) -> KernelProfile {
    let lanes = model.simd_doubles() as usize;
    let iters: usize = (0..a.nrows).map(|i| a.row_len(i).div_ceil(lanes)).sum();
    let iters = iters.max(1) as f64;
    let rows = a.nrows as f64;
    gather_profile("spmv_crs", iters, rows, rows, crs_traffic(a), a.nrows, model)
}

/// Per-SIMD-iteration profile of the SELL kernel; one iteration covers one
/// chunk column of one register's worth of rows.
pub fn spmv_profile_sell(a: &SellMatrix, model: &MachineModel) -> KernelProfile {
    let lanes = model.simd_doubles() as usize;
    let regs = a.c.div_ceil(lanes);
    let iters: usize = a.cl.iter().map(|&w| w as usize * regs).sum();
    let iters = iters.max(1) as f64;
    let y_vectors = (a.nchunks() * regs) as f64;
    gather_profile("spmv_sell", iters, y_vectors, 0.0, sell_traffic(a), a.nrows_padded, model)
}

fn gather_profile(
    name: &str,
    iters: f64,
    y_updates: f64,
    reductions: f64,
    t: SpmvTraffic,
    nrows: usize,
    model: &MachineModel,
) -> KernelProfile {
    let store = 8.0 * nrows as f64;
    let v = Volume::new((t.v_mem - store) / iters, store / iters);
    let mem = model.levels.last().expect("validated").name.clone();
    let l2 = model.levels[1].name.clone();
    let mut p = KernelProfile::new(name, Unit::PerIteration)
        .load_dominated(true)
        // value and index loads, then the gather through the index
        .with_count("load_std", 2.0)
        .with_count("load_gather_complex", 1.0)
        .with_count("fmla", 1.0)
        .with_count("predicate_while", 1.0)
        .with_volume(&l2, v)
        .with_volume(&mem, v);
    if y_updates > 0.0 {
        p = p
            .with_count("load_std", y_updates / iters)
            .with_count("store_std", y_updates / iters);
    }
    if reductions > 0.0 {
        p = p.with_count("faddv", reductions / iters);
    }
    p
}

/// Synthetic arrays used by the SpMV traces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SpmvLayout {
    pub val: u64,
    pub idx: u64,
    pub x: u64,
    pub y: u64,
    /// Chunk widths and starts (SELL only).
    pub cl: u64,
    pub cs: u64,
}

/// Event stream of the CRS kernel. Per nonzero: value, index and `x`
/// reads; per row: read and write of `y`. Arrays sit at 2 MiB aligned
/// synthetic bases; rows are split across cores like [`spmv_crs`].
pub fn spmv_trace_crs(a: &CrsMatrix, cfg: &SpmvConfig) -> (AccessTrace, SpmvLayout) {
    let mut map = AddressMap::default();
    let layout = SpmvLayout {
        val: map.alloc(8 * a.nnz() as u64),
        idx: map.alloc(4 * a.nnz() as u64),
        x: map.alloc(8 * a.ncols as u64),
        y: map.alloc(8 * a.nrows as u64),
        cl: 0,
        cs: 0,
    };
    let threads = cfg.threads.max(1);
    let mut t = AccessTrace::new(threads);
    let (tv, ti, tx, ty) = (t.tag("val"), t.tag("idx"), t.tag("x"), t.tag("y"));
    for (core, r) in partition_crs(a, threads, cfg.partition_mode).into_iter().enumerate() {
        for i in r {
            for j in a.rp[i]..a.rp[i + 1] {
                t.push(core, Access::read(layout.val + 8 * j as u64, 8, tv));
                t.push(core, Access::read(layout.idx + 4 * j as u64, 4, ti));
                t.push(core, Access::read(layout.x + 8 * a.ci[j] as u64, 8, tx));
            }
            t.push(core, Access::read(layout.y + 8 * i as u64, 8, ty));
            t.push(core, Access::write(layout.y + 8 * i as u64, 8, ty));
        }
    }
    (t, layout)
}

/// Event stream of the SELL kernel: per chunk its width and start, per slot
/// value, column and `x`, per row a read and write of `y`.
pub fn spmv_trace_sell(a: &SellMatrix, cfg: &SpmvConfig) -> (AccessTrace, SpmvLayout) {
    let mut map = AddressMap::default();
    let slots = a.slots() as u64;
    let layout = SpmvLayout {
        val: map.alloc(8 * slots),
        idx: map.alloc(4 * slots),
        x: map.alloc(8 * a.ncols as u64),
        y: map.alloc(8 * a.nrows_padded as u64),
        cl: map.alloc(4 * a.nchunks() as u64),
        cs: map.alloc(8 * (a.nchunks() as u64 + 1)),
    };
    let threads = cfg.threads.max(1);
    let mut t = AccessTrace::new(threads);
    let (tv, ti, tx, ty, tm) = (t.tag("val"), t.tag("idx"), t.tag("x"), t.tag("y"), t.tag("meta"));
    let c = a.c;
    for (core, r) in partition_sell(a, threads, cfg.partition_mode).into_iter().enumerate() {
        for chunk in r {
            t.push(core, Access::read(layout.cl + 4 * chunk as u64, 4, tm));
            t.push(core, Access::read(layout.cs + 8 * chunk as u64, 8, tm));
            for j in 0..a.cl[chunk] as usize {
                for lane in 0..c {
                    let s = a.cs[chunk] + j * c + lane;
                    t.push(core, Access::read(layout.val + 8 * s as u64, 8, tv));
                    t.push(core, Access::read(layout.idx + 4 * s as u64, 4, ti));
                    t.push(core, Access::read(layout.x + 8 * a.col[s] as u64, 8, tx));
                }
            }
            for lane in 0..c {
                let row = (chunk * c + lane) as u64;
                t.push(core, Access::read(layout.y + 8 * row, 8, ty));
                t.push(core, Access::write(layout.y + 8 * row, 8, ty));
            }
        }
    }
    (t, layout)
}
