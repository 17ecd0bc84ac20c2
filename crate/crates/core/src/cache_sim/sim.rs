//! Two-level write-back, write-allocate cache hierarchy driven in lockstep.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::lru::{Evicted, LruCache};
use super::trace::{Access, AccessKind, TraceSource};
use crate::error::SimError;
use crate::machine::MachineModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub line_bytes: u64,
    /// Per core.
    pub l1_capacity: u64,
    /// Per L2 instance.
    pub l2_capacity: u64,
    pub l2_shared_by: usize,
    /// Number of simulated cores; `None` takes the trace's core count.
    #[serde(default)]
    pub cores: Option<usize>,
    /// Level name (`L1`, `L2`) to stream tag to capacity fraction. Untagged
    /// streams share the remainder.
    #[serde(default)]
    pub partitions: BTreeMap<String, BTreeMap<String, f64>>,
    /// Write back dirty lines after the last event.
    #[serde(default = "yes")]
    pub flush_at_end: bool,
}

fn yes() -> bool {
    true
}

impl SimConfig {
    pub fn new(line_bytes: u64, l1_capacity: u64, l2_capacity: u64, l2_shared_by: usize) -> Self {
        SimConfig {
            line_bytes,
            l1_capacity,
            l2_capacity,
            l2_shared_by,
            cores: None,
            partitions: BTreeMap::new(),
            flush_at_end: true,
        }
    }

    /// L1 and L2 of the given machine.
    pub fn from_machine(model: &MachineModel) -> Self {
        let l1 = &model.levels[0];
        let l2 = &model.levels[1];
        SimConfig::new(
            l1.line_bytes,
            l1.capacity_bytes,
            l2.capacity_bytes,
            l2.shared_by_cores as usize,
        )
    }

    pub fn with_partition(mut self, level: &str, tag: &str, fraction: f64) -> Self {
        self.partitions
            .entry(level.to_string())
            .or_default()
            .insert(tag.to_string(), fraction);
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !self.line_bytes.is_power_of_two() {
            return Err(SimError::Config(format!(
                "line size {} is not a power of two",
                self.line_bytes
            )));
        }
        for (name, cap) in [("L1", self.l1_capacity), ("L2", self.l2_capacity)] {
            if cap % self.line_bytes != 0 {
                return Err(SimError::Config(format!(
                    "{name} capacity {cap} is not a multiple of the line size"
                )));
            }
        }
        if self.l2_shared_by == 0 {
            return Err(SimError::Config("l2_shared_by must be >= 1".into()));
        }
        for (level, parts) in &self.partitions {
            if level != "L1" && level != "L2" {
                return Err(SimError::Config(format!("unknown partition level `{level}`")));
            }
            let mut sum = 0.0;
            for (tag, f) in parts {
                if !(0.0..=1.0).contains(f) {
                    return Err(SimError::Config(format!(
                        "fraction {f} for `{tag}` at {level} outside [0, 1]"
                    )));
                }
                sum += f;
            }
            if sum > 1.0 + 1e-12 {
                return Err(SimError::PartitionOverflow {
                    level: level.clone(),
                    sum,
                });
            }
        }
        Ok(())
    }
}

/// Bytes moved across one boundary.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTraffic {
    pub name: String,
    pub load_bytes: u64,
    pub store_bytes: u64,
    /// `(load, store)` per core.
    pub per_core: Vec<(u64, u64)>,
}

impl BoundaryTraffic {
    fn new(name: &str, cores: usize) -> Self {
        BoundaryTraffic {
            name: name.to_string(),
            load_bytes: 0,
            store_bytes: 0,
            per_core: vec![(0, 0); cores],
        }
    }

    fn load(&mut self, core: usize, bytes: u64) {
        self.load_bytes += bytes;
        self.per_core[core].0 += bytes;
    }

    fn store(&mut self, core: usize, bytes: u64) {
        self.store_bytes += bytes;
        self.per_core[core].1 += bytes;
    }

    pub fn total(&self) -> u64 {
        self.load_bytes + self.store_bytes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficReport {
    pub line_bytes: u64,
    pub cores: usize,
    pub accesses: u64,
    /// Between L1 and L2.
    pub l1_l2: BoundaryTraffic,
    /// Between L2 and memory.
    pub l2_mem: BoundaryTraffic,
    /// Work units the trace represents (iterations or LUPs); 1 if unknown.
    pub divisor: f64,
}

impl TrafficReport {
    pub fn with_divisor(mut self, units: f64) -> Self {
        self.divisor = units;
        self
    }

    pub fn l2_bytes_per_unit(&self) -> f64 {
        self.l1_l2.total() as f64 / self.divisor
    }

    pub fn mem_bytes_per_unit(&self) -> f64 {
        self.l2_mem.total() as f64 / self.divisor
    }
}

/// One cache instance split into partitions with independent LRU stacks.
struct PartitionedCache {
    parts: Vec<LruCache>,
    /// Partition index per trace tag.
    route: Vec<usize>,
}

impl PartitionedCache {
    fn new(capacity_lines: u64, fractions: Option<&BTreeMap<String, f64>>, tags: &[String]) -> Self {
        let Some(fractions) = fractions.filter(|f| !f.is_empty()) else {
            return PartitionedCache {
                parts: vec![LruCache::new(capacity_lines as usize)],
                route: vec![0; tags.len().max(1)],
            };
        };
        let mut parts = Vec::new();
        let mut names = Vec::new();
        let mut used = 0u64;
        for (tag, f) in fractions {
            let lines = (f * capacity_lines as f64 + 1e-9).floor() as u64;
            used += lines;
            parts.push(LruCache::new(lines as usize));
            names.push(tag.as_str());
        }
        let default = parts.len();
        parts.push(LruCache::new(capacity_lines.saturating_sub(used) as usize));
        let route = tags
            .iter()
            .map(|t| names.iter().position(|n| *n == t).unwrap_or(default))
            .collect::<Vec<_>>();
        PartitionedCache {
            parts,
            route: if route.is_empty() { vec![default] } else { route },
        }
    }

    fn part(&mut self, tag: u16) -> &mut LruCache {
        let idx = self.route.get(tag as usize).copied().unwrap_or(0);
        &mut self.parts[idx]
    }

    fn drain_dirty(&mut self) -> Vec<Evicted> {
        self.parts.iter_mut().flat_map(|p| p.drain_dirty()).collect()
    }
}

pub struct Simulator {
    cfg: SimConfig,
    cores: usize,
    l1: Vec<PartitionedCache>,
    l2: Vec<PartitionedCache>,
    l1_l2: BoundaryTraffic,
    l2_mem: BoundaryTraffic,
    accesses: u64,
}

impl Simulator {
    pub fn new(cfg: SimConfig, cores: usize, tags: &[String]) -> Result<Self, SimError> {
        cfg.validate()?;
        let lb = cfg.line_bytes;
        let l1 = (0..cores)
            .map(|_| PartitionedCache::new(cfg.l1_capacity / lb, cfg.partitions.get("L1"), tags))
            .collect();
        let n_l2 = cores.div_ceil(cfg.l2_shared_by).max(1);
        let l2 = (0..n_l2)
            .map(|_| PartitionedCache::new(cfg.l2_capacity / lb, cfg.partitions.get("L2"), tags))
            .collect();
        Ok(Simulator {
            cores,
            l1,
            l2,
            l1_l2: BoundaryTraffic::new("L1-L2", cores),
            l2_mem: BoundaryTraffic::new("L2-MEM", cores),
            accesses: 0,
            cfg,
        })
    }

    pub fn access(&mut self, core: usize, a: &Access) -> Result<(), SimError> {
        if core >= self.cores {
            return Err(SimError::CoreOutOfRange {
                core: core as u32,
                cores: self.cores,
            });
        }
        self.accesses += 1;
        let write = a.kind == AccessKind::Write;
        for line in a.lines(self.cfg.line_bytes)? {
            self.touch(core, line, a.tag, write);
        }
        Ok(())
    }

    fn touch(&mut self, core: usize, line: u64, tag: u16, write: bool) {
        let lb = self.cfg.line_bytes;
        let (hit, evicted) = self.l1[core].part(tag).access(line, write, tag);
        if !hit {
            // demand load or write-allocate
            self.l1_l2.load(core, lb);
            self.l2_fetch(core, line, tag);
        }
        if let Some(ev) = evicted {
            self.l1_evict(core, ev);
        }
    }

    fn l2_of(&self, core: usize) -> usize {
        core / self.cfg.l2_shared_by
    }

    fn l2_fetch(&mut self, core: usize, line: u64, tag: u16) {
        let lb = self.cfg.line_bytes;
        let l2 = self.l2_of(core);
        let (hit, evicted) = self.l2[l2].part(tag).access(line, false, tag);
        if !hit {
            self.l2_mem.load(core, lb);
        }
        self.l2_evict(core, evicted);
    }

    fn l1_evict(&mut self, core: usize, ev: Evicted) {
        if !ev.dirty {
            return;
        }
        let lb = self.cfg.line_bytes;
        self.l1_l2.store(core, lb);
        // write-back lands in L2 without fetching from memory
        let l2 = self.l2_of(core);
        let (_, evicted) = self.l2[l2].part(ev.tag).access(ev.line, true, ev.tag);
        self.l2_evict(core, evicted);
    }

    fn l2_evict(&mut self, core: usize, ev: Option<Evicted>) {
        if let Some(ev) = ev {
            if ev.dirty {
                self.l2_mem.store(core, self.cfg.line_bytes);
            }
        }
    }

    /// Write back everything dirty, L1s first.
    pub fn flush(&mut self) {
        for core in 0..self.cores {
            for ev in self.l1[core].drain_dirty() {
                self.l1_evict(core, ev);
            }
        }
        let lb = self.cfg.line_bytes;
        for l2 in 0..self.l2.len() {
            let owner = (l2 * self.cfg.l2_shared_by).min(self.cores.saturating_sub(1));
            for _ in self.l2[l2].drain_dirty() {
                self.l2_mem.store(owner, lb);
            }
        }
    }

    pub fn report(&self) -> TrafficReport {
        TrafficReport {
            line_bytes: self.cfg.line_bytes,
            cores: self.cores,
            accesses: self.accesses,
            l1_l2: self.l1_l2.clone(),
            l2_mem: self.l2_mem.clone(),
            divisor: 1.0,
        }
    }
}

/// Run a trace to completion with one event per core per round.
pub fn simulate(trace: &dyn TraceSource, cfg: &SimConfig) -> Result<TrafficReport, SimError> {
    let trace_cores = trace.cores();
    let cores = cfg.cores.unwrap_or(trace_cores);
    if trace_cores > cores {
        return Err(SimError::CoreOutOfRange {
            core: (trace_cores - 1) as u32,
            cores,
        });
    }
    let mut sim = Simulator::new(cfg.clone(), cores, &trace.tags())?;
    let mut streams: Vec<_> = (0..trace_cores).map(|c| Some(trace.stream(c))).collect();
    let mut live = trace_cores;
    while live > 0 {
        for (core, slot) in streams.iter_mut().enumerate() {
            let Some(it) = slot else { continue };
            match it.next() {
                Some(a) => sim.access(core, &a)?,
                None => {
                    *slot = None;
                    live -= 1;
                }
            }
        }
    }
    if cfg.flush_at_end {
        sim.flush();
    }
    Ok(sim.report())
}
