//! Declarative machine description: cache hierarchy, bandwidths and an
//! instruction throughput/latency table.
//!
//! Machines are stored as TOML (`format = "ecmkit-machine"`, `version = 1`).
//! The top-level keys are the scalar [`MachineModel`] fields, followed by an
//! ordered `[[levels]]` array (L1 first, main memory last) and an
//! `[instructions.<class>]` table per instruction class. See
//! `data/machines/a64fx_fx1000.toml` for a complete example.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

pub const MACHINE_FORMAT: &str = "ecmkit-machine";
pub const MACHINE_FORMAT_VERSION: u32 = 1;

/// Port group that carries loads; it does not count towards `T_c_OL`.
pub const LOAD_PORT: &str = "LOAD_PORT";
/// Port group that carries store data.
pub const STORE_PORT: &str = "STORE_PORT";

const A64FX_TOML: &str = include_str!("../data/machines/a64fx_fx1000.toml");
const A64FX_2GHZ_TOML: &str = include_str!("../data/machines/a64fx_fx1000_2ghz.toml");

/// Names of the machine files compiled into the crate.
pub const BUILTIN_MACHINES: &[&str] = &["a64fx_fx1000", "a64fx_fx1000_2ghz"];

/// One level of the memory hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemLevel {
    pub name: String,
    /// Zero means unbounded (main memory).
    pub capacity_bytes: u64,
    pub line_bytes: u64,
    /// Bytes/cycle from this level towards the core.
    pub load_bw: f64,
    /// Bytes/cycle from the core side into this level.
    pub store_bw: f64,
    pub shared_by_cores: u32,
}

impl MemLevel {
    pub fn is_unbounded(&self) -> bool {
        self.capacity_bytes == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstructionSpec {
    pub recip_throughput_cy: f64,
    /// Zero when the latency is not applicable.
    pub latency_cy: u32,
    /// Cycles each port group spends per instruction.
    pub port_cycles: BTreeMap<String, f64>,
}

impl InstructionSpec {
    pub fn is_load(&self) -> bool {
        self.port_cycles.contains_key(LOAD_PORT)
    }

    pub fn is_store(&self) -> bool {
        self.port_cycles.contains_key(STORE_PORT)
    }
}

/// Which main-memory bandwidth figure to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthKind {
    ReadOnly,
    Triad,
}

impl BandwidthKind {
    /// Read-only bandwidth for load-dominated kernels, triad otherwise.
    pub fn for_kernel(load_dominated: bool) -> Self {
        if load_dominated {
            BandwidthKind::ReadOnly
        } else {
            BandwidthKind::Triad
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BandwidthScope {
    Domain,
    Chip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MachineModel {
    pub format: String,
    pub version: u32,
    pub name: String,
    pub clock_hz: f64,
    pub simd_bytes: u32,
    pub cores_per_domain: u32,
    pub num_domains: u32,
    pub peak_flops: f64,
    pub mem_bw_readonly_domain: f64,
    pub mem_bw_triad_domain: f64,
    pub mem_bw_readonly_chip: f64,
    pub mem_bw_triad_chip: f64,
    pub ports: Vec<String>,
    pub levels: Vec<MemLevel>,
    pub instructions: BTreeMap<String, InstructionSpec>,
}

impl MachineModel {
    /// Parse and validate a machine description. `origin` only labels errors.
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self, ModelError> {
        let model: MachineModel = toml::from_str(text).map_err(|e| ModelError::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        model.validate()?;
        Ok(model)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("machine model always serializes")
    }

    /// Load a machine file from disk.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ModelError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn builtin(name: &str) -> Result<Self, ModelError> {
        let text = match name {
            "a64fx_fx1000" | "a64fx" => A64FX_TOML,
            "a64fx_fx1000_2ghz" => A64FX_2GHZ_TOML,
            _ => {
                return Err(ModelError::UnknownBuiltin {
                    name: name.to_string(),
                    known: BUILTIN_MACHINES.join(", "),
                })
            }
        };
        Self::from_toml_str(text, name)
    }

    /// The A64FX (FX1000) at 2.2 GHz.
    pub fn a64fx() -> Self {
        Self::builtin("a64fx_fx1000").expect("shipped machine file is valid")
    }

    /// Built-in name if it matches one, otherwise a file path.
    pub fn resolve(name_or_path: &str) -> Result<Self, ModelError> {
        if Path::new(name_or_path).is_file() {
            Self::load(name_or_path)
        } else {
            Self::builtin(name_or_path)
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.format != MACHINE_FORMAT {
            return Err(ModelError::invariant(
                "format",
                format!("expected \"{MACHINE_FORMAT}\", got \"{}\"", self.format),
            ));
        }
        if self.version != MACHINE_FORMAT_VERSION {
            return Err(ModelError::invariant(
                "version",
                format!("unsupported version {}", self.version),
            ));
        }
        positive("clock_hz", self.clock_hz)?;
        positive("peak_flops", self.peak_flops)?;
        if self.simd_bytes == 0 || self.simd_bytes % 8 != 0 {
            return Err(ModelError::invariant(
                "simd_bytes",
                "must be a positive multiple of 8",
            ));
        }
        if self.cores_per_domain == 0 {
            return Err(ModelError::invariant("cores_per_domain", "must be >= 1"));
        }
        if self.num_domains == 0 {
            return Err(ModelError::invariant("num_domains", "must be >= 1"));
        }
        positive("mem_bw_readonly_domain", self.mem_bw_readonly_domain)?;
        positive("mem_bw_triad_domain", self.mem_bw_triad_domain)?;
        if self.mem_bw_readonly_chip < self.mem_bw_readonly_domain {
            return Err(ModelError::invariant(
                "mem_bw_readonly_chip",
                "must not be below the per-domain figure",
            ));
        }
        if self.mem_bw_triad_chip < self.mem_bw_triad_domain {
            return Err(ModelError::invariant(
                "mem_bw_triad_chip",
                "must not be below the per-domain figure",
            ));
        }

        if self.levels.len() < 2 {
            return Err(ModelError::invariant(
                "levels",
                "need at least one cache level and main memory",
            ));
        }
        let last = self.levels.len() - 1;
        let mut prev_capacity = 0u64;
        for (i, level) in self.levels.iter().enumerate() {
            let field = |f: &str| format!("levels[{i}].{f}");
            if !level.line_bytes.is_power_of_two() {
                return Err(ModelError::invariant(
                    field("line_bytes"),
                    format!("{} is not a power of two", level.line_bytes),
                ));
            }
            if level.shared_by_cores == 0 {
                return Err(ModelError::invariant(field("shared_by_cores"), "must be >= 1"));
            }
            if i < last {
                if level.capacity_bytes == 0 {
                    return Err(ModelError::invariant(
                        field("capacity_bytes"),
                        "only the last level may be unbounded",
                    ));
                }
                if level.capacity_bytes <= prev_capacity {
                    return Err(ModelError::invariant(
                        field("capacity_bytes"),
                        format!(
                            "{} does not exceed the previous level ({prev_capacity})",
                            level.capacity_bytes
                        ),
                    ));
                }
                prev_capacity = level.capacity_bytes;
                if !(level.load_bw > 0.0) {
                    return Err(ModelError::invariant(field("load_bw"), "must be positive"));
                }
                if !(level.store_bw > 0.0) {
                    return Err(ModelError::invariant(field("store_bw"), "must be positive"));
                }
            } else if level.capacity_bytes != 0 && level.capacity_bytes <= prev_capacity {
                return Err(ModelError::invariant(
                    field("capacity_bytes"),
                    "main memory must be unbounded (0) or larger than the caches",
                ));
            }
        }

        for (name, spec) in &self.instructions {
            let field = |f: &str| format!("instructions.{name}.{f}");
            if !(spec.recip_throughput_cy > 0.0) {
                return Err(ModelError::invariant(
                    field("recip_throughput_cy"),
                    "must be positive",
                ));
            }
            let mut total = 0.0;
            for (port, cycles) in &spec.port_cycles {
                if !self.ports.iter().any(|p| p == port) {
                    return Err(ModelError::invariant(
                        field("port_cycles"),
                        format!("undeclared port `{port}`"),
                    ));
                }
                if *cycles < 0.0 {
                    return Err(ModelError::invariant(field("port_cycles"), "negative cycles"));
                }
                total += cycles;
            }
            if total + 1e-12 < spec.recip_throughput_cy {
                return Err(ModelError::invariant(
                    field("port_cycles"),
                    format!(
                        "port cycles sum to {total}, below the reciprocal throughput {}",
                        spec.recip_throughput_cy
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn instruction(&self, iclass: &str) -> Result<&InstructionSpec, ModelError> {
        self.instructions
            .get(iclass)
            .ok_or_else(|| ModelError::UnknownInstruction {
                name: iclass.to_string(),
                known: self
                    .instructions
                    .keys()
                    .cloned()
                    .collect::<Vec<_>>()
                    .join(", "),
            })
    }

    pub fn level(&self, name: &str) -> Option<&MemLevel> {
        self.levels.iter().find(|l| l.name == name)
    }

    /// First cache level (closest to the core).
    pub fn l1(&self) -> &MemLevel {
        &self.levels[0]
    }

    /// Last cache level before main memory.
    pub fn last_cache(&self) -> &MemLevel {
        &self.levels[self.levels.len() - 2]
    }

    pub fn mem_bandwidth(&self, kind: BandwidthKind, scope: BandwidthScope) -> f64 {
        match (kind, scope) {
            (BandwidthKind::ReadOnly, BandwidthScope::Domain) => self.mem_bw_readonly_domain,
            (BandwidthKind::Triad, BandwidthScope::Domain) => self.mem_bw_triad_domain,
            (BandwidthKind::ReadOnly, BandwidthScope::Chip) => self.mem_bw_readonly_chip,
            (BandwidthKind::Triad, BandwidthScope::Chip) => self.mem_bw_triad_chip,
        }
    }

    /// Domain bandwidth for a kernel, in bytes/cycle.
    pub fn mem_bytes_per_cycle(&self, load_dominated: bool) -> f64 {
        self.mem_bandwidth(BandwidthKind::for_kernel(load_dominated), BandwidthScope::Domain)
            / self.clock_hz
    }

    /// Double-precision elements per SIMD register.
    pub fn simd_doubles(&self) -> u32 {
        self.simd_bytes / 8
    }
}

impl fmt::Display for MachineModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} @ {:.2} GHz, {} x {} cores",
            self.name,
            self.clock_hz / 1e9,
            self.num_domains,
            self.cores_per_domain
        )
    }
}

fn positive(field: &str, value: f64) -> Result<(), ModelError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::invariant(field, format!("{value} is not positive")))
    }
}
