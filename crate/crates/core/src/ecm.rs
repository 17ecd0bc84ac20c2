//! The ECM runtime model: in-core times, transfer times, the overlap rule
//! and multicore saturation, plus roofline and CRS latency-bound helpers.
//!
//! Kernel profiles are TOML files (`format = "ecmkit-kernel"`, `version = 1`):
//!
//! ```toml
//! format = "ecmkit-kernel"
//! version = 1
//! name = "triad"
//! unit = "per_vl"            # per_vl | per_lup | per_iteration
//! load_dominated = false
//!
//! [instr_counts]
//! load_std = 2.0
//! store_std = 1.0
//! fmla = 1.0
//!
//! [volumes.L2]               # bytes moved between L1 and L2 per unit
//! load_bytes = 192.0
//! store_bytes = 64.0
//!
//! [volumes.MEM]              # bytes moved between L2 and memory per unit
//! load_bytes = 192.0
//! store_bytes = 64.0
//!
//! [override_times]           # optional; replaces the in-core estimate
//! t_c_ol = 168.0
//! t_l1_ld = 25.6
//! t_l1_st = 3.0
//! t_l2 = 35.3                # optional, replaces the L2 transfer time
//! t_mem = 15.9               # optional, replaces the memory transfer time
//! ```
//!
//! Volume keys name the level the data comes from; write-allocate traffic is
//! already included in `load_bytes`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{EcmError, ModelError};
use crate::machine::{
    BandwidthKind, BandwidthScope, MachineModel, MemLevel, LOAD_PORT,
};

pub const KERNEL_FORMAT: &str = "ecmkit-kernel";
pub const KERNEL_FORMAT_VERSION: u32 = 1;

/// Keeps `ceil` from rounding 1.0000000001 up to 2.
const CEIL_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Unit {
    PerVl,
    PerLup,
    PerIteration,
}

impl Unit {
    /// Short label used in reports, e.g. `cy/VL`.
    pub fn cycles_label(self) -> &'static str {
        match self {
            Unit::PerVl => "cy/VL",
            Unit::PerLup => "cy/LUP",
            Unit::PerIteration => "cy/it",
        }
    }

    pub fn bytes_label(self) -> &'static str {
        match self {
            Unit::PerVl => "B/VL",
            Unit::PerLup => "B/LUP",
            Unit::PerIteration => "B/it",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Volume {
    pub load_bytes: f64,
    pub store_bytes: f64,
}

impl Volume {
    pub fn new(load_bytes: f64, store_bytes: f64) -> Self {
        Volume {
            load_bytes,
            store_bytes,
        }
    }

    pub fn total(&self) -> f64 {
        self.load_bytes + self.store_bytes
    }
}

/// Externally determined times in cycles per unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverrideTimes {
    pub t_c_ol: f64,
    pub t_l1_ld: f64,
    pub t_l1_st: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_l2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_mem: Option<f64>,
}

impl OverrideTimes {
    pub fn in_core(t_c_ol: f64, t_l1_ld: f64, t_l1_st: f64) -> Self {
        OverrideTimes {
            t_c_ol,
            t_l1_ld,
            t_l1_st,
            t_l2: None,
            t_mem: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelProfile {
    #[serde(default = "kernel_format")]
    pub format: String,
    #[serde(default = "kernel_version")]
    pub version: u32,
    pub name: String,
    pub unit: Unit,
    #[serde(default)]
    pub load_dominated: bool,
    #[serde(default)]
    pub instr_counts: BTreeMap<String, f64>,
    /// Keyed by the level the data is transferred from (`L2`, `MEM`).
    #[serde(default)]
    pub volumes: BTreeMap<String, Volume>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub override_times: Option<OverrideTimes>,
}

fn kernel_format() -> String {
    KERNEL_FORMAT.to_string()
}

fn kernel_version() -> u32 {
    KERNEL_FORMAT_VERSION
}

impl KernelProfile {
    pub fn new(name: impl Into<String>, unit: Unit) -> Self {
        KernelProfile {
            format: kernel_format(),
            version: KERNEL_FORMAT_VERSION,
            name: name.into(),
            unit,
            load_dominated: false,
            instr_counts: BTreeMap::new(),
            volumes: BTreeMap::new(),
            override_times: None,
        }
    }

    pub fn with_count(mut self, iclass: &str, count: f64) -> Self {
        *self.instr_counts.entry(iclass.to_string()).or_insert(0.0) += count;
        self
    }

    pub fn with_volume(mut self, level: &str, volume: Volume) -> Self {
        self.volumes.insert(level.to_string(), volume);
        self
    }

    pub fn with_overrides(mut self, times: OverrideTimes) -> Self {
        self.override_times = Some(times);
        self
    }

    pub fn load_dominated(mut self, yes: bool) -> Self {
        self.load_dominated = yes;
        self
    }

    pub fn volume(&self, level: &str) -> Option<Volume> {
        self.volumes.get(level).copied()
    }

    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self, ModelError> {
        let profile: KernelProfile = toml::from_str(text).map_err(|e| ModelError::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })?;
        profile.validate()?;
        Ok(profile)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ModelError::Parse {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("kernel profile always serializes")
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.format != KERNEL_FORMAT {
            return Err(ModelError::invariant(
                "format",
                format!("expected \"{KERNEL_FORMAT}\", got \"{}\"", self.format),
            ));
        }
        if self.version != KERNEL_FORMAT_VERSION {
            return Err(ModelError::invariant(
                "version",
                format!("unsupported version {}", self.version),
            ));
        }
        for (iclass, count) in &self.instr_counts {
            if !(*count >= 0.0) || !count.is_finite() {
                return Err(ModelError::invariant(
                    format!("instr_counts.{iclass}"),
                    "counts must be finite and non-negative",
                ));
            }
        }
        for (level, v) in &self.volumes {
            for (what, x) in [("load_bytes", v.load_bytes), ("store_bytes", v.store_bytes)] {
                if !(x >= 0.0) || !x.is_finite() {
                    return Err(ModelError::invariant(
                        format!("volumes.{level}.{what}"),
                        "volumes must be finite and non-negative",
                    ));
                }
            }
        }
        match &self.override_times {
            Some(t) => {
                let all = [
                    ("t_c_ol", Some(t.t_c_ol)),
                    ("t_l1_ld", Some(t.t_l1_ld)),
                    ("t_l1_st", Some(t.t_l1_st)),
                    ("t_l2", t.t_l2),
                    ("t_mem", t.t_mem),
                ];
                for (field, value) in all {
                    if let Some(x) = value {
                        if !(x >= 0.0) || !x.is_finite() {
                            return Err(ModelError::invariant(
                                format!("override_times.{field}"),
                                "times must be finite and non-negative",
                            ));
                        }
                    }
                }
            }
            None if self.instr_counts.is_empty() => {
                return Err(ModelError::invariant(
                    "instr_counts",
                    "empty and no override_times given",
                ));
            }
            None => {}
        }
        Ok(())
    }
}

/// In-core contributions in cycles per unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InCoreTimes {
    pub t_c_ol: f64,
    pub t_l1_ld: f64,
    pub t_l1_st: f64,
}

pub fn in_core_times(
    profile: &KernelProfile,
    model: &MachineModel,
) -> Result<InCoreTimes, ModelError> {
    if let Some(t) = &profile.override_times {
        return Ok(InCoreTimes {
            t_c_ol: t.t_c_ol,
            t_l1_ld: t.t_l1_ld,
            t_l1_st: t.t_l1_st,
        });
    }
    let mut ports: BTreeMap<&str, f64> = BTreeMap::new();
    let mut t_l1_ld = 0.0;
    let mut t_l1_st = 0.0;
    for (iclass, &count) in &profile.instr_counts {
        let spec = model.instruction(iclass)?;
        if spec.is_load() {
            t_l1_ld += count * spec.recip_throughput_cy;
        } else if spec.is_store() {
            t_l1_st += count * spec.recip_throughput_cy;
        }
        for (port, cycles) in &spec.port_cycles {
            if port != LOAD_PORT {
                *ports.entry(port.as_str()).or_insert(0.0) += count * cycles;
            }
        }
    }
    let t_c_ol = ports.values().copied().fold(0.0, f64::max);
    Ok(InCoreTimes {
        t_c_ol,
        t_l1_ld,
        t_l1_st,
    })
}

/// Cycles to move a volume across the boundary below `level`.
pub fn transfer_time(load_bytes: f64, store_bytes: f64, level: &MemLevel) -> Result<f64, EcmError> {
    let mut t = 0.0;
    if load_bytes > 0.0 {
        if !(level.load_bw > 0.0) {
            return Err(EcmError::ZeroBandwidth {
                level: level.name.clone(),
            });
        }
        t += load_bytes / level.load_bw;
    }
    if store_bytes > 0.0 {
        if !(level.store_bw > 0.0) {
            return Err(EcmError::ZeroBandwidth {
                level: level.name.clone(),
            });
        }
        t += store_bytes / level.store_bw;
    }
    Ok(t)
}

/// Memory transfer time using the per-domain bandwidth expressed per cycle.
pub fn memory_transfer_time(volume: Volume, model: &MachineModel, load_dominated: bool) -> f64 {
    volume.total() / model.mem_bytes_per_cycle(load_dominated)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Residency {
    L1,
    L2,
    #[serde(rename = "MEM")]
    Mem,
}

impl Residency {
    pub const ALL: [Residency; 3] = [Residency::L1, Residency::L2, Residency::Mem];

    pub fn label(self) -> &'static str {
        match self {
            Residency::L1 => "L1",
            Residency::L2 => "L2",
            Residency::Mem => "MEM",
        }
    }
}

impl fmt::Display for Residency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Residency {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "L1" => Ok(Residency::L1),
            "L2" => Ok(Residency::L2),
            "MEM" => Ok(Residency::Mem),
            other => Err(format!("unknown residency `{other}` (L1, L2, MEM)")),
        }
    }
}

/// How the ECM contributions are combined.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Overlap {
    /// Loads into L1 serialize with L1/L2 transfers, everything else overlaps.
    #[default]
    PartialL1,
    /// No overlap among data transfers.
    SumAll,
    /// Every contribution overlaps with every other.
    FullOverlap,
}

impl Overlap {
    pub fn combine(self, t_c_ol: f64, t_l1_ld: f64, t_l1_st: f64, t_l2: f64, t_mem: f64) -> f64 {
        match self {
            Overlap::PartialL1 => t_c_ol.max((t_l1_ld + t_l1_st.max(t_l2)).max(t_mem)),
            Overlap::SumAll => t_c_ol.max(t_l1_ld + t_l1_st + t_l2 + t_mem),
            Overlap::FullOverlap => t_c_ol.max(t_l1_ld).max(t_l1_st).max(t_l2).max(t_mem),
        }
    }
}

impl std::str::FromStr for Overlap {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "partial_l1" | "default" => Ok(Overlap::PartialL1),
            "sum_all" => Ok(Overlap::SumAll),
            "full_overlap" => Ok(Overlap::FullOverlap),
            other => Err(format!(
                "unknown overlap `{other}` (partial_l1, sum_all, full_overlap)"
            )),
        }
    }
}

/// Multicore scaling derived from the single-core memory prediction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Saturation {
    /// Single-core memory bandwidth in bytes/s.
    pub b1: f64,
    pub b_domain: f64,
    pub n_sat: u32,
    /// False when `n_sat` exceeds the cores of one domain.
    pub saturates: bool,
    /// Cycles per unit for 1..=cores_per_domain cores.
    pub t_ecm_n: Vec<f64>,
}

impl Saturation {
    pub fn t_at(&self, n: u32) -> f64 {
        self.t_ecm_n[0] / n.min(self.n_sat).max(1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EcmPrediction {
    pub kernel: String,
    pub unit: Unit,
    pub overlap: Overlap,
    pub t_c_ol: f64,
    pub t_l1_ld: f64,
    pub t_l1_st: f64,
    pub t_l2: Option<f64>,
    pub t_mem: Option<f64>,
    pub v_mem: Option<f64>,
    pub t_ecm_l1: f64,
    pub t_ecm_l2: Option<f64>,
    pub t_ecm_mem: Option<f64>,
    pub saturation: Option<Saturation>,
}

impl EcmPrediction {
    pub fn t_ecm(&self, residency: Residency) -> Result<f64, EcmError> {
        let (value, boundary) = match residency {
            Residency::L1 => return Ok(self.t_ecm_l1),
            Residency::L2 => (self.t_ecm_l2, "L2"),
            Residency::Mem => (self.t_ecm_mem, "MEM"),
        };
        value.ok_or_else(|| EcmError::MissingVolume {
            kernel: self.kernel.clone(),
            boundary: boundary.to_string(),
        })
    }
}

fn l2_level(model: &MachineModel) -> &MemLevel {
    &model.levels[1]
}

fn l2_time(profile: &KernelProfile, model: &MachineModel) -> Result<Option<f64>, EcmError> {
    if let Some(t) = profile.override_times.as_ref().and_then(|t| t.t_l2) {
        return Ok(Some(t));
    }
    let level = l2_level(model);
    match profile.volume(&level.name) {
        Some(v) => Ok(Some(transfer_time(v.load_bytes, v.store_bytes, level)?)),
        None => Ok(None),
    }
}

fn mem_volume(profile: &KernelProfile, model: &MachineModel) -> Option<Volume> {
    let mem = model.levels.last().expect("validated model has levels");
    profile.volume(&mem.name)
}

fn mem_time(profile: &KernelProfile, model: &MachineModel) -> Option<f64> {
    if let Some(t) = profile.override_times.as_ref().and_then(|t| t.t_mem) {
        return Some(t);
    }
    mem_volume(profile, model).map(|v| memory_transfer_time(v, model, profile.load_dominated))
}

pub fn predict(profile: &KernelProfile, model: &MachineModel) -> Result<EcmPrediction, EcmError> {
    predict_with(profile, model, Overlap::default())
}

/// Predictions for every residency level the profile has volumes for.
pub fn predict_with(
    profile: &KernelProfile,
    model: &MachineModel,
    overlap: Overlap,
) -> Result<EcmPrediction, EcmError> {
    let core = in_core_times(profile, model)?;
    let t_l2 = l2_time(profile, model)?;
    let t_mem = t_l2.and_then(|_| mem_time(profile, model));
    let combine = |l2: f64, mem: f64| overlap.combine(core.t_c_ol, core.t_l1_ld, core.t_l1_st, l2, mem);

    let t_ecm_l1 = combine(0.0, 0.0);
    let t_ecm_l2 = t_l2.map(|l2| combine(l2, 0.0));
    let t_ecm_mem = match (t_l2, t_mem) {
        (Some(l2), Some(mem)) => Some(combine(l2, mem)),
        _ => None,
    };
    let v_mem = mem_volume(profile, model).map(|v| v.total());

    let saturation = match (t_ecm_mem, v_mem) {
        (Some(t), Some(v)) if v > 0.0 && t > 0.0 => {
            Some(saturation_from_time(t, v, model, profile.load_dominated)?)
        }
        _ => None,
    };

    Ok(EcmPrediction {
        kernel: profile.name.clone(),
        unit: profile.unit,
        overlap,
        t_c_ol: core.t_c_ol,
        t_l1_ld: core.t_l1_ld,
        t_l1_st: core.t_l1_st,
        t_l2,
        t_mem,
        v_mem,
        t_ecm_l1,
        t_ecm_l2,
        t_ecm_mem,
        saturation,
    })
}

/// Single-residency prediction; errors if the profile lacks the volume.
pub fn predict_residency(
    profile: &KernelProfile,
    model: &MachineModel,
    residency: Residency,
) -> Result<f64, EcmError> {
    predict(profile, model)?.t_ecm(residency)
}

pub fn saturation(
    pred: &EcmPrediction,
    profile: &KernelProfile,
    model: &MachineModel,
) -> Result<Saturation, EcmError> {
    let v_mem = mem_volume(profile, model)
        .map(|v| v.total())
        .filter(|v| *v > 0.0)
        .ok_or(EcmError::ZeroMemoryVolume)?;
    let t = pred.t_ecm(Residency::Mem)?;
    saturation_from_time(t, v_mem, model, profile.load_dominated)
}

/// Scaling from a given single-core time (cycles/unit) and memory volume.
pub fn saturation_from_time(
    t_ecm_mem: f64,
    v_mem: f64,
    model: &MachineModel,
    load_dominated: bool,
) -> Result<Saturation, EcmError> {
    if !(v_mem > 0.0) {
        return Err(EcmError::ZeroMemoryVolume);
    }
    if !(t_ecm_mem > 0.0) {
        return Err(EcmError::NonPositive("T_ECM(MEM)"));
    }
    let b1 = v_mem * model.clock_hz / t_ecm_mem;
    let b_domain = model.mem_bandwidth(BandwidthKind::for_kernel(load_dominated), BandwidthScope::Domain);
    let n_sat = ((b_domain / b1) - CEIL_EPS).ceil().max(1.0) as u32;
    let t_ecm_n = (1..=model.cores_per_domain)
        .map(|n| t_ecm_mem / n.min(n_sat) as f64)
        .collect();
    Ok(Saturation {
        b1,
        b_domain,
        n_sat,
        saturates: n_sat <= model.cores_per_domain,
        t_ecm_n,
    })
}

/// Result of the latency-bound CRS row model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrsLatencyBound {
    pub cycles_per_row: f64,
    /// Bytes/s of matrix data one domain can stream at this row rate.
    pub domain_bw: f64,
    /// Flops/s at the maximal CRS intensity of 1/6 flop/byte.
    pub perf: f64,
}

/// Latency-bound row time with one accumulator register.
pub fn crs_latency_bound(nnzr: u32, model: &MachineModel) -> Result<CrsLatencyBound, EcmError> {
    crs_latency_bound_mve(nnzr, 1, model)
}

/// Row time with `k` interleaved accumulators: the `fmla` chain shortens to
/// `ceil(iters/k)` links, followed by a `log2(k)`-deep `fadd` tree and the
/// final `faddv`.
pub fn crs_latency_bound_mve(
    nnzr: u32,
    k: u32,
    model: &MachineModel,
) -> Result<CrsLatencyBound, EcmError> {
    if nnzr == 0 {
        return Err(EcmError::NonPositive("nnzr"));
    }
    if k == 0 {
        return Err(EcmError::NonPositive("accumulators"));
    }
    let fmla = model.instruction("fmla")?.latency_cy as f64;
    let faddv = model.instruction("faddv")?.latency_cy as f64;
    let fadd = model.instruction("fadd")?.latency_cy as f64;
    let lanes = model.simd_doubles().max(1);
    let iters = nnzr.div_ceil(lanes);
    let chain = iters.div_ceil(k) as f64 * fmla;
    let tree = if k > 1 {
        (k as f64).log2().ceil() * fadd
    } else {
        0.0
    };
    let cycles_per_row = chain + tree + faddv;
    let domain_bw = model.cores_per_domain as f64 * model.clock_hz * (nnzr as f64 * 12.0)
        / cycles_per_row;
    Ok(CrsLatencyBound {
        cycles_per_row,
        domain_bw,
        perf: domain_bw / 6.0,
    })
}

/// `min(peak, I * b)` with the chosen memory bandwidth.
pub fn roofline_with(
    intensity: f64,
    model: &MachineModel,
    kind: BandwidthKind,
    scope: BandwidthScope,
) -> f64 {
    let b = model.mem_bandwidth(kind, scope);
    model.peak_flops.min(intensity.max(0.0) * b)
}

/// Roofline against the full-chip read-only bandwidth.
pub fn roofline(intensity: f64, model: &MachineModel) -> f64 {
    roofline_with(intensity, model, BandwidthKind::ReadOnly, BandwidthScope::Chip)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::streaming_kernel;

    fn a64fx() -> MachineModel {
        MachineModel::a64fx()
    }

    #[test]
    fn triad_in_core() {
        let m = a64fx();
        let p = streaming_kernel("triad", &m).unwrap();
        let t = in_core_times(&p, &m).unwrap();
        assert_eq!(t.t_l1_ld, 1.0);
        assert_eq!(t.t_l1_st, 1.0);
        assert!(t.t_c_ol <= 2.0);
    }

    #[test]
    fn overrides_short_circuit() {
        let m = a64fx();
        let p = KernelProfile::new("dw", Unit::PerLup)
            .with_overrides(OverrideTimes::in_core(168.0, 25.6, 3.0));
        let t = in_core_times(&p, &m).unwrap();
        assert_eq!((t.t_c_ol, t.t_l1_ld, t.t_l1_st), (168.0, 25.6, 3.0));
    }

    #[test]
    fn zero_counts_give_zero_times() {
        let m = a64fx();
        let p = KernelProfile::new("nop", Unit::PerIteration)
            .with_count("fmla", 0.0)
            .with_count("load_std", 0.0);
        let t = in_core_times(&p, &m).unwrap();
        assert_eq!((t.t_c_ol, t.t_l1_ld, t.t_l1_st), (0.0, 0.0, 0.0));
    }

    #[test]
    fn unknown_class_is_an_error() {
        let m = a64fx();
        let p = KernelProfile::new("x", Unit::PerVl).with_count("vfoo", 1.0);
        assert!(matches!(
            in_core_times(&p, &m),
            Err(ModelError::UnknownInstruction { .. })
        ));
    }

    #[test]
    fn transfer_times() {
        let m = a64fx();
        let l2 = m.level("L2").unwrap();
        assert_eq!(transfer_time(1872.0, 192.0, l2).unwrap(), 35.25);
        assert_eq!(transfer_time(192.0, 64.0, l2).unwrap(), 5.0);
        assert_eq!(transfer_time(0.0, 0.0, l2).unwrap(), 0.0);
        let mem = m.level("MEM").unwrap();
        assert!(matches!(
            transfer_time(1.0, 0.0, mem),
            Err(EcmError::ZeroBandwidth { .. })
        ));
    }

    #[test]
    fn triad_and_copy_predictions() {
        let m = a64fx();
        let triad = predict(&streaming_kernel("triad", &m).unwrap(), &m).unwrap();
        assert!((triad.t_ecm_l1 - 2.0).abs() < 1e-12);
        assert!((triad.t_ecm_l2.unwrap() - 6.0).abs() < 1e-12);
        assert!((triad.t_ecm_mem.unwrap() - 6.1).abs() / 6.1 < 0.05);

        let copy = predict(&streaming_kernel("copy", &m).unwrap(), &m).unwrap();
        assert!((copy.t_ecm_l1 - 1.5).abs() < 1e-12);
        assert!((copy.t_ecm_l2.unwrap() - 4.5).abs() < 1e-12);
        assert!((copy.t_ecm_mem.unwrap() - 4.6).abs() / 4.6 < 0.05);
    }

    #[test]
    fn dw_overrides_give_168() {
        let m = a64fx();
        let p = KernelProfile::new("dw_riri", Unit::PerLup).with_overrides(OverrideTimes {
            t_c_ol: 168.0,
            t_l1_ld: 25.6,
            t_l1_st: 3.0,
            t_l2: Some(35.3),
            t_mem: Some(15.9),
        });
        assert_eq!(predict_residency(&p, &m, Residency::Mem).unwrap(), 168.0);
    }

    #[test]
    fn missing_volume_reported() {
        let m = a64fx();
        let p = KernelProfile::new("x", Unit::PerVl).with_count("fmla", 1.0);
        let err = predict_residency(&p, &m, Residency::L2).unwrap_err();
        assert!(matches!(err, EcmError::MissingVolume { .. }));
        assert_eq!(predict_residency(&p, &m, Residency::L1).unwrap(), 0.5);
    }

    #[test]
    fn triad_saturation() {
        let m = a64fx();
        let p = streaming_kernel("triad", &m).unwrap();
        let pred = predict(&p, &m).unwrap();
        let s = saturation(&pred, &p, &m).unwrap();
        // 256 B in 6 cy at 2.2 GHz
        assert!((s.b1 - 256.0 * 2.2e9 / 6.0).abs() < 1.0);
        assert!((s.b1 / 1e9 - 93.9).abs() < 0.1);
        assert_eq!(s.n_sat, 3);
        assert!(s.saturates);
        for n in 1..=12u32 {
            let t = s.t_ecm_n[n as usize - 1];
            assert!((t * n.min(3) as f64 - s.t_ecm_n[0]).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_domain_bandwidth_saturates_at_one_core() {
        let m = a64fx();
        let v = 100.0;
        let t = v * m.clock_hz / m.mem_bw_triad_domain;
        let s = saturation_from_time(t, v, &m, false).unwrap();
        assert_eq!(s.n_sat, 1);
    }

    #[test]
    fn zero_memory_volume_rejected() {
        let m = a64fx();
        assert!(matches!(
            saturation_from_time(1.0, 0.0, &m, false),
            Err(EcmError::ZeroMemoryVolume)
        ));
    }

    #[test]
    fn dw_single_core_rate_does_not_saturate() {
        let m = a64fx();
        // 13.6 Gflop/s at 1320 flop/LUP
        let t = 1320.0 / (13.6e9 / m.clock_hz);
        let s = saturation_from_time(t, 1488.0, &m, true).unwrap();
        let twelve = 12.0 * s.b1;
        assert!((twelve / 1e9 - 184.0).abs() < 1.0, "{}", twelve / 1e9);
        assert!(twelve < m.mem_bw_readonly_domain);
        assert!(!s.saturates);
    }

    #[test]
    fn crs_latency() {
        let m = a64fx();
        let b = crs_latency_bound(27, &m).unwrap();
        assert_eq!(b.cycles_per_row, 85.0);
        assert!((b.domain_bw / 1e9 - 101.0).abs() / 101.0 < 0.01);
        assert!((b.perf / 1e9 - 16.8).abs() / 16.8 < 0.01);
        assert_eq!(crs_latency_bound(8, &m).unwrap().cycles_per_row, 58.0);
        assert_eq!(crs_latency_bound(1, &m).unwrap().cycles_per_row, 58.0);
        assert!(crs_latency_bound(0, &m).is_err());
    }

    #[test]
    fn mve_shortens_the_chain() {
        let m = a64fx();
        let one = crs_latency_bound_mve(4000, 1, &m).unwrap().cycles_per_row;
        let four = crs_latency_bound_mve(4000, 4, &m).unwrap().cycles_per_row;
        assert!(four < one);
    }

    #[test]
    fn roofline_values() {
        let m = a64fx();
        assert!((roofline(0.88, &m) - 0.88 * 859e9).abs() < 1.0);
        assert!((roofline(0.88, &m) / 1e9 - 756.0).abs() < 0.5);
        assert_eq!(roofline(1e9, &m), 3379.2e9);
        assert_eq!(roofline(0.0, &m), 0.0);
        assert_eq!(
            roofline_with(1.0, &m, BandwidthKind::Triad, BandwidthScope::Chip),
            841e9
        );
    }

    #[test]
    fn overlap_variants_order() {
        let args = (1.0, 2.0, 1.5, 3.0, 4.0);
        let d = Overlap::PartialL1.combine(args.0, args.1, args.2, args.3, args.4);
        let sum = Overlap::SumAll.combine(args.0, args.1, args.2, args.3, args.4);
        let full = Overlap::FullOverlap.combine(args.0, args.1, args.2, args.3, args.4);
        assert_eq!(d, 5.0);
        assert_eq!(sum, 10.5);
        assert_eq!(full, 4.0);
        assert!(full <= d && d <= sum);
    }

    #[test]
    fn profile_round_trip() {
        let m = a64fx();
        let p = streaming_kernel("schoenauer", &m).unwrap();
        let back = KernelProfile::from_toml_str(&p.to_toml_string(), "rt").unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn empty_profile_without_override_is_invalid() {
        let text = "name = \"x\"\nunit = \"per_vl\"\n";
        let err = KernelProfile::from_toml_str(text, "x.toml").unwrap_err();
        assert!(err.to_string().contains("instr_counts"));
    }
}
