use serde::Serialize;

use super::geometry::{Layout, LatticeGeometry};
use super::lc::{lc_analyze, LcMode};
use crate::ecm::{KernelProfile, OverrideTimes, Unit, Volume};
use crate::machine::MachineModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Compiler {
    Gcc,
    Fcc,
}

/// Measured and analyzed contributions in cy/LUP for a 24^4 x 8 lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceTimes {
    pub layout: Layout,
    pub compiler: Compiler,
    pub t_c_ol: f64,
    pub t_l1_ld: f64,
    pub t_l1_st: f64,
    pub t_l2: f64,
    pub t_mem: f64,
    pub t_ecm: f64,
}

pub const REFERENCE_TIMES: [ReferenceTimes; 4] = [
    ReferenceTimes {
        layout: Layout::Riri,
        compiler: Compiler::Gcc,
        t_c_ol: 168.0,
        t_l1_ld: 25.6,
        t_l1_st: 3.0,
        t_l2: 35.3,
        t_mem: 15.9,
        t_ecm: 168.0,
    },
    ReferenceTimes {
        layout: Layout::Rrii,
        compiler: Compiler::Gcc,
        t_c_ol: 70.8,
        t_l1_ld: 34.4,
        t_l1_st: 20.4,
        t_l2: 35.3,
        t_mem: 15.9,
        t_ecm: 70.8,
    },
    ReferenceTimes {
        layout: Layout::Riri,
        compiler: Compiler::Fcc,
        t_c_ol: 168.0,
        t_l1_ld: 33.0,
        t_l1_st: 3.0,
        t_l2: 35.3,
        t_mem: 15.9,
        t_ecm: 168.0,
    },
    ReferenceTimes {
        layout: Layout::Rrii,
        compiler: Compiler::Fcc,
        t_c_ol: 85.5,
        t_l1_ld: 45.2,
        t_l1_st: 37.3,
        t_l2: 35.3,
        t_mem: 15.9,
        t_ecm: 85.5,
    },
];

pub fn reference_times(layout: Layout, compiler: Compiler) -> ReferenceTimes {
    *REFERENCE_TIMES
        .iter()
        .find(|r| r.layout == layout && r.compiler == compiler)
        .expect("every combination is listed")
}

impl ReferenceTimes {
    pub fn in_core(&self) -> OverrideTimes {
        OverrideTimes::in_core(self.t_c_ol, self.t_l1_ld, self.t_l1_st)
    }

    pub fn all(&self) -> OverrideTimes {
        OverrideTimes {
            t_l2: Some(self.t_l2),
            t_mem: Some(self.t_mem),
            ..self.in_core()
        }
    }
}

/// Profile for the DW kernel with externally supplied times. Volumes come
/// from the vectorized layer conditions: L1 is private, the last-level
/// cache is split among `cores`.
pub fn dw_ecm_profile(
    name: &str,
    geom: &LatticeGeometry,
    times: OverrideTimes,
    model: &MachineModel,
    cores: u32,
) -> KernelProfile {
    let l1 = model.l1();
    let llc = model.last_cache();
    let mem = &model.levels[model.levels.len() - 1];
    let split = |cache: u64, n: u32| {
        let r = lc_analyze(geom, cache as f64, LcMode::Vectorized, n);
        Volume::new(r.load_bytes_per_lup(), r.store_bytes_per_lup())
    };
    KernelProfile::new(name, Unit::PerLup)
        .with_overrides(times)
        .with_volume(&model.levels[1].name, split(l1.capacity_bytes, 1))
        .with_volume(&mem.name, split(llc.capacity_bytes, cores))
}

/// Single-core DW profile on 24^4 x 8 with the GCC in-core times.
pub fn reference_profile(layout: Layout) -> KernelProfile {
    let geom = LatticeGeometry::new([24; 4], 8, layout).expect("valid");
    let name = format!("dw_{}", layout.name());
    let times = reference_times(layout, Compiler::Gcc).in_core();
    dw_ecm_profile(&name, &geom, times, &MachineModel::a64fx(), 1)
}
