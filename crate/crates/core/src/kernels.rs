//! Built-in kernel profiles derived from loop structure.

use crate::ecm::{KernelProfile, Unit, Volume};
use crate::error::ModelError;
use crate::lc_dw::{self, Layout};
use crate::machine::MachineModel;

/// Loops are assumed unrolled this many times, so one `while` per 8 VL.
pub const UNROLL: f64 = 8.0;

/// Structure of a one-dimensional streaming loop, one element per stream per VL.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamLoop {
    pub name: &'static str,
    pub load_streams: u32,
    /// One entry per stored stream: true if a store miss allocates the line.
    pub store_streams: Vec<bool>,
    pub flops: Vec<(&'static str, f64)>,
}

impl StreamLoop {
    pub fn profile(&self, model: &MachineModel) -> KernelProfile {
        let vl = model.simd_bytes as f64;
        let stores = self.store_streams.len() as f64;
        let allocating = self.store_streams.iter().filter(|wa| **wa).count() as f64;
        let mut p = KernelProfile::new(self.name, Unit::PerVl)
            .load_dominated(self.store_streams.is_empty())
            .with_count("predicate_while", 1.0 / UNROLL);
        if self.load_streams > 0 {
            p = p.with_count("load_std", self.load_streams as f64);
        }
        if stores > 0.0 {
            p = p.with_count("store_std", stores);
        }
        for (iclass, n) in &self.flops {
            p = p.with_count(iclass, *n);
        }
        let v = Volume::new((self.load_streams as f64 + allocating) * vl, stores * vl);
        let mem = model.levels.last().expect("validated").name.clone();
        p.with_volume(&model.levels[1].name.clone(), v).with_volume(&mem, v)
    }
}

pub const STREAMING_KERNELS: &[&str] = &[
    "copy",
    "daxpy",
    "dot",
    "init",
    "init4",
    "load",
    "load4",
    "triad",
    "sum",
    "schoenauer",
];

pub fn stream_loop(name: &str) -> Option<StreamLoop> {
    let (loads, stores, flops): (u32, Vec<bool>, Vec<(&'static str, f64)>) = match name {
        "copy" => (1, vec![true], vec![]),
        // y is loaded before it is stored, so the line is already present
        "daxpy" => (2, vec![false], vec![("fmla", 1.0)]),
        "dot" => (2, vec![], vec![("fmla", 1.0)]),
        "init" => (0, vec![true], vec![]),
        "init4" => (0, vec![true; 4], vec![]),
        "load" => (1, vec![], vec![]),
        "load4" => (4, vec![], vec![]),
        "triad" => (2, vec![true], vec![("fmla", 1.0)]),
        "sum" => (1, vec![], vec![("fadd", 1.0)]),
        "schoenauer" => (3, vec![true], vec![("fmla", 1.0)]),
        _ => return None,
    };
    let name = STREAMING_KERNELS.iter().find(|k| **k == name)?;
    Some(StreamLoop {
        name,
        load_streams: loads,
        store_streams: stores,
        flops,
    })
}

pub fn streaming_kernel(name: &str, model: &MachineModel) -> Result<KernelProfile, ModelError> {
    stream_loop(name)
        .map(|l| l.profile(model))
        .ok_or_else(|| unknown(name))
}

/// Layer condition of a radius-`r` 2d stencil: `2r+1` rows of `inner`
/// doubles must fit into half the cache.
pub fn stencil_2d_lc(inner: u64, radius: u64, cache_bytes: u64) -> bool {
    (2 * radius + 1) * inner * 8 <= cache_bytes / 2
}

/// Jacobi-style 2d five-point stencil `b[j][i] = s*(a[j][i-1] + a[j][i] +
/// a[j][i+1] + a[j-1][i] + a[j+1][i])` with row length `inner`, single core.
pub fn stencil_2d5pt(name: &str, inner: u64, model: &MachineModel) -> KernelProfile {
    let vl = model.simd_bytes as f64;
    let l1 = &model.levels[0];
    let l2 = &model.levels[1];
    let mem = &model.levels[model.levels.len() - 1];
    let rows = |cache: u64| if stencil_2d_lc(inner, 1, cache) { 1.0 } else { 3.0 };
    // one input row stream (or three), write-allocate of b, store of b
    let v_l2 = Volume::new((rows(l1.capacity_bytes) + 1.0) * vl, vl);
    let v_mem = Volume::new((rows(l2.capacity_bytes) + 1.0) * vl, vl);
    KernelProfile::new(name, Unit::PerVl)
        .with_count("load_std", 5.0)
        .with_count("store_std", 1.0)
        .with_count("fadd", 4.0)
        .with_count("fmul", 1.0)
        .with_count("predicate_while", 1.0 / UNROLL)
        .with_volume(&l2.name, v_l2)
        .with_volume(&mem.name, v_mem)
}

/// Row lengths used for the three stencil variants.
pub const STENCIL_VARIANTS: &[(&str, u64)] = &[
    ("2d5pt_lc", 1_000),
    ("2d5pt_lc_l1", 10_000),
    ("2d5pt_nolc", 1_000_000),
];

pub const DW_KERNELS: &[&str] = &["dw_riri", "dw_rrii"];

/// All names accepted by [`builtin_kernel`].
pub fn builtin_kernel_names() -> Vec<&'static str> {
    STREAMING_KERNELS
        .iter()
        .copied()
        .chain(STENCIL_VARIANTS.iter().map(|(n, _)| *n))
        .chain(DW_KERNELS.iter().copied())
        .collect()
}

pub fn builtin_kernel(name: &str, model: &MachineModel) -> Result<KernelProfile, ModelError> {
    if let Some(l) = stream_loop(name) {
        return Ok(l.profile(model));
    }
    if let Some((n, inner)) = STENCIL_VARIANTS.iter().find(|(n, _)| *n == name) {
        return Ok(stencil_2d5pt(n, *inner, model));
    }
    match name {
        "dw_riri" => Ok(lc_dw::reference_profile(Layout::Riri)),
        "dw_rrii" => Ok(lc_dw::reference_profile(Layout::Rrii)),
        _ => Err(unknown(name)),
    }
}

fn unknown(name: &str) -> ModelError {
    ModelError::UnknownBuiltin {
        name: name.to_string(),
        known: builtin_kernel_names().join(", "),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ecm::predict;

    #[test]
    fn triad_profile_shape() {
        let m = MachineModel::a64fx();
        let p = streaming_kernel("triad", &m).unwrap();
        assert_eq!(p.instr_counts["load_std"], 2.0);
        assert_eq!(p.instr_counts["store_std"], 1.0);
        assert_eq!(p.instr_counts["fmla"], 1.0);
        assert_eq!(p.volume("MEM").unwrap().total(), 256.0);
        assert!(!p.load_dominated);
    }

    #[test]
    fn read_only_kernels_are_load_dominated() {
        let m = MachineModel::a64fx();
        for k in ["dot", "load", "load4", "sum"] {
            assert!(streaming_kernel(k, &m).unwrap().load_dominated, "{k}");
        }
    }

    #[test]
    fn stencil_variants_follow_layer_condition() {
        let m = MachineModel::a64fx();
        let expect = [(6.5, 6.5), (8.5, 8.5), (8.5, 8.5)];
        for ((name, inner), (l2, mem)) in STENCIL_VARIANTS.iter().zip(expect) {
            let p = predict(&stencil_2d5pt(name, *inner, &m), &m).unwrap();
            assert_eq!(p.t_ecm_l1, 3.5);
            assert_eq!(p.t_ecm_l2.unwrap(), l2, "{name}");
            assert_eq!(p.t_ecm_mem.unwrap(), mem, "{name}");
        }
        let lc = stencil_2d5pt("x", 1_000, &m);
        let nolc = stencil_2d5pt("x", 1_000_000, &m);
        assert_eq!(lc.volume("MEM").unwrap().total(), 192.0);
        assert_eq!(nolc.volume("MEM").unwrap().total(), 320.0);
    }

    #[test]
    fn shipped_triad_file_matches_builtin() {
        let m = MachineModel::a64fx();
        let text = include_str!("../data/kernels/triad.toml");
        let p = KernelProfile::from_toml_str(text, "triad.toml").unwrap();
        assert_eq!(p, streaming_kernel("triad", &m).unwrap());
    }

    #[test]
    fn unknown_builtin_lists_names() {
        let m = MachineModel::a64fx();
        let err = builtin_kernel("nope", &m).unwrap_err().to_string();
        assert!(err.contains("triad") && err.contains("dw_riri"));
    }
}
