//! Layer conditions and data volumes of the domain-wall kernel.
//!
//! Per lattice site update the kernel reads eight link matrices (9
//! complex each, shared by all `Ls` sites of the fifth dimension), eight
//! neighbor spinors and writes one output spinor (12 complex each). The
//! volume crossing a cache boundary depends on which of these neighbor
//! spinors are still cached from earlier updates.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::geometry::{Layout, LatticeGeometry};
use crate::error::DwError;

const COMPLEX: f64 = 16.0;
const LINK: f64 = 9.0;
const SPINOR: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LcCondition {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "LC_s")]
    S,
    #[serde(rename = "LC_x")]
    X,
    #[serde(rename = "LC_y")]
    Y,
    #[serde(rename = "LC_z")]
    Z,
    #[serde(rename = "LC_t")]
    T,
}

impl LcCondition {
    pub const ALL: [LcCondition; 6] = [
        LcCondition::None,
        LcCondition::S,
        LcCondition::X,
        LcCondition::Y,
        LcCondition::Z,
        LcCondition::T,
    ];

    pub fn label(self) -> &'static str {
        match self {
            LcCondition::None => "none",
            LcCondition::S => "LC_s",
            LcCondition::X => "LC_x",
            LcCondition::Y => "LC_y",
            LcCondition::Z => "LC_z",
            LcCondition::T => "LC_t",
        }
    }

    /// Neighbor spinors that still come from the next level.
    pub fn spinors_loaded(self) -> f64 {
        match self {
            LcCondition::None | LcCondition::S => 8.0,
            LcCondition::X => 7.0,
            LcCondition::Y => 5.0,
            LcCondition::Z => 3.0,
            LcCondition::T => 1.0,
        }
    }
}

impl fmt::Display for LcCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LcMode {
    Scalar,
    #[default]
    Vectorized,
}

impl FromStr for LcMode {
    type Err = DwError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "scalar" => Ok(LcMode::Scalar),
            "vectorized" | "simd" => Ok(LcMode::Vectorized),
            _ => Err(DwError::Geometry(format!(
                "unknown mode `{s}` (expected scalar or vectorized)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LcRow {
    pub condition: LcCondition,
    /// Smallest cache share (exclusive) that satisfies the condition.
    pub threshold_bytes: f64,
    /// Volume from the next level when this is the strongest satisfied condition.
    pub v_bytes_per_lup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LcReport {
    pub mode: LcMode,
    pub cache_bytes: f64,
    pub cores: u32,
    /// Cache share of one core.
    pub share_bytes: f64,
    pub write_allocate: bool,
    pub rows: Vec<LcRow>,
    pub satisfied: LcCondition,
    pub v_bytes_per_lup: f64,
}

impl LcReport {
    pub fn row(&self, c: LcCondition) -> &LcRow {
        &self.rows[c as usize]
    }

    /// Bytes stored to the next level per update, the output spinor.
    pub fn store_bytes_per_lup(&self) -> f64 {
        SPINOR * COMPLEX
    }

    pub fn load_bytes_per_lup(&self) -> f64 {
        self.v_bytes_per_lup - self.store_bytes_per_lup()
    }
}

/// Bytes touched per update when nothing is reused.
pub fn bytes_touched_per_lup() -> f64 {
    (8.0 * LINK + 8.0 * SPINOR + SPINOR) * COMPLEX
}

/// Volume per update with `k` neighbor spinors loaded.
fn volume(c: LcCondition, ls: f64, write_allocate: bool) -> f64 {
    let w = if write_allocate { 2.0 } else { 1.0 };
    let links = if c == LcCondition::None { 8.0 * LINK } else { 8.0 * LINK / ls };
    (links + c.spinors_loaded() * SPINOR + w * SPINOR) * COMPLEX
}

/// Thresholds and volumes for every condition, `none` first.
pub fn lc_table(geom: &LatticeGeometry, mode: LcMode, write_allocate: bool) -> Vec<LcRow> {
    let ls = geom.ls as f64;
    let [lx, ly, lz, _] = geom.dims.map(|d| d as f64);
    let links = 8.0 * LINK / ls;
    // one row of the condition: links, spinors kept in flight and the output
    let per = |kept: f64| (links + kept * SPINOR + SPINOR) * COMPLEX;
    let d = geom.layout.d();
    let thresholds = match mode {
        LcMode::Scalar => [
            0.0,
            bytes_touched_per_lup(),
            2.0 * ls * per(8.0),
            2.0 * ls * lx * per(7.0),
            2.0 * ls * lx * ly * per(5.0),
            2.0 * ls * lx * ly * lz * per(3.0),
        ],
        LcMode::Vectorized => [
            0.0,
            4.0 * bytes_touched_per_lup(),
            d * 8.0 * ls * per(8.0),
            d * 8.0 * ls * lx * per(7.0),
            8.0 * ls * lx * ly * per(5.0),
            4.0 * ls * lx * ly * lz * per(3.0),
        ],
    };
    LcCondition::ALL
        .iter()
        .zip(thresholds)
        .map(|(&c, t)| LcRow {
            condition: c,
            threshold_bytes: t,
            v_bytes_per_lup: volume(c, ls, write_allocate),
        })
        .collect()
}

/// Strongest condition satisfied by a cache of `cache_bytes` shared by `cores`.
pub fn lc_analyze(geom: &LatticeGeometry, cache_bytes: f64, mode: LcMode, cores: u32) -> LcReport {
    lc_analyze_with(geom, cache_bytes, mode, cores, true)
}

pub fn lc_analyze_with(
    geom: &LatticeGeometry,
    cache_bytes: f64,
    mode: LcMode,
    cores: u32,
    write_allocate: bool,
) -> LcReport {
    let cores = cores.max(1);
    let share = cache_bytes / cores as f64;
    let rows = lc_table(geom, mode, write_allocate);
    let hit = rows
        .iter()
        .rev()
        .find(|r| r.condition == LcCondition::None || share > r.threshold_bytes)
        .copied()
        .expect("none always holds");
    LcReport {
        mode,
        cache_bytes,
        cores,
        share_bytes: share,
        write_allocate,
        rows,
        satisfied: hit.condition,
        v_bytes_per_lup: hit.v_bytes_per_lup,
    }
}

/// Nominal floating-point operations per update.
pub const FLOPS_NOMINAL: u32 = 96 + 1056 + 168;
/// Complex multiply-add on interleaved data executes extra operations.
pub const FLOPS_RIRI_EXTRA: u32 = 2 * 3 * 2 * 8;
/// One 3x3 complex matrix times two 3-vectors.
pub const FLOPS_PER_DIRECTION: u32 = 2 * (9 * 6 + 6 * 2);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FlopsPerLup {
    pub nominal: u32,
    pub executed: u32,
}

pub fn flops_per_lup(layout: Layout) -> FlopsPerLup {
    FlopsPerLup {
        nominal: FLOPS_NOMINAL,
        executed: match layout {
            Layout::Riri => FLOPS_NOMINAL + FLOPS_RIRI_EXTRA,
            Layout::Rrii => FLOPS_NOMINAL,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(layout: Layout) -> LatticeGeometry {
        LatticeGeometry::new([24; 4], 8, layout).unwrap()
    }

    #[test]
    fn volumes_at_ls8() {
        let rows = lc_table(&g(Layout::Riri), LcMode::Vectorized, true);
        let v: Vec<f64> = rows.iter().map(|r| r.v_bytes_per_lup).collect();
        assert_eq!(v, vec![3072.0, 2064.0, 1872.0, 1488.0, 1104.0, 720.0]);
        assert_eq!(bytes_touched_per_lup(), 2880.0);
        assert_eq!(rows[1].threshold_bytes, 11520.0);
    }

    #[test]
    fn scalar_thresholds() {
        let rows = lc_table(&g(Layout::Riri), LcMode::Scalar, true);
        assert_eq!(rows[1].threshold_bytes, 2880.0);
        assert_eq!(rows[2].threshold_bytes, 2.0 * 8.0 * 117.0 * 16.0);
        assert_eq!(rows[5].threshold_bytes, 2.0 * 8.0 * 24f64.powi(3) * 57.0 * 16.0);
    }

    #[test]
    fn small_shares() {
        let r = lc_analyze(&g(Layout::Riri), 4096.0, LcMode::Scalar, 1);
        assert_eq!(r.satisfied, LcCondition::S);
        assert_eq!(r.v_bytes_per_lup, (72.0 / 8.0 + 96.0 + 24.0) * 16.0);
        let r = lc_analyze(&g(Layout::Riri), 4096.0, LcMode::Vectorized, 1);
        assert_eq!(r.satisfied, LcCondition::None);
        assert_eq!(r.v_bytes_per_lup, 3072.0);
    }

    #[test]
    fn l2_share_per_core() {
        let geom = g(Layout::Riri);
        let l2 = 8.0 * 1024.0 * 1024.0;
        let at = |n| lc_analyze(&geom, l2, LcMode::Vectorized, n).satisfied;
        assert_eq!(at(1), LcCondition::Y);
        assert_eq!(at(3), LcCondition::Y);
        assert_eq!(at(4), LcCondition::X);
        assert_eq!(at(5), LcCondition::X);
        assert_eq!(at(12), LcCondition::X);
        assert_eq!(lc_analyze(&geom, 65536.0, LcMode::Vectorized, 1).satisfied, LcCondition::S);
        let y = lc_analyze(&geom, l2, LcMode::Vectorized, 1);
        assert_eq!(y.row(LcCondition::Y).threshold_bytes, 2_580_480.0);
        assert_eq!(y.v_bytes_per_lup, 1488.0);
    }

    #[test]
    fn vectorized_is_lanes_times_scalar_on_a_partition() {
        for layout in [Layout::Riri, Layout::Rrii] {
            let geom = LatticeGeometry::new([8, 12, 16, 20], 4, layout).unwrap();
            let local = LatticeGeometry {
                dims: geom.local_dims(),
                ..geom
            };
            let vec = lc_table(&geom, LcMode::Vectorized, true);
            let sca = lc_table(&local, LcMode::Scalar, true);
            let lanes = layout.vl_sites() as f64;
            for c in [LcCondition::X, LcCondition::Y, LcCondition::Z, LcCondition::T] {
                let (v, s) = (vec[c as usize].threshold_bytes, sca[c as usize].threshold_bytes);
                assert!((v - lanes * s).abs() < 1e-6, "{layout} {c}");
            }
        }
    }

    #[test]
    fn flops() {
        assert_eq!(FLOPS_NOMINAL, 1320);
        assert_eq!(flops_per_lup(Layout::Riri).executed, 1416);
        assert_eq!(flops_per_lup(Layout::Rrii).executed, 1320);
        assert_eq!(FLOPS_PER_DIRECTION, 132);
    }
}
