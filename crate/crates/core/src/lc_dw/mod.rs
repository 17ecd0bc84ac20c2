//! Domain-wall fermion hopping operator: reference kernel in two SIMD
//! layouts, explicit matrix oracle, layer conditions, access traces and
//! ECM profiles.

mod apply;
mod field;
mod gamma;
mod geometry;
mod lc;
mod profile;
mod simd;
mod trace;

pub use apply::{direction, dw_apply, dw_matrix, dw_site_reference, DwOperator, DIRECTIONS, MATRIX_DIM_LIMIT};
pub use field::{FermionField, GaugeField, LINK_LEN, SPINOR_LEN};
pub use gamma::{gamma_perm, one_plus, Gamma, GammaPerm, Phase, GAMMA};
pub use geometry::{LatticeGeometry, Layout};
pub use lc::{
    bytes_touched_per_lup, flops_per_lup, lc_analyze, lc_analyze_with, lc_table, FlopsPerLup,
    LcCondition, LcMode, LcReport, LcRow, FLOPS_NOMINAL, FLOPS_PER_DIRECTION, FLOPS_RIRI_EXTRA,
};
pub use profile::{
    dw_ecm_profile, reference_profile, reference_times, Compiler, ReferenceTimes, REFERENCE_TIMES,
};
pub use simd::{LaneVec, Riri4, Rrii8};
pub use trace::{DwTrace, TAG_I, TAG_O, TAG_U};
