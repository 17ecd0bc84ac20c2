use std::path::PathBuf;

use clap::Args;
use ecmkit::{predict_with, Overlap, Residency};
use serde::Serialize;
use serde_json::json;

use super::{args_json, ensure, load_kernel, load_machine};
use crate::error::Result;
use crate::report::{check_out, opt, InputDigest, Report};

#[derive(Debug, Args, Serialize)]
pub struct PredictArgs {
    /// Built-in machine name or machine file.
    #[arg(long, default_value = "a64fx")]
    pub machine: String,
    /// Built-in kernel name or kernel profile file.
    #[arg(long)]
    pub kernel: String,
    /// Cores of one domain for the scaled prediction.
    #[arg(long, default_value_t = 1)]
    pub cores: u32,
    /// Data residency; defaults to the deepest level the profile covers.
    #[arg(long)]
    pub residency: Option<Residency>,
    /// partial_l1, sum_all or full_overlap.
    #[arg(long, default_value = "partial_l1")]
    pub overlap: Overlap,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn run(a: PredictArgs) -> Result<()> {
    check_out(a.out.as_deref())?;
    let args = args_json(&a);
    let mut digest = InputDigest::new("predict", &args);
    let model = load_machine(&a.machine, &mut digest)?;
    let profile = load_kernel(&a.kernel, &model, &mut digest)?;
    ensure(a.cores >= 1 && a.cores <= model.cores_per_domain, || {
        format!("--cores must be in 1..={}", model.cores_per_domain)
    })?;
    let p = predict_with(&profile, &model, a.overlap)?;
    let residency = a.residency.unwrap_or(match (p.t_ecm_l2, p.t_ecm_mem) {
        (_, Some(_)) => Residency::Mem,
        (Some(_), None) => Residency::L2,
        _ => Residency::L1,
    });
    let t = p.t_ecm(residency)?;
    // in-cache work scales with cores, memory-bound work up to n_sat
    let (n_sat, t_n) = match (&p.saturation, residency) {
        (Some(s), Residency::Mem) => (Some(s.n_sat), s.t_at(a.cores)),
        _ => (None, t / a.cores as f64),
    };

    let cy = profile.unit.cycles_label();
    let mut r = Report::new("predict", args, digest);
    r.text("kernel").text("machine").text("unit").text("residency");
    for c in ["T_OL", "T_L1_LD", "T_L1_ST", "T_L2", "T_Mem", "L1", "L2", "MEM", "T_ECM"] {
        r.num(c, cy);
    }
    r.num("V_Mem", profile.unit.bytes_label())
        .num("n_sat", "cores")
        .num("cores", "cores")
        .num("T_ECM_cores", cy);
    r.row(vec![
        json!(profile.name),
        json!(model.name),
        json!(cy),
        json!(residency.label()),
        json!(p.t_c_ol),
        json!(p.t_l1_ld),
        json!(p.t_l1_st),
        opt(p.t_l2),
        opt(p.t_mem),
        json!(p.t_ecm_l1),
        opt(p.t_ecm_l2),
        opt(p.t_ecm_mem),
        json!(t),
        opt(p.v_mem),
        n_sat.map_or(serde_json::Value::Null, |n| json!(n)),
        json!(a.cores),
        json!(t_n),
    ])?;
    r.emit(a.out.as_deref())
}
