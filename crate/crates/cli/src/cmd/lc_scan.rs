use std::path::PathBuf;

use clap::{Args, ValueEnum};
use ecmkit::cache_sim::{simulate, SimConfig};
use ecmkit::lc_dw::{lc_analyze, lc_table, DwTrace, LatticeGeometry, Layout, LcMode};
use serde::Serialize;
use serde_json::{json, Value};

use super::{args_json, ensure, load_machine, parse_range};
use crate::cmd::dw::geometry_label;
use crate::error::{CliError, Result};
use crate::report::{check_out, opt, InputDigest, Report};

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Dim {
    X,
    Y,
    Z,
    T,
    S,
}

#[derive(Debug, Args, Serialize)]
pub struct LcScanArgs {
    /// Base lattice Lx,Ly,Lz,Lt,Ls.
    #[arg(long, default_value = "24,24,24,24,8")]
    pub geom: String,
    #[arg(long, default_value = "riri")]
    pub layout: Layout,
    /// Extent to vary; needs --range.
    #[arg(long, value_enum, requires = "range")]
    pub dim: Option<Dim>,
    /// Values of --dim as a:b[:step] (default step 4).
    #[arg(long, requires = "dim")]
    pub range: Option<String>,
    /// Core counts as a:b[:step].
    #[arg(long, default_value = "1")]
    pub cores: String,
    /// scalar or vectorized layer conditions.
    #[arg(long, default_value = "vectorized")]
    pub mode: LcMode,
    #[arg(long, default_value = "a64fx")]
    pub machine: String,
    /// Skip the cache simulation and report predictions only.
    #[arg(long)]
    pub model_only: bool,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn run(a: LcScanArgs) -> Result<()> {
    check_out(a.out.as_deref())?;
    let args = args_json(&a);
    let mut digest = InputDigest::new("lc-scan", &args);
    let model = load_machine(&a.machine, &mut digest)?;
    let base = LatticeGeometry::parse(&a.geom, a.layout)?;
    let cores = parse_range(&a.cores, 1).map_err(CliError::Validation)?;
    ensure(cores.iter().all(|&n| n >= 1 && n <= model.cores_per_domain as usize), || {
        format!("--cores must lie in 1..={}", model.cores_per_domain)
    })?;
    let values = match (&a.dim, &a.range) {
        (Some(_), Some(r)) => parse_range(r, 4).map_err(CliError::Validation)?,
        _ => vec![0],
    };
    let mut geoms = Vec::new();
    for v in values {
        let mut g = base;
        match a.dim {
            Some(Dim::X) => g.dims[0] = v,
            Some(Dim::Y) => g.dims[1] = v,
            Some(Dim::Z) => g.dims[2] = v,
            Some(Dim::T) => g.dims[3] = v,
            Some(Dim::S) => g.ls = v,
            None => {}
        }
        g.validate()?;
        geoms.push(g);
    }

    let cache = model.last_cache().capacity_bytes;
    let mut r = Report::new("lc-scan", args, digest);
    r.text("geometry")
        .num("Lx", "sites")
        .num("Ly", "sites")
        .num("Lz", "sites")
        .num("Lt", "sites")
        .num("Ls", "sites")
        .num("cores", "cores")
        .num("share", "B")
        .text("condition")
        .text("near_threshold")
        .num("V_pred", "B/LUP")
        .num("V_sim", "B/LUP")
        .num("V_sim_L2", "B/LUP")
        .num("deviation", "1");
    for g in &geoms {
        for &n in &cores {
            let lc = lc_analyze(g, cache as f64, a.mode, n as u32);
            let near = lc_table(g, a.mode, true)
                .iter()
                .skip(1)
                .any(|row| lc.share_bytes >= row.threshold_bytes / 2.0 && lc.share_bytes <= row.threshold_bytes);
            let (sim, sim_l2) = if a.model_only {
                (None, None)
            } else {
                let mut cfg = SimConfig::from_machine(&model);
                cfg.cores = Some(n);
                let t = simulate(&DwTrace::new(g, n), &cfg)?.with_divisor(g.lups() as f64);
                (Some(t.mem_bytes_per_unit()), Some(t.l2_bytes_per_unit()))
            };
            let [x, y, z, t] = g.dims;
            r.row(vec![
                json!(geometry_label(g)),
                json!(x),
                json!(y),
                json!(z),
                json!(t),
                json!(g.ls),
                json!(n),
                json!(lc.share_bytes),
                json!(lc.satisfied.label()),
                json!(near),
                json!(lc.v_bytes_per_lup),
                opt(sim),
                opt(sim_l2),
                sim.map_or(Value::Null, |s| json!((s - lc.v_bytes_per_lup) / lc.v_bytes_per_lup)),
            ])?;
        }
    }
    r.emit(a.out.as_deref())
}
