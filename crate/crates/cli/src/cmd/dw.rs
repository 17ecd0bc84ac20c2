use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use ecmkit::ecm::predict;
use ecmkit::lc_dw::{
    dw_ecm_profile, dw_matrix, dw_site_reference, flops_per_lup, lc_analyze, reference_times,
    Compiler, DwOperator, FermionField, GaugeField, LatticeGeometry, Layout, LcMode,
    MATRIX_DIM_LIMIT, SPINOR_LEN,
};
use serde::Serialize;
use serde_json::{json, Value};

use super::{args_json, ensure, load_machine};
use crate::error::{CliError, Result};
use crate::report::{check_out, opt, InputDigest, Report};

/// Sites compared against the dense reference when the explicit matrix is
/// too large.
const ORACLE_SITES: usize = 64;
const ORACLE_TOL: f64 = 1e-12;

#[derive(Debug, Args, Serialize)]
pub struct DwArgs {
    /// Lx,Ly,Lz,Lt,Ls
    #[arg(long, default_value = "24,24,24,24,8")]
    pub geom: String,
    /// riri or rrii.
    #[arg(long, default_value = "riri")]
    pub layout: Layout,
    /// Compare the kernel with the explicit operator.
    #[arg(long)]
    pub check_oracle: bool,
    /// Add layer-condition and ECM columns.
    #[arg(long)]
    pub lc: bool,
    /// Cores sharing the last-level cache.
    #[arg(long, default_value_t = 1)]
    pub cores: u32,
    /// In-core times to use for the ECM columns: gcc or fcc.
    #[arg(long, default_value = "gcc")]
    pub compiler: String,
    #[arg(long, default_value = "a64fx")]
    pub machine: String,
    /// Seed of the random gauge and fermion fields.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Timed repetitions; 0 skips timing so the report is byte-stable.
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn run(a: DwArgs) -> Result<()> {
    check_out(a.out.as_deref())?;
    let args = args_json(&a);
    let mut digest = InputDigest::new("dw", &args);
    let model = load_machine(&a.machine, &mut digest)?;
    let geom = LatticeGeometry::parse(&a.geom, a.layout)?;
    let compiler = match a.compiler.as_str() {
        "gcc" => Compiler::Gcc,
        "fcc" => Compiler::Fcc,
        other => return Err(CliError::Validation(format!("unknown --compiler `{other}` (gcc, fcc)"))),
    };
    ensure(a.cores >= 1 && a.cores <= model.cores_per_domain, || {
        format!("--cores must be in 1..={}", model.cores_per_domain)
    })?;

    let u = GaugeField::random(&geom, a.seed);
    let psi = FermionField::random(&geom, a.seed.wrapping_add(1));
    let op = DwOperator::new(&u, &geom)?;
    let input = op.pack(&psi)?;
    let mut out = vec![0.0; input.len()];
    op.apply_packed(&input, &mut out)?;
    let mut best = f64::INFINITY;
    for _ in 0..a.reps {
        let t0 = Instant::now();
        op.apply_packed(&input, &mut out)?;
        best = best.min(t0.elapsed().as_secs_f64());
    }
    let flops = flops_per_lup(geom.layout);
    let lups = geom.lups() as f64;

    let (oracle, err) = if a.check_oracle {
        let got = op.unpack(&out);
        let (kind, err) = oracle_error(&u, &psi, &got, &geom)?;
        if !(err <= ORACLE_TOL) {
            return Err(CliError::Internal(format!(
                "kernel differs from the {kind} oracle by {err:e}"
            )));
        }
        (json!(kind), json!(err))
    } else {
        (json!("none"), Value::Null)
    };

    let mut r = Report::new("dw", args, digest);
    r.text("geometry")
        .text("layout")
        .num("lups", "LUP")
        .num("flops_nominal", "flop/LUP")
        .num("flops_executed", "flop/LUP")
        .num("time", "s")
        .num("gflops", "Gflop/s")
        .text("oracle")
        .num("oracle_rel_err", "1");
    let mut row = vec![
        json!(geometry_label(&geom)),
        json!(geom.layout.name()),
        json!(geom.lups()),
        json!(flops.nominal),
        json!(flops.executed),
        if a.reps == 0 { Value::Null } else { json!(best) },
        if a.reps == 0 { Value::Null } else { json!(flops.nominal as f64 * lups / best / 1e9) },
        oracle,
        err,
    ];
    if a.lc {
        let llc = model.last_cache().capacity_bytes as f64;
        let lc = lc_analyze(&geom, llc, LcMode::Vectorized, a.cores);
        let times = reference_times(geom.layout, compiler).in_core();
        let name = format!("dw_{}", geom.layout.name());
        let p = predict(&dw_ecm_profile(&name, &geom, times, &model, a.cores), &model)?;
        let t_n = p.saturation.as_ref().map(|s| s.t_at(a.cores));
        r.num("cores", "cores")
            .text("lc_condition")
            .num("lc_share", "B")
            .num("V_Mem", "B/LUP")
            .num("T_L2", "cy/LUP")
            .num("T_Mem", "cy/LUP")
            .num("T_ECM_Mem", "cy/LUP")
            .num("T_ECM_cores", "cy/LUP")
            .num("gflops_ecm", "Gflop/s");
        row.extend([
            json!(a.cores),
            json!(lc.satisfied.label()),
            json!(lc.share_bytes),
            json!(lc.v_bytes_per_lup),
            opt(p.t_l2),
            opt(p.t_mem),
            opt(p.t_ecm_mem),
            opt(t_n),
            opt(t_n.map(|t| flops.nominal as f64 * model.clock_hz / t / 1e9)),
        ]);
    }
    r.row(row)?;
    r.emit(a.out.as_deref())
}

/// Full explicit matrix when it fits, otherwise the dense per-site
/// reference on a spread of sites.
fn oracle_error(
    u: &GaugeField,
    psi: &FermionField,
    got: &FermionField,
    geom: &LatticeGeometry,
) -> Result<(&'static str, f64)> {
    if geom.lups() * SPINOR_LEN * 2 <= MATRIX_DIM_LIMIT {
        let m = dw_matrix(u, geom)?;
        let x = psi.to_real();
        let y: Vec<f64> = (0..m.nrows)
            .map(|i| {
                let (c, v) = m.row(i);
                c.iter().zip(v).map(|(&j, a)| a * x[j as usize]).sum()
            })
            .collect();
        let want = FermionField::from_real(geom, &y)?;
        return Ok(("matrix", got.rel_diff(&want)));
    }
    let v4 = geom.v4();
    let (mut num, mut den) = (0.0, 0.0);
    let n = ORACLE_SITES.min(v4);
    for k in 0..n {
        let site = k * v4 / n;
        let want = dw_site_reference(u, psi, geom, site)?;
        for s in 0..geom.ls {
            for (x, w) in got.spinor(site, s).iter().zip(&want[s * SPINOR_LEN..(s + 1) * SPINOR_LEN]) {
                num += (x - w).norm_sqr();
                den += w.norm_sqr();
            }
        }
    }
    Ok(("sampled", if den > 0.0 { (num / den).sqrt() } else { num.sqrt() }))
}

pub fn geometry_label(g: &LatticeGeometry) -> String {
    let [x, y, z, t] = g.dims;
    format!("{x}x{y}x{z}x{t}x{}", g.ls)
}
