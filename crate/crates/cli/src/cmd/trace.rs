use std::path::PathBuf;

use clap::{Args, Subcommand};
use ecmkit::cache_sim::AccessTrace;
use ecmkit::lc_dw::{DwTrace, LatticeGeometry, Layout};
use ecmkit::sparse::{read_matrix_market, to_sell};
use ecmkit::spmv::{spmv_trace_crs, spmv_trace_sell, SpmvConfig};
use serde::Serialize;
use serde_json::json;

use super::args_json;
use crate::error::Result;
use crate::report::{InputDigest, Report};

#[derive(Debug, Args, Serialize)]
pub struct TraceArgs {
    #[command(subcommand)]
    pub kind: TraceKind,
    /// Trace file to write.
    #[arg(long, global = true, required = false, default_value = "trace.bin")]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceKind {
    /// Domain-wall hopping term, one static block of virtual sites per core.
    Dw {
        #[arg(long, default_value = "24,24,24,24,8")]
        geom: String,
        #[arg(long, default_value = "riri")]
        layout: Layout,
        #[arg(long, default_value_t = 1)]
        cores: usize,
    },
    /// SpMV in CRS, or SELL-C-sigma when --C is given.
    Spmv {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long = "C", value_name = "C")]
        c: Option<usize>,
        #[arg(long)]
        sigma: Option<usize>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
}

pub fn run(a: TraceArgs) -> Result<()> {
    let args = args_json(&a);
    let mut digest = InputDigest::new("trace", &args);
    let (trace, units) = match &a.kind {
        TraceKind::Dw { geom, layout, cores } => {
            let g = LatticeGeometry::parse(geom, *layout)?;
            (AccessTrace::collect(&DwTrace::new(&g, (*cores).max(1))), g.lups() as f64)
        }
        TraceKind::Spmv { matrix, c, sigma, threads } => {
            digest.file(matrix)?;
            let m = read_matrix_market(matrix)?;
            let cfg = SpmvConfig::new(1, *threads);
            let t = match c {
                None => spmv_trace_crs(&m, &cfg).0,
                Some(c) => spmv_trace_sell(&to_sell(&m, *c, sigma.unwrap_or(1))?, &cfg).0,
            };
            (t, m.nnz() as f64)
        }
    };
    trace.save(&a.out)?;
    let mut r = Report::new("trace", args, digest);
    r.text("file").num("cores", "cores").num("events", "accesses").num("units", "unit");
    r.row(vec![
        json!(a.out.display().to_string()),
        json!(trace.streams.len()),
        json!(trace.len()),
        json!(units),
    ])?;
    r.emit(None)
}
