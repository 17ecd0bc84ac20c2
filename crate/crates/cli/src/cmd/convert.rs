use std::path::PathBuf;

use clap::Args;
use ecmkit::sparse::{rcm_reorder, read_matrix_market, to_sell};
use serde::Serialize;
use serde_json::json;

use super::args_json;
use crate::error::Result;
use crate::report::{check_out, InputDigest, Report};

#[derive(Debug, Args, Serialize)]
pub struct ConvertArgs {
    /// Matrix Market input.
    #[arg(long)]
    pub mtx: PathBuf,
    /// Chunk height.
    #[arg(long = "C", value_name = "C")]
    pub c: usize,
    /// Sorting scope in rows.
    #[arg(long)]
    pub sigma: usize,
    /// Apply reverse Cuthill-McKee before conversion.
    #[arg(long)]
    pub rcm: bool,
    /// Binary SELL output file.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// Summary report (.json or .csv); JSON on stdout if absent.
    #[arg(long)]
    #[serde(skip)]
    pub report: Option<PathBuf>,
}

pub fn run(a: ConvertArgs) -> Result<()> {
    check_out(a.report.as_deref())?;
    let args = args_json(&a);
    let mut digest = InputDigest::new("convert", &args);
    digest.file(&a.mtx)?;
    let mut m = read_matrix_market(&a.mtx)?;
    let bw_before = m.bandwidth();
    if a.rcm {
        m = rcm_reorder(&m)?.0;
    }
    let s = to_sell(&m, a.c, a.sigma)?;
    s.save(&a.out)?;

    let mut r = Report::new("convert", args, digest);
    r.text("matrix")
        .num("nrows", "rows")
        .num("ncols", "columns")
        .num("nnz", "entries")
        .num("C", "rows")
        .num("sigma", "rows")
        .num("chunks", "chunks")
        .num("slots", "entries")
        .num("beta", "1")
        .num("bandwidth_in", "columns")
        .num("bandwidth", "columns");
    r.row(vec![
        json!(a.mtx.display().to_string()),
        json!(m.nrows),
        json!(m.ncols),
        json!(m.nnz()),
        json!(s.c),
        json!(s.sigma),
        json!(s.nchunks()),
        json!(s.slots()),
        json!(s.beta()),
        json!(bw_before),
        json!(m.bandwidth()),
    ])?;
    r.emit(a.report.as_deref())
}
