use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use ecmkit::sparse::{rcm_reorder, read_matrix_market, to_sell, CrsMatrix, PartitionMode, SellMatrix};
use ecmkit::spmv::{crs_traffic, sell_traffic, spmv_crs, spmv_sell, SpmvConfig};

use serde::Serialize;
use serde_json::{json, Value};

use super::{args_json, ensure};
use crate::error::Result;
use crate::report::{check_out, InputDigest, Report};

#[derive(Debug, Args, Serialize)]
pub struct SpmvArgs {
    /// Matrix Market (.mtx) or binary SELL (.sell) file.
    #[arg(long)]
    pub matrix: PathBuf,
    /// Chunk height; with a .mtx input this selects SELL-C-sigma over CRS.
    #[arg(long = "C", value_name = "C")]
    pub c: Option<usize>,
    /// Sorting scope for the conversion (default 1).
    #[arg(long)]
    pub sigma: Option<usize>,
    /// Interleaved partial sums per row.
    #[arg(long, default_value_t = 1)]
    pub acc: usize,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    /// Timed repetitions; 0 runs once without timing so the report is
    /// byte-stable.
    #[arg(long, default_value_t = 10)]
    pub reps: usize,
    /// by_rows or by_nnz.
    #[arg(long, default_value = "by_rows")]
    pub partition: PartitionMode,
    /// Apply reverse Cuthill-McKee to a .mtx input first.
    #[arg(long)]
    pub rcm: bool,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

enum Format {
    Crs(CrsMatrix),
    Sell(SellMatrix),
}

pub fn run(a: SpmvArgs) -> Result<()> {
    check_out(a.out.as_deref())?;
    let args = args_json(&a);
    let mut digest = InputDigest::new("spmv", &args);
    digest.file(&a.matrix)?;
    let is_sell = a.matrix.extension().is_some_and(|e| e == "sell");
    ensure(!(is_sell && (a.c.is_some() || a.sigma.is_some() || a.rcm)), || {
        "--C, --sigma and --rcm apply to .mtx inputs only".into()
    })?;
    let fmt = if is_sell {
        Format::Sell(SellMatrix::load(&a.matrix)?)
    } else {
        let mut m = read_matrix_market(&a.matrix)?;
        if a.rcm {
            m = rcm_reorder(&m)?.0;
        }
        match (a.c, a.sigma) {
            (None, None) => Format::Crs(m),
            (c, sigma) => Format::Sell(to_sell(&m, c.unwrap_or(1), sigma.unwrap_or(1))?),
        }
    };
    let cfg = SpmvConfig {
        partition_mode: a.partition,
        ..SpmvConfig::new(a.acc, a.threads)
    };

    let (nrows, ncols, nnz) = match &fmt {
        Format::Crs(m) => (m.nrows, m.ncols, m.nnz()),
        Format::Sell(s) => (s.nrows_padded, s.ncols, s.nnz),
    };
    let x: Vec<f64> = (0..ncols).map(|i| 1.0 + (i % 7) as f64 / 8.0).collect();
    let mut y = vec![0.0; nrows];
    let mut once = || -> Result<()> {
        match &fmt {
            Format::Crs(m) => spmv_crs(m, &x, &mut y, &cfg)?,
            Format::Sell(s) => spmv_sell(s, &x, &mut y, &cfg)?,
        }
        Ok(())
    };
    once()?;
    let mut best = f64::INFINITY;
    for _ in 0..a.reps {
        let t0 = Instant::now();
        once()?;
        best = best.min(t0.elapsed().as_secs_f64());
    }
    let gflops = match a.reps {
        0 => Value::Null,
        _ => json!(2.0 * nnz as f64 / best / 1e9),
    };
    let time = if a.reps == 0 { Value::Null } else { json!(best) };

    let (format, c, sigma, beta, traffic) = match &fmt {
        Format::Crs(m) => ("CRS", 1, 1, 1.0, crs_traffic(m)),
        Format::Sell(s) => ("SELL", s.c, s.sigma, s.beta(), sell_traffic(s)),
    };
    let mut r = Report::new("spmv", args, digest);
    r.text("matrix")
        .text("format")
        .num("C", "rows")
        .num("sigma", "rows")
        .num("threads", "threads")
        .num("gflops", "Gflop/s")
        .num("intensity", "flop/B")
        .num("beta", "1")
        .num("acc", "accumulators")
        .num("nnz", "entries")
        .num("time", "s");
    r.row(vec![
        json!(a.matrix.display().to_string()),
        json!(format),
        json!(c),
        json!(sigma),
        json!(a.threads),
        gflops,
        json!(traffic.intensity),
        json!(beta),
        json!(a.acc),
        json!(nnz),
        time,
    ])?;
    r.emit(a.out.as_deref())
}
