use std::path::PathBuf;

use clap::Args;
use ecmkit::cache_sim::{simulate, AccessTrace, BoundaryTraffic, SimConfig};
use serde::Serialize;
use serde_json::json;

use super::{args_json, load_machine};
use crate::error::{CliError, Result};
use crate::report::{check_out, InputDigest, Report};

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    /// Binary trace file.
    #[arg(long)]
    pub trace: PathBuf,
    /// Simulator configuration (TOML); the machine's L1 and L2 otherwise.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "a64fx")]
    pub machine: String,
    /// Work units in the trace, for the per-unit column.
    #[arg(long, default_value_t = 1.0)]
    pub units: f64,
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
}

pub fn run(a: SimulateArgs) -> Result<()> {
    check_out(a.out.as_deref())?;
    let args = args_json(&a);
    let mut digest = InputDigest::new("simulate", &args);
    if !(a.units > 0.0) {
        return Err(CliError::Validation("--units must be positive".into()));
    }
    let cfg = match &a.config {
        Some(p) => {
            digest.file(p)?;
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            toml::from_str::<SimConfig>(&text)
                .map_err(|e| CliError::Validation(format!("{}: {e}", p.display())))?
        }
        None => SimConfig::from_machine(&load_machine(&a.machine, &mut digest)?),
    };
    digest.file(&a.trace)?;
    let trace = AccessTrace::load(&a.trace)?;
    let t = simulate(&trace, &cfg)?.with_divisor(a.units);

    let mut r = Report::new("simulate", args, digest);
    r.text("boundary")
        .text("core")
        .num("load", "B")
        .num("store", "B")
        .num("total", "B")
        .num("per_unit", "B/unit");
    let units = a.units;
    let mut push = |b: &BoundaryTraffic| -> Result<()> {
        let total = b.load_bytes + b.store_bytes;
        r.row(vec![
            json!(b.name),
            json!("all"),
            json!(b.load_bytes),
            json!(b.store_bytes),
            json!(total),
            json!(total as f64 / units),
        ])?;
        for (c, &(ld, st)) in b.per_core.iter().enumerate() {
            r.row(vec![
                json!(b.name),
                json!(c.to_string()),
                json!(ld),
                json!(st),
                json!(ld + st),
                json!((ld + st) as f64 / units),
            ])?;
        }
        Ok(())
    };
    push(&t.l1_l2)?;
    push(&t.l2_mem)?;
    r.emit(a.out.as_deref())
}
