mod cmd;
mod error;
mod report;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::cmd::{
    convert::ConvertArgs, dw::DwArgs, lc_scan::LcScanArgs, machine::MachineArgs,
    predict::PredictArgs, simulate::SimulateArgs, spmv::SpmvArgs, trace::TraceArgs,
};

#[derive(Debug, Parser)]
#[command(name = "ecmkit", version, about = "ECM performance models, sparse kernels and cache simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// ECM prediction for a built-in or file-based kernel profile.
    Predict(PredictArgs),
    /// Convert a Matrix Market file to a binary SELL-C-sigma file.
    Convert(ConvertArgs),
    /// Run and time SpMV in CRS or SELL-C-sigma.
    Spmv(SpmvArgs),
    /// Apply the domain-wall hopping operator, optionally check it and
    /// evaluate layer conditions.
    Dw(DwArgs),
    /// Layer-condition predictions against cache simulation over a
    /// lattice extent or core-count range.
    LcScan(LcScanArgs),
    /// Run the cache simulator on a trace file.
    Simulate(SimulateArgs),
    /// Write an access trace file for a kernel.
    Trace(TraceArgs),
    /// Print a built-in machine file.
    Machine(MachineArgs),
}

fn run(cli: Cli) -> error::Result<()> {
    match cli.command {
        Command::Predict(a) => cmd::predict::run(a),
        Command::Convert(a) => cmd::convert::run(a),
        Command::Spmv(a) => cmd::spmv::run(a),
        Command::Dw(a) => cmd::dw::run(a),
        Command::LcScan(a) => cmd::lc_scan::run(a),
        Command::Simulate(a) => cmd::simulate::run(a),
        Command::Trace(a) => cmd::trace::run(a),
        Command::Machine(a) => cmd::machine::run(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.use_stderr() {
                true => ExitCode::from(2),
                false => ExitCode::SUCCESS,
            };
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
        Err(_) => ExitCode::from(4),
    }
}
