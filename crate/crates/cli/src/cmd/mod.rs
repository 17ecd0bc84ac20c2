pub mod convert;
pub mod dw;
pub mod lc_scan;
pub mod machine;
pub mod predict;
pub mod simulate;
pub mod spmv;
pub mod trace;

use std::path::Path;

use ecmkit::kernels::builtin_kernel;
use ecmkit::{KernelProfile, MachineModel};
use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};
use crate::report::InputDigest;

/// Arguments as JSON, used in the report and its digest.
pub fn args_json(args: &impl Serialize) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn looks_like_path(s: &str) -> bool {
    s.contains(['/', '\\']) || s.ends_with(".toml")
}

pub fn load_machine(name_or_path: &str, digest: &mut InputDigest) -> Result<MachineModel> {
    let p = Path::new(name_or_path);
    if p.is_file() {
        digest.file(p)?;
        return Ok(MachineModel::load(p)?);
    }
    if looks_like_path(name_or_path) {
        return Err(CliError::Validation(format!("machine file {name_or_path} not found")));
    }
    Ok(MachineModel::builtin(name_or_path)?)
}

pub fn load_kernel(
    name_or_path: &str,
    model: &MachineModel,
    digest: &mut InputDigest,
) -> Result<KernelProfile> {
    let p = Path::new(name_or_path);
    if p.is_file() {
        digest.file(p)?;
        return Ok(KernelProfile::load(p)?);
    }
    if looks_like_path(name_or_path) {
        return Err(CliError::Validation(format!("kernel file {name_or_path} not found")));
    }
    Ok(builtin_kernel(name_or_path, model)?)
}

/// Parses `a:b` or `a:b:step` (inclusive); a single number is a one-point range.
pub fn parse_range(s: &str, default_step: usize) -> std::result::Result<Vec<usize>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("`{t}` in range `{s}` is not a non-negative integer"))
    };
    let (lo, hi, step) = match parts.as_slice() {
        [a] => (num(a)?, num(a)?, 1),
        [a, b] => (num(a)?, num(b)?, default_step),
        [a, b, c] => (num(a)?, num(b)?, num(c)?),
        _ => return Err(format!("range `{s}` must look like a:b or a:b:step")),
    };
    if step == 0 || lo > hi {
        return Err(format!("range `{s}` is empty"));
    }
    Ok((lo..=hi).step_by(step).collect())
}

pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(CliError::Validation(msg()))
    }
}
