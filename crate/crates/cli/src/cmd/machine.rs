use clap::Args;
use ecmkit::MachineModel;
use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Args, Serialize)]
pub struct MachineArgs {
    /// Built-in machine name.
    #[arg(default_value = "a64fx")]
    pub name: String,
}

pub fn run(a: MachineArgs) -> Result<()> {
    print!("{}", MachineModel::builtin(&a.name)?.to_toml_string());
    Ok(())
}
