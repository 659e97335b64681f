//! Write every report for the bundled demo snapshot into a directory
//! (default `demo-reports`), as the `reproduce` command does.

use std::path::PathBuf;

use clap::Parser;
use covid_forensics::cli::{execute, Cli};

fn main() -> covid_forensics::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map_or_else(|| PathBuf::from("demo-reports"), PathBuf::from);
    let out = out.to_string_lossy().into_owned();
    execute(Cli::parse_from([
        "covid-forensics",
        "reproduce",
        "--no-timestamp",
        "--out",
        &out,
    ]))
}
