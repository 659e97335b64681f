//! Generate a fictional input snapshot (both epidemic formats, democracy
//! scores, covariates and aliases) into a directory.

use std::path::PathBuf;

use covid_forensics::ingest::{default_end_date, load_dataset, DataSource, SourcePaths};
use covid_forensics::synth::write_demo_snapshot;

fn main() -> covid_forensics::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map_or_else(|| PathBuf::from("demo-snapshot"), PathBuf::from);
    write_demo_snapshot(&dir, 20200630)?;
    let data = load_dataset(
        &SourcePaths::from_dir(&dir),
        DataSource::Jhu,
        default_end_date(),
    )?;
    println!(
        "wrote {} ({} countries, snapshot {})",
        dir.display(),
        data.countries.len(),
        data.snapshot
    );
    Ok(())
}
