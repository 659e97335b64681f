//! Load the bundled demo snapshot from both epidemic sources and compare.

use covid_forensics::cli::bundled_demo_dir;
use covid_forensics::ingest::{default_end_date, load_dataset, DataSource, SourcePaths};

fn main() -> covid_forensics::Result<()> {
    let paths = SourcePaths::from_dir(&bundled_demo_dir());
    for source in [DataSource::Jhu, DataSource::Ecdc] {
        let data = load_dataset(&paths, source, default_end_date())?;
        let cases: u64 = data
            .countries
            .iter()
            .filter_map(|c| c.series.cum_cases.last())
            .sum();
        println!(
            "{source:?}: snapshot {}, {} countries, {} dropped, {cases} cumulative cases",
            data.snapshot,
            data.countries.len(),
            data.drops.total()
        );
        if let Some(c) = data.countries.first() {
            println!(
                "  first country {} [{}], population {:?}, latitude {:?}, {} days",
                c.series.name,
                c.country_id(),
                c.series.population,
                c.series.latitude,
                c.series.len()
            );
        }
    }
    Ok(())
}
