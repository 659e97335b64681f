//! Burden per million by regime class on the bundled demo snapshot.

use covid_forensics::cli::bundled_demo_dir;
use covid_forensics::ingest::{default_end_date, load_dataset, DataSource, SourcePaths};
use covid_forensics::smoothness::{regime_aggregate_series, summary_by_regime};

fn main() -> covid_forensics::Result<()> {
    let data = load_dataset(
        &SourcePaths::from_dir(&bundled_demo_dir()),
        DataSource::Jhu,
        default_end_date(),
    )?;
    let summary = summary_by_regime(&data);
    println!(
        "{:<18} {:>3} {:>22} {:>22}",
        "regime", "n", "cases/M median (IQR)", "deaths/M median (IQR)"
    );
    for r in &summary.regimes {
        let fmt = |d: Option<covid_forensics::smoothness::Distribution>| {
            d.map_or("-".to_string(), |d| {
                format!("{:.0} ({:.0}-{:.0})", d.median, d.q25, d.q75)
            })
        };
        println!(
            "{:<18} {:>3} {:>22} {:>22}",
            r.regime_class.label(),
            r.n_countries,
            fmt(r.cases_per_million),
            fmt(r.deaths_per_million)
        );
    }
    let s = summary.democracy_shares;
    println!(
        "democracies: {:.0}% of population, {:.0}% of cases, {:.0}% of deaths",
        100.0 * s.population,
        100.0 * s.cases,
        100.0 * s.deaths
    );
    let last = regime_aggregate_series(&data)
        .into_iter()
        .filter(|d| d.date == data.end_date)
        .collect::<Vec<_>>();
    for d in last {
        println!("{} CFR on {}: {:?}", d.regime_class.label(), d.date, d.cfr);
    }
    Ok(())
}
