//! First-digit test on growth-screened cumulative counts of one synthetic
//! country, and on a pool of numbers that all start with 9.

use covid_forensics::benford::{
    benford_expected, chi_square_pvalue, pearson_chi_square, screen_observations, DigitHistogram,
    ScreeningConfig, DOF,
};
use covid_forensics::synth::{generate_epidemic, EpidemicParams};
use covid_forensics::Outcome;

fn main() -> covid_forensics::Result<()> {
    let series = generate_epidemic(
        "DEMO",
        &EpidemicParams {
            carrying_capacity: 250_000.0,
            ..Default::default()
        },
    )?;
    let config = ScreeningConfig::new(0.075, Outcome::Cases)?;
    let screened = screen_observations(&series, &config);
    let hist = DigitHistogram::from_values(screened.iter().copied());
    println!(
        "{} of {} days pass the 7.5% growth screen",
        screened.len(),
        series.len()
    );
    println!("digit  observed  benford");
    for (d, share) in hist.frequencies().iter().enumerate() {
        println!(
            "{:>5}  {:>8.3}  {:>7.3}",
            d + 1,
            share,
            benford_expected(d as u8 + 1)
        );
    }
    let x = pearson_chi_square(&hist)?;
    println!("chi-square {x:.2}, p = {:.4}", chi_square_pvalue(x, DOF)?);

    let nines = DigitHistogram::from_values((0..200).map(|i| 900 + i % 100));
    let x9 = pearson_chi_square(&nines)?;
    println!(
        "all-nines pool: chi-square {x9:.1}, p = {:.2e}",
        chi_square_pvalue(x9, DOF)?
    );
    Ok(())
}
