//! Smoothness regression on a synthetic world where low-score countries
//! report their 7-day average instead of their true daily counts.

use covid_forensics::regimes::IndexSource;
use covid_forensics::report::display_term;
use covid_forensics::smoothness::{build_panel, run_test1, terms, CovariateTransform, Test1Spec};
use covid_forensics::synth::{synthetic_panel, PowerConfig};
use covid_forensics::Outcome;

fn main() -> covid_forensics::Result<()> {
    let cfg = PowerConfig {
        countries_per_group: 30,
        ..PowerConfig::default()
    };
    for lambda in [0.0, 0.5, 1.0] {
        let data = synthetic_panel(&cfg, lambda, 7)?;
        let panel = build_panel(&data);
        let spec = Test1Spec {
            index: IndexSource::Eiu,
            outcome: Outcome::Cases,
            with_controls: false,
            transform: CovariateTransform::Log,
        };
        let fit = run_test1(&panel, spec)?;
        let t = fit.term(terms::DEMOCRACY).expect("democracy term");
        println!(
            "smoothing weight {lambda:.1}: democracy {:<24} p = {:.4}  N = {}  countries = {}",
            display_term(t),
            t.p_value,
            fit.n_observations,
            fit.n_clusters
        );
    }
    Ok(())
}
