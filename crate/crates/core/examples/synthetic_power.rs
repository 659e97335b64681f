//! Detection rate of both tests as the smoothing weight grows.

use covid_forensics::synth::{power_experiment, Detector, PowerConfig};

fn main() -> covid_forensics::Result<()> {
    for detector in [Detector::Test1, Detector::Test2] {
        let cfg = PowerConfig {
            countries_per_group: 20,
            lambda_grid: vec![0.0, 0.25, 0.5, 0.75, 1.0],
            replications: 50,
            detector,
            ..PowerConfig::default()
        };
        for row in power_experiment(&cfg)? {
            println!(
                "{} smoothing {:.2}: flagged {:>2}/{} ({:.2})",
                row.detector.label(),
                row.smoothing_weight,
                row.flagged,
                row.replications,
                row.power
            );
        }
    }
    Ok(())
}
