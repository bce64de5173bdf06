//! Pooling replicas: the expected spacing measure converges much faster than
//! any single realisation.

use spacing_lab::experiments::{run_intensity_study, StudyConfig};
use spacing_lab::gaudin::default_table;
use spacing_lab::spacing::IntervalSpec;

fn main() -> spacing_lab::Result<()> {
    let config = StudyConfig::gue(
        vec![200],
        vec![IntervalSpec::Centered { length: 25.0 }, IntervalSpec::central_half(), IntervalSpec::Full],
        200,
        7,
    );
    let report = run_intensity_study(&config, &default_table()?)?;
    for r in &report.rows {
        println!(
            "{:<12} |I| = {:6.1}  pooled {:.4} (mass {:.4})  single replicas: mean {:.4}, median {:.4}",
            r.interval.to_string(),
            r.interval_length,
            r.pooled_distance,
            r.pooled_mass,
            r.single_mean,
            r.single_median
        );
    }
    Ok(())
}
