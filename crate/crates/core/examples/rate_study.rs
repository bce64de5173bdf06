//! Mean Kolmogorov distance against window length for the GUE at N = 400,
//! with the log-log slope.

use spacing_lab::experiments::{run_rate_study, StudyConfig};
use spacing_lab::gaudin::default_table;
use spacing_lab::spacing::IntervalSpec;

fn main() -> spacing_lab::Result<()> {
    let windows = [25.0, 50.0, 100.0, 200.0]
        .into_iter()
        .map(|length| IntervalSpec::Centered { length })
        .collect();
    let config = StudyConfig::gue(vec![400], windows, 200, 12);
    let study = run_rate_study(&config, &default_table()?)?;
    print!("{}", study.report.to_csv());
    print!("{}", study.fit_csv());
    Ok(())
}
