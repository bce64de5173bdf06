//! Exact GUE samples, unfolded with the semicircle law, compared with the
//! Gaudin distribution in the bulk, over the whole spectrum and in a
//! localized window.

use spacing_lab::equilibrium::build_measure;
use spacing_lab::gaudin::default_table;
use spacing_lab::sampling::sample_gue_stream;
use spacing_lab::spacing::{empirical_spacing_cdf, kolmogorov_distance, length_normalized_cdf, window_spacings, IntervalSpec};
use spacing_lab::Potential;

fn main() -> spacing_lab::Result<()> {
    let table = default_table()?;
    let m = build_measure(&Potential::gaussian(), 256, 1e-12)?;
    let windows = [
        IntervalSpec::central_half(),
        IntervalSpec::Full,
        IntervalSpec::Localized { center: 0.0, half_length: 0.2 },
    ];
    for n in [100usize, 400, 1600] {
        let x = sample_gue_stream(n, 2024, 0);
        for spec in &windows {
            let (s, length) = window_spacings(&x, &m, spec)?;
            let hat = kolmogorov_distance(&empirical_spacing_cdf(&s)?, &table);
            let per_length = kolmogorov_distance(&length_normalized_cdf(&s, length)?, &table);
            println!(
                "N = {n:5}  {:<14} spacings {:5}  distance {hat:.4}  (length-normalised {per_length:.4})",
                spec.to_string(),
                s.len()
            );
        }
    }
    Ok(())
}
