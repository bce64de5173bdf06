//! A repulsive particle system: self-consistent limiting measure, Metropolis
//! samples, and their spacing statistics.

use spacing_lab::equilibrium::{build_measure, repulsive_fixed_point, FixedPointOptions};
use spacing_lab::gaudin::default_table;
use spacing_lab::sampling::{sample_mcmc, McmcParams};
use spacing_lab::spacing::{empirical_spacing_cdf, kolmogorov_distance, window_spacings, IntervalSpec};
use spacing_lab::{Interaction, Model, Potential};

fn main() -> spacing_lab::Result<()> {
    let q = Potential::gaussian();
    let plain = build_measure(&q, 256, 1e-12)?;
    for gamma in [0.0, -0.1, -0.5] {
        let h = Interaction::gaussian(gamma, 1.0)?;
        let fp = repulsive_fixed_point(&q, &h, &FixedPointOptions::default())?;
        let (a, b) = fp.measure.support();
        println!(
            "gamma = {gamma:+.1}: {} iterations, support [{a:+.5}, {b:+.5}] (plain ±{:.5}), density at 0 {:.5}",
            fp.iterations,
            plain.b(),
            fp.measure.density(0.0)
        );
    }

    let h = Interaction::gaussian(-0.1, 1.0)?;
    let model = Model::repulsive("gaussian-repulsion", q.clone(), h);
    let measure = repulsive_fixed_point(&q, &h, &FixedPointOptions::default())?.measure;
    let table = default_table()?;
    for stream in 0..4 {
        let (x, stats) = sample_mcmc(&model, 100, &McmcParams::default(), 5, stream)?;
        let (s, _) = window_spacings(&x, &measure, &IntervalSpec::central_half())?;
        let d = kolmogorov_distance(&empirical_spacing_cdf(&s)?, &table);
        println!(
            "chain {stream}: acceptance {:.3}, step {:.4}, spacing distance {d:.4}",
            stats.acceptance, stats.final_step
        );
    }
    Ok(())
}
