//! Equilibrium measures of a few confining potentials: support endpoints,
//! density at the centre and a handful of quantiles.

use spacing_lab::equilibrium::build_measure;
use spacing_lab::models::check_assumptions;
use spacing_lab::{Interval, Potential};

fn main() -> spacing_lab::Result<()> {
    let potentials = [
        ("t^2", vec![0.0, 0.0, 1.0]),
        ("t^2/2", vec![0.0, 0.0, 0.5]),
        ("t^4", vec![0.0, 0.0, 0.0, 0.0, 1.0]),
        ("t^2/2 + t^4/4", vec![0.0, 0.0, 0.5, 0.0, 0.25]),
        ("t^2 + t^3/10 + t^4/20", vec![0.0, 0.0, 1.0, 0.1, 0.05]),
    ];
    for (name, coeffs) in potentials {
        let v = Potential::polynomial(coeffs, Interval::REAL_LINE)?;
        let report = check_assumptions(&v, 4.0, 401)?;
        let m = match build_measure(&v, 256, 1e-12) {
            Ok(m) => m,
            Err(e) => {
                println!("{name:>22}: {e}");
                continue;
            }
        };
        let (a, b) = m.support();
        let mid = 0.5 * (a + b);
        let quartiles: Vec<String> = [0.25, 0.5, 0.75]
            .iter()
            .map(|&u| m.cdf_inverse(u).map(|t| format!("{t:+.4}")))
            .collect::<Result<_, _>>()?;
        println!(
            "{name:>22}: support [{a:+.6}, {b:+.6}], density at centre {:.5}, quartiles {}, convex: {}",
            m.density(mid),
            quartiles.join(" "),
            report.strictly_convex
        );
    }
    Ok(())
}
