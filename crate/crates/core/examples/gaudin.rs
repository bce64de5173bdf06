//! The Gaudin spacing law next to the Wigner surmise, with a cached table.

use spacing_lab::gaudin::{gap_probability, wigner_surmise, GaudinParams, GaudinTable};

fn main() -> spacing_lab::Result<()> {
    let dir = std::env::temp_dir().join("spacing-lab-example");
    std::fs::create_dir_all(&dir)?;
    let params = GaudinParams::default();
    let path = GaudinTable::cache_path(&dir, params);
    let (table, status) = GaudinTable::load_or_build(&path, params)?;
    println!("table {} ({status:?}), mean spacing {:.8}", path.display(), table.mean_spacing());

    // Surmise CDF by the trapezoid rule on a fine grid.
    let h = 1e-3;
    let mut surmise_cdf = 0.0;
    let mut prev = 0.0;
    println!("{:>5} {:>12} {:>12} {:>12}", "s", "E(s)", "G(s)", "surmise");
    for i in 1..=3000 {
        let s = i as f64 * h;
        let p = wigner_surmise(s);
        surmise_cdf += 0.5 * h * (prev + p);
        prev = p;
        if i % 250 == 0 {
            println!(
                "{s:5.2} {:12.8} {:12.8} {:12.8}",
                gap_probability(s, params.order)?,
                table.eval(s)?,
                surmise_cdf
            );
        }
    }
    Ok(())
}
