//! Unfolded Christoffel–Darboux kernel against the sine kernel for the GUE.

use spacing_lab::cd_kernel::{recurrence_coefficients, unfolded_kernel_error, DEFAULT_QUAD_POINTS};
use spacing_lab::equilibrium::build_measure;
use spacing_lab::Potential;

fn main() -> spacing_lab::Result<()> {
    let v = Potential::gaussian();
    let m = build_measure(&v, 256, 1e-12)?;
    let mut previous: Option<f64> = None;
    for n in [16usize, 32, 64, 128] {
        let r = recurrence_coefficients(&v, None, n, n, DEFAULT_QUAD_POINTS)?;
        let nf = n as f64;
        let err = unfolded_kernel_error(&r, &m, (0.25 * nf, 0.75 * nf), 64)?;
        match previous {
            Some(p) => println!("N = {n:4}  sup error = {err:.5}  ratio = {:.3}", err / p),
            None => println!("N = {n:4}  sup error = {err:.5}"),
        }
        previous = Some(err);
    }
    Ok(())
}
