use proptest::prelude::*;

use spacing_lab::equilibrium::{build_measure, repulsive_fixed_point, FixedPointOptions};
use spacing_lab::quadrature::gauss_legendre;
use spacing_lab::sampling::sample_gue;
use spacing_lab::{Interaction, Interval, Potential};

fn quartic(c2: f64, c4: f64) -> Potential {
    Potential::polynomial(vec![0.0, 0.0, c2, 0.0, c4], Interval::REAL_LINE).unwrap()
}

#[test]
fn quartic_support_matches_closed_form() {
    // For V = t⁴ the endpoints are ±(4/3)^{1/4}.
    let m = build_measure(&quartic(0.0, 1.0), 256, 1e-12).unwrap();
    assert!((m.b() - (4.0f64 / 3.0).powf(0.25)).abs() < 1e-10);
    // For V = t²/2 + g t⁴ the support is [−2a, 2a] with 12 g a⁴ + a² = 1.
    let g: f64 = 0.25;
    let b2 = 4.0 * ((1.0 + 48.0 * g).sqrt() - 1.0) / (24.0 * g);
    let m = build_measure(&quartic(0.5, g), 256, 1e-12).unwrap();
    assert!((m.b() - b2.sqrt()).abs() < 1e-10, "{} vs {}", m.b(), b2.sqrt());
}

#[test]
fn quartic_density_closed_form() {
    // V = t²/2 + g t⁴: ρ(t) = (1 + 2g b² + 4g t²)·√(b² − t²) / 2π.
    let g: f64 = 0.25;
    let b2 = 4.0 * ((1.0 + 48.0 * g).sqrt() - 1.0) / (24.0 * g);
    let m = build_measure(&quartic(0.5, g), 256, 1e-12).unwrap();
    for i in 1..20 {
        let t = -m.b() + 2.0 * m.b() * i as f64 / 20.0;
        let exact = (1.0 + 2.0 * g * b2 + 4.0 * g * t * t) * (b2 - t * t).sqrt() / (2.0 * std::f64::consts::PI);
        assert!((m.density(t) - exact).abs() < 1e-9, "t = {t}");
    }
}

#[test]
fn unfolded_points_fill_zero_to_n() {
    let m = build_measure(&Potential::gaussian(), 256, 1e-12).unwrap();
    let x = sample_gue(300, 9);
    let u = m.unfold(&x);
    assert!(u.points().iter().all(|&p| (0.0..=300.0).contains(&p)));
    assert!(u.points().windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(u.model_tag, x.model_tag);
}

#[test]
fn repulsion_contracts_the_support() {
    let q = Potential::gaussian();
    let weak = repulsive_fixed_point(&q, &Interaction::gaussian(-0.1, 1.0).unwrap(), &FixedPointOptions::default()).unwrap();
    let strong = repulsive_fixed_point(&q, &Interaction::gaussian(-0.5, 1.0).unwrap(), &FixedPointOptions::default()).unwrap();
    assert!(weak.residual_history.last().unwrap() < &1e-8);
    assert!(strong.measure.b() < weak.measure.b());
    assert!(weak.measure.b() < 2f64.sqrt());
    assert!((weak.measure.mass() - 1.0).abs() < 1e-9);
}

// The returned measure is the equilibrium measure of Q + h∗μ for its own μ,
// up to the reported polynomial refit error.
fn self_consistency_error(degree: usize) -> (f64, f64) {
    let q = Potential::gaussian();
    let h = Interaction::gaussian(-0.3, 0.8).unwrap();
    let opts = FixedPointOptions { fit_degree: degree, ..FixedPointOptions::default() };
    let fp = repulsive_fixed_point(&q, &h, &opts).unwrap();
    let (lo, hi) = fp.fit_window;
    let rule = gauss_legendre(400).mapped(fp.measure.a(), fp.measure.b());
    let errors: Vec<f64> = (0..=40)
        .map(|i| {
            let t = lo + (hi - lo) * i as f64 / 40.0;
            let conv: f64 = rule.integrate(|u| h.value(t - u) * fp.measure.density(u));
            fp.effective.value(t) - q.value(t) - conv
        })
        .collect();
    let worst = errors.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    (worst, fp.fit_residual)
}

#[test]
fn fixed_point_is_self_consistent() {
    let (err, fit) = self_consistency_error(10);
    assert!(err <= 2.0 * fit + 1e-9, "{err} vs fit residual {fit}");
    let (err, fit) = self_consistency_error(16);
    assert!(err <= 2.0 * fit + 1e-9 && err < 1e-6, "{err}, {fit}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn measure_is_a_probability_distribution(c2 in 0.2f64..2.0, c4 in 0.0f64..1.0, c1 in -0.5f64..0.5) {
        let v = Potential::polynomial(vec![0.0, c1, c2, 0.0, c4], Interval::REAL_LINE).unwrap();
        let m = build_measure(&v, 128, 1e-12).unwrap();
        let (a, b) = m.support();
        let rule = gauss_legendre(200).mapped(a, b);
        prop_assert!((rule.integrate(|t| m.density(t)) - 1.0).abs() < 1e-6);
        prop_assert!(m.cdf(a) == 0.0 && (m.cdf(b) - 1.0).abs() < 1e-12);
        let mut prev = 0.0;
        for i in 0..=100 {
            let t = a + (b - a) * i as f64 / 100.0;
            let f = m.cdf(t);
            prop_assert!(f >= prev);
            prop_assert!(m.density(t) >= 0.0);
            prev = f;
        }
        for u in [0.1, 0.5, 0.9] {
            prop_assert!((m.cdf(m.cdf_inverse(u).unwrap()) - u).abs() < 1e-10);
        }
    }
}
