use proptest::prelude::*;

use spacing_lab::equilibrium::build_measure;
use spacing_lab::gaudin::{build_gaudin_table, GaudinTable};
use spacing_lab::sampling::{sample_gue_stream, Configuration, SamplerKind};
use spacing_lab::spacing::{
    empirical_spacing_cdf, gamma_k_mass, intensity_cdf, kolmogorov_distance, ks_distance, length_normalized_cdf,
    localized_rescale, spacing_multiset, window_spacings, EmpiricalCdf, IntervalSpec,
};
use spacing_lab::{Error, Potential};

fn small_table() -> GaudinTable {
    build_gaudin_table(5.0, 0.01, 30).unwrap()
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v
}

// Naive double loop over consecutive pairs.
fn naive_spacings(lo: f64, hi: f64, y: &[f64]) -> Vec<f64> {
    let mut out = Vec::new();
    for j in 0..y.len() {
        for k in 0..y.len() {
            if k == j + 1 && (lo..=hi).contains(&y[j]) && (lo..=hi).contains(&y[k]) {
                out.push(y[k] - y[j]);
            }
        }
    }
    out
}

fn brute_gamma(lo: f64, hi: f64, y: &[f64], k: usize, s: f64) -> f64 {
    let n = y.len();
    let mut count = 0usize;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let first = mask.trailing_zeros() as usize;
        let last = 31 - mask.leading_zeros() as usize;
        if (lo..=hi).contains(&y[first]) && (lo..=hi).contains(&y[last]) && y[last] - y[first] <= s {
            count += 1;
        }
    }
    count as f64 / (hi - lo)
}

#[test]
fn distance_is_half_step_when_jumps_sit_midway() {
    let table = small_table();
    let n = 40;
    let jumps: Vec<f64> = (1..=n)
        .map(|i| {
            let target = (i as f64 - 0.5) / n as f64;
            // Invert the table's G by bisection.
            let (mut lo, mut hi) = (0.0, 5.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if table.cdf(mid) < target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect();
    let d = kolmogorov_distance(&empirical_spacing_cdf(&jumps).unwrap(), &table);
    assert!((d - 0.5 / n as f64).abs() < 1e-9, "{d}");
}

#[test]
fn distance_for_extreme_steps() {
    let table = small_table();
    let far = kolmogorov_distance(&empirical_spacing_cdf(&[10.0]).unwrap(), &table);
    assert!((far - 1.0).abs() < 1e-9);
    let at_zero = kolmogorov_distance(&empirical_spacing_cdf(&[0.0]).unwrap(), &table);
    assert!((at_zero - 1.0).abs() < 1e-12);
}

#[test]
fn localized_rescaling_is_symmetric() {
    let x = Configuration::new(vec![-0.3, -0.1, 0.1, 0.3, 0.9], "sym", 0, 0, SamplerKind::Tridiagonal).unwrap();
    let y = localized_rescale(&x, 0.0, 0.35, 0.45);
    assert_eq!(y.len(), 4);
    for (a, b) in y.iter().zip(y.iter().rev()) {
        assert!((a + b).abs() < 1e-12);
    }
    assert!((y[3] - 5.0 * 0.45 * 0.3).abs() < 1e-12);
    let lonely = localized_rescale(&x, 0.9, 0.05, 0.45);
    assert_eq!(lonely.len(), 1);
}

#[test]
fn localized_gue_window_matches_gaudin() {
    let table = small_table();
    let m = build_measure(&Potential::gaussian(), 256, 1e-12).unwrap();
    let spec = IntervalSpec::Localized { center: 0.0, half_length: 0.2 };
    for stream in 0..5 {
        let x = sample_gue_stream(400, 77, stream);
        let (s, length) = window_spacings(&x, &m, &spec).unwrap();
        assert!((length - 400.0 * m.density(0.0) * 0.4).abs() < 1e-9);
        let d = kolmogorov_distance(&empirical_spacing_cdf(&s).unwrap(), &table);
        assert!(d < 0.15, "stream {stream}: {d}");
    }
}

#[test]
fn single_replica_intensity_is_length_normalised() {
    let s = vec![0.8, 1.1, 0.95, 1.3];
    let pooled = intensity_cdf(std::slice::from_ref(&s), 5.0).unwrap();
    assert_eq!(pooled, length_normalized_cdf(&s, 5.0).unwrap());
}

proptest! {
    #[test]
    fn multiset_cardinality_and_naive_agreement(
        pts in prop::collection::btree_set(0u32..2000, 0..40),
        a in 0.0f64..20.0,
        len in 0.1f64..20.0,
    ) {
        let y: Vec<f64> = pts.iter().map(|&p| p as f64 / 100.0).collect();
        let (lo, hi) = (a, a + len);
        let s = spacing_multiset(lo, hi, &y);
        prop_assert_eq!(&s, &naive_spacings(lo, hi, &y));
        let inside: Vec<bool> = y.iter().map(|t| (lo..=hi).contains(t)).collect();
        let count = inside.iter().filter(|&&b| b).count();
        let runs = inside.iter().enumerate().filter(|&(i, &b)| b && (i == 0 || !inside[i - 1])).count();
        prop_assert_eq!(s.len(), count - runs);
        prop_assert!(s.iter().all(|&d| d > 0.0));
    }

    #[test]
    fn fast_gamma_matches_enumeration(
        raw in prop::collection::vec(0.0f64..10.0, 2..=12),
        lo in -1.0f64..6.0,
        len in 0.5f64..6.0,
        s in 0.0f64..5.0,
        k in 2usize..=8,
    ) {
        let y = sorted(raw);
        prop_assume!(y.windows(2).all(|w| w[0] < w[1]));
        let fast = gamma_k_mass(lo, lo + len, &y, k, s).unwrap();
        let brute = brute_gamma(lo, lo + len, &y, k, s);
        prop_assert!((fast - brute).abs() < 1e-12);
    }

    #[test]
    fn distance_is_a_probability_gap(raw in prop::collection::vec(0.0f64..6.0, 1..60)) {
        let table = small_table_cached();
        let e = empirical_spacing_cdf(&raw).unwrap();
        let d = kolmogorov_distance(&e, table);
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert!((e.total_mass() - 1.0).abs() < 1e-12);
        // Any grid evaluation of the gap is a lower bound for the exact sup.
        let grid = (0..=600).map(|i| i as f64 * 0.01).map(|s| (e.value(s) - table.cdf(s)).abs()).fold(0.0, f64::max);
        prop_assert!(grid <= d + 1e-12);
    }

    #[test]
    fn length_normalised_mass(raw in prop::collection::vec(0.01f64..3.0, 1..30), len in 1.0f64..100.0) {
        let e = length_normalized_cdf(&raw, len).unwrap();
        prop_assert!((e.total_mass() - raw.len() as f64 / len).abs() < 1e-12);
        prop_assert!((e.value(f64::INFINITY) - e.total_mass()).abs() < 1e-12);
    }

    #[test]
    fn pooling_ignores_replica_order(a in prop::collection::vec(0.01f64..3.0, 0..10), b in prop::collection::vec(0.01f64..3.0, 1..10)) {
        let ab = intensity_cdf(&[a.clone(), b.clone()], 7.0).unwrap();
        let ba = intensity_cdf(&[b, a], 7.0).unwrap();
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn exact_distance_to_uniform(raw in prop::collection::vec(0.0f64..1.0, 1..50)) {
        // Classical one-sample statistic against U(0, 1).
        let e = EmpiricalCdf::with_normalizer(raw.clone(), raw.len() as f64).unwrap();
        let d = ks_distance(&e, |s| s.clamp(0.0, 1.0));
        let x = sorted(raw);
        let n = x.len() as f64;
        let classical = x
            .iter()
            .enumerate()
            .map(|(i, &v)| ((i as f64 + 1.0) / n - v).max(v - i as f64 / n))
            .fold(0.0, f64::max);
        prop_assert!((d - classical).abs() < 1e-12);
    }
}

fn small_table_cached() -> &'static GaudinTable {
    static TABLE: std::sync::OnceLock<GaudinTable> = std::sync::OnceLock::new();
    TABLE.get_or_init(small_table)
}

#[test]
fn empty_inputs_are_typed_errors() {
    assert!(matches!(empirical_spacing_cdf(&[]), Err(Error::NoSpacings)));
    assert!(matches!(gamma_k_mass(0.0, 1.0, &[0.1, 0.2], 9, 1.0), Err(Error::Complexity(_))));
}
