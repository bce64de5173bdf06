//! Nearest-neighbour spacing observables: interval selection, the spacing
//! multiset, its empirical distribution function, the `γ^k` tuple-spread
//! measures, Kolmogorov distances, localized rescaling and replica pooling.

use std::fmt;
use std::str::FromStr;

use crate::equilibrium::EquilibriumMeasure;
use crate::error::{Error, Result};
use crate::gaudin::GaudinTable;
use crate::sampling::Configuration;

/// How the counting window `I_N` is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntervalSpec {
    /// `[lower·N, upper·N]` in unfolded coordinates.
    QuantileWindow { lower: f64, upper: f64 },
    /// `[N/2 − length/2, N/2 + length/2]` in unfolded coordinates.
    Centered { length: f64 },
    /// `[0, N]`, edge spacings included.
    Full,
    /// Physical window `[center − half_length, center + half_length]`, used
    /// with the linear rescaling `x ↦ N μ(center) x`.
    Localized { center: f64, half_length: f64 },
}

impl IntervalSpec {
    pub fn central_half() -> Self {
        IntervalSpec::QuantileWindow {
            lower: 0.25,
            upper: 0.75,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            IntervalSpec::QuantileWindow { lower, upper } => {
                if !(0.0 <= lower && lower < upper && upper <= 1.0) {
                    return Err(Error::Domain(format!("quantile window ({lower}, {upper}) is not inside [0, 1]")));
                }
            }
            IntervalSpec::Centered { length } => {
                if !(length > 0.0) {
                    return Err(Error::Domain("window length must be positive".into()));
                }
            }
            IntervalSpec::Localized { half_length, .. } => {
                if !(half_length > 0.0) {
                    return Err(Error::Domain("localized half length must be positive".into()));
                }
            }
            IntervalSpec::Full => {}
        }
        Ok(())
    }
}

impl fmt::Display for IntervalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntervalSpec::QuantileWindow { lower, upper } => write!(f, "q:{lower},{upper}"),
            IntervalSpec::Centered { length } => write!(f, "len:{length}"),
            IntervalSpec::Full => f.write_str("full"),
            IntervalSpec::Localized { center, half_length } => write!(f, "loc:{center},{half_length}"),
        }
    }
}

impl FromStr for IntervalSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let pair = |body: &str| -> Result<(f64, f64)> {
            let (a, b) = body
                .split_once(',')
                .ok_or_else(|| Error::Domain(format!("expected two comma-separated numbers in `{s}`")))?;
            let p = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Domain(format!("cannot parse `{v}` in `{s}`")))
            };
            Ok((p(a)?, p(b)?))
        };
        let spec = if s == "full" {
            IntervalSpec::Full
        } else if let Some(body) = s.strip_prefix("q:") {
            let (lower, upper) = pair(body)?;
            IntervalSpec::QuantileWindow { lower, upper }
        } else if let Some(body) = s.strip_prefix("len:") {
            let length = body
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Domain(format!("cannot parse window length in `{s}`")))?;
            IntervalSpec::Centered { length }
        } else if let Some(body) = s.strip_prefix("loc:") {
            let (center, half_length) = pair(body)?;
            IntervalSpec::Localized { center, half_length }
        } else {
            return Err(Error::Domain(format!("unknown interval `{s}` (full | q:lo,hi | len:L | loc:a,t)")));
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Resolves `spec` to a closed interval. Quantile, centred and full windows
/// live in unfolded coordinates `[0, N]`; localized windows are physical.
pub fn select_interval(spec: &IntervalSpec, n: usize, m: Option<&EquilibriumMeasure>) -> Result<(f64, f64)> {
    spec.validate()?;
    let nf = n as f64;
    match *spec {
        IntervalSpec::QuantileWindow { lower, upper } => Ok((lower * nf, upper * nf)),
        IntervalSpec::Centered { length } => {
            if length > nf {
                return Err(Error::Domain(format!("window length {length} exceeds N = {n}")));
            }
            Ok((0.5 * (nf - length), 0.5 * (nf + length)))
        }
        IntervalSpec::Full => Ok((0.0, nf)),
        IntervalSpec::Localized { center, half_length } => {
            let m = m.ok_or_else(|| Error::Domain("localized windows need the equilibrium measure".into()))?;
            let mu = m.density(center);
            if mu <= 1e-6 {
                return Err(Error::Domain(format!("density at {center} is {mu:e}; pick a bulk point")));
            }
            Ok((center - half_length, center + half_length))
        }
    }
}

/// Spacings `y_{j+1} − y_j` for which both `y_j` and `y_{j+1}` lie in the
/// closed interval `[lo, hi]`. `y` must be sorted.
pub fn spacing_multiset(lo: f64, hi: f64, y: &[f64]) -> Vec<f64> {
    y.windows(2)
        .filter(|w| lo <= w[0] && w[0] <= hi && lo <= w[1] && w[1] <= hi)
        .map(|w| w[1] - w[0])
        .collect()
}

/// Right-continuous step function with equal jumps at the (sorted) spacings.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdf {
    jumps: Vec<f64>,
    normalizer: f64,
}

impl EmpiricalCdf {
    /// Each jump has height `1/normalizer`; the total mass is
    /// `len/normalizer`.
    pub fn with_normalizer(mut jumps: Vec<f64>, normalizer: f64) -> Result<Self> {
        if jumps.is_empty() {
            return Err(Error::NoSpacings);
        }
        if !(normalizer > 0.0) {
            return Err(Error::Domain("normalizer must be positive".into()));
        }
        jumps.sort_by(f64::total_cmp);
        Ok(EmpiricalCdf { jumps, normalizer })
    }

    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    pub fn len(&self) -> usize {
        self.jumps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jumps.is_empty()
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn total_mass(&self) -> f64 {
        self.jumps.len() as f64 / self.normalizer
    }

    pub fn value(&self, s: f64) -> f64 {
        self.jumps.partition_point(|&j| j <= s) as f64 / self.normalizer
    }
}

/// Normalised empirical spacing distribution (unit mass).
pub fn empirical_spacing_cdf(spacings: &[f64]) -> Result<EmpiricalCdf> {
    EmpiricalCdf::with_normalizer(spacings.to_vec(), spacings.len() as f64)
}

/// Spacing measure divided by the window length instead of the spacing count.
pub fn length_normalized_cdf(spacings: &[f64], interval_length: f64) -> Result<EmpiricalCdf> {
    EmpiricalCdf::with_normalizer(spacings.to_vec(), interval_length)
}

/// Largest `γ^k` order accepted by [`gamma_k_mass`].
pub const MAX_GAMMA_ORDER: usize = 8;

/// `(1/|I|) · #{k-subsets of y with spread ≤ s and extreme points in I}`.
///
/// With `y` sorted and `I` an interval, every point between the extremes of
/// such a subset is also in `I`, so subsets are counted by their leftmost
/// point `i`: with `m_i` later points within distance `s`, there are
/// `C(m_i, k−1)` of them.
pub fn gamma_k_mass(lo: f64, hi: f64, y: &[f64], k: usize, s: f64) -> Result<f64> {
    if k > MAX_GAMMA_ORDER {
        return Err(Error::Complexity(format!("γ^k with k = {k} > {MAX_GAMMA_ORDER}")));
    }
    if k < 2 {
        return Err(Error::Domain("γ^k needs k ≥ 2".into()));
    }
    if !(hi > lo) {
        return Err(Error::Domain("interval must have positive length".into()));
    }
    let start = y.partition_point(|&t| t < lo);
    let end = y.partition_point(|&t| t <= hi);
    let inside = &y[start..end];
    let mut count = 0.0;
    let mut reach = 0;
    for (i, &yi) in inside.iter().enumerate() {
        reach = reach.max(i + 1);
        while reach < inside.len() && inside[reach] - yi <= s {
            reach += 1;
        }
        count += binomial(reach - i - 1, k - 1);
    }
    Ok(count / (hi - lo))
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}

/// Kolmogorov distance `sup_s |e(s) − F(s)|` between a step function and a
/// continuous nondecreasing `F` with `F(s) → 1`. For such `F` the supremum
/// over each flat piece is attained at its ends, so both one-sided limits
/// at every jump (and the limit at infinity) suffice.
pub fn ks_distance(e: &EmpiricalCdf, cdf: impl Fn(f64) -> f64) -> f64 {
    let jumps = e.jumps();
    let h = 1.0 / e.normalizer();
    let mut sup = 0.0f64;
    let mut i = 0;
    while i < jumps.len() {
        let s = jumps[i];
        let left = i as f64 * h;
        let mut j = i;
        while j < jumps.len() && jumps[j] == s {
            j += 1;
        }
        let right = j as f64 * h;
        let f = cdf(s);
        sup = sup.max((left - f).abs()).max((right - f).abs());
        i = j;
    }
    sup.max((e.total_mass() - 1.0).abs())
}

/// Kolmogorov distance to the Gaudin distribution.
pub fn kolmogorov_distance(e: &EmpiricalCdf, g: &GaudinTable) -> f64 {
    ks_distance(e, |s| g.cdf(s))
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut sup = 0.0f64;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        sup = sup.max((i as f64 / na - j as f64 / nb).abs());
    }
    sup
}

/// Points of the physical window `[a − t, a + t]`, rescaled to
/// `N·μ(a)·x` (window membership is decided before rescaling).
pub fn localized_rescale(x: &Configuration, center: f64, half_length: f64, mu_a: f64) -> Vec<f64> {
    let scale = x.len() as f64 * mu_a;
    x.points()
        .iter()
        .filter(|&&p| (center - half_length..=center + half_length).contains(&p))
        .map(|&p| scale * p)
        .collect()
}

/// Spacings of one configuration in the window described by `spec`,
/// together with the window length used for the `σ/|I|` normalisation.
pub fn window_spacings(x: &Configuration, m: &EquilibriumMeasure, spec: &IntervalSpec) -> Result<(Vec<f64>, f64)> {
    let n = x.len();
    let (lo, hi) = select_interval(spec, n, Some(m))?;
    match *spec {
        IntervalSpec::Localized { center, half_length } => {
            let mu_a = m.density(center);
            let y = localized_rescale(x, center, half_length, mu_a);
            let s = y.windows(2).map(|w| w[1] - w[0]).collect();
            Ok((s, n as f64 * mu_a * (hi - lo)))
        }
        _ => {
            let unfolded = m.unfold(x);
            Ok((spacing_multiset(lo, hi, unfolded.points()), hi - lo))
        }
    }
}

/// Expected-spacing estimate: all replicas' spacings pooled and normalised
/// by `R·|I|`.
pub fn intensity_cdf(replicas: &[Vec<f64>], interval_length: f64) -> Result<EmpiricalCdf> {
    if replicas.is_empty() {
        return Err(Error::Domain("need at least one replica".into()));
    }
    let pooled: Vec<f64> = replicas.iter().flatten().copied().collect();
    EmpiricalCdf::with_normalizer(pooled, replicas.len() as f64 * interval_length)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_selection() {
        let q = IntervalSpec::QuantileWindow { lower: 0.25, upper: 0.75 };
        assert_eq!(select_interval(&q, 100, None).unwrap(), (25.0, 75.0));
        assert_eq!(select_interval(&IntervalSpec::Full, 100, None).unwrap(), (0.0, 100.0));
        let c = IntervalSpec::Centered { length: 25.0 };
        assert_eq!(select_interval(&c, 400, None).unwrap(), (187.5, 212.5));
        assert!(select_interval(&c, 20, None).is_err());
        let m = crate::equilibrium::build_measure(&crate::models::Potential::gaussian(), 64, 1e-12).unwrap();
        let loc = IntervalSpec::Localized { center: 0.0, half_length: 0.2 };
        assert_eq!(select_interval(&loc, 100, Some(&m)).unwrap(), (-0.2, 0.2));
        let edge = IntervalSpec::Localized { center: 1.5, half_length: 0.2 };
        assert!(matches!(select_interval(&edge, 100, Some(&m)), Err(Error::Domain(_))));
        let bad = IntervalSpec::QuantileWindow { lower: 0.8, upper: 0.2 };
        assert!(select_interval(&bad, 100, None).is_err());
    }

    #[test]
    fn interval_spec_parsing() {
        assert_eq!("full".parse::<IntervalSpec>().unwrap(), IntervalSpec::Full);
        assert_eq!(
            "q:0.25,0.75".parse::<IntervalSpec>().unwrap(),
            IntervalSpec::QuantileWindow { lower: 0.25, upper: 0.75 }
        );
        assert_eq!("len:50".parse::<IntervalSpec>().unwrap(), IntervalSpec::Centered { length: 50.0 });
        let loc: IntervalSpec = "loc:0,0.2".parse().unwrap();
        assert_eq!(loc.to_string().parse::<IntervalSpec>().unwrap(), loc);
        assert!("q:0.9,0.1".parse::<IntervalSpec>().is_err());
        assert!("middle".parse::<IntervalSpec>().is_err());
    }

    #[test]
    fn spacing_membership_rule() {
        let y = [1.0, 2.0, 4.0, 8.0];
        assert_eq!(spacing_multiset(0.0, 10.0, &y), vec![1.0, 2.0, 4.0]);
        assert_eq!(spacing_multiset(0.0, 5.0, &y), vec![1.0, 2.0]);
        assert!(spacing_multiset(0.0, 10.0, &[7.0]).is_empty());
    }

    #[test]
    fn empirical_cdf_steps() {
        let e = empirical_spacing_cdf(&[2.0, 1.0, 4.0]).unwrap();
        assert_eq!(e.value(0.5), 0.0);
        assert!((e.value(1.0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((e.value(2.5) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(e.value(4.0), 1.0);
        assert_eq!(e.value(100.0), 1.0);
        assert!(matches!(empirical_spacing_cdf(&[]), Err(Error::NoSpacings)));
    }

    #[test]
    fn gamma_single_pair() {
        assert!((gamma_k_mass(0.0, 10.0, &[0.0, 1.0], 2, 2.0).unwrap() - 0.1).abs() < 1e-15);
        assert!(matches!(gamma_k_mass(0.0, 10.0, &[0.0, 1.0], 9, 2.0), Err(Error::Complexity(_))));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(3, 5), 0.0);
        assert_eq!(binomial(12, 6), 924.0);
    }

    #[test]
    fn two_sample_ks_basics() {
        assert_eq!(two_sample_ks(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(two_sample_ks(&[1.0, 2.0], &[3.0, 4.0]), 1.0);
        assert!((two_sample_ks(&[1.0, 2.0, 3.0, 4.0], &[2.5]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pooled_intensity() {
        let reps = vec![vec![1.0, 0.5], vec![1.5]];
        let e = intensity_cdf(&reps, 4.0).unwrap();
        assert_eq!(e.normalizer(), 8.0);
        assert!((e.total_mass() - 3.0 / 8.0).abs() < 1e-15);
        let swapped = vec![vec![1.5], vec![1.0, 0.5]];
        assert_eq!(intensity_cdf(&swapped, 4.0).unwrap(), e);
        assert!(matches!(intensity_cdf(&[vec![], vec![]], 4.0), Err(Error::NoSpacings)));
    }
}
