//! Analytic model ingredients: polynomial potentials, Gaussian pair
//! interactions, the standing convexity/confinement checks, and the flat
//! `key = value` model file.

use std::fmt::{self, Write as _};
use std::path::Path;

use crate::error::{Error, Result};

/// A closed interval `[lo, hi]`, possibly with infinite ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::Domain(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, t: f64) -> bool {
        self.lo <= t && t <= self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Polynomial external field `V(t) = Σ c_k t^k` on a domain `J`.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    coeffs: Vec<f64>,
    domain: Interval,
}

impl Potential {
    /// Coefficients in ascending degree. Trailing zeros are dropped.
    pub fn polynomial(coeffs: impl Into<Vec<f64>>, domain: Interval) -> Result<Self> {
        let mut coeffs = coeffs.into();
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("potential coefficients must be finite".into()));
        }
        Ok(Potential { coeffs, domain })
    }

    /// `V(t) = t²` on the real line, the Gaussian unitary ensemble field.
    pub fn gaussian() -> Self {
        Potential {
            coeffs: vec![0.0, 0.0, 1.0],
            domain: Interval::REAL_LINE,
        }
    }

    pub fn zero(domain: Interval) -> Self {
        Potential {
            coeffs: vec![0.0],
            domain,
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn domain(&self) -> Interval {
        self.domain
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading_coefficient(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn is_even(&self) -> bool {
        self.coeffs.iter().skip(1).step_by(2).all(|&c| c == 0.0)
    }

    /// Value or derivative at `t`, rejecting points outside `J`.
    pub fn eval(&self, t: f64, derivative_order: u8) -> Result<f64> {
        if !self.domain.contains(t) {
            return Err(Error::Domain(format!(
                "t = {t} outside [{}, {}]",
                self.domain.lo, self.domain.hi
            )));
        }
        match derivative_order {
            0 => Ok(self.value(t)),
            1 => Ok(self.d1(t)),
            2 => Ok(self.d2(t)),
            k => Err(Error::Domain(format!("derivative order {k} not supported"))),
        }
    }

    /// Horner evaluation without the domain check.
    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    #[inline]
    pub fn d1(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * t + k as f64 * c;
        }
        acc
    }

    #[inline]
    pub fn d2(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (k, &c) in self.coeffs.iter().enumerate().skip(2).rev() {
            acc = acc * t + (k * (k - 1)) as f64 * c;
        }
        acc
    }

    pub fn derivative(&self) -> Potential {
        let coeffs: Vec<f64> = if self.coeffs.len() <= 1 {
            vec![0.0]
        } else {
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect()
        };
        Potential {
            coeffs,
            domain: self.domain,
        }
    }

    pub fn scaled(&self, factor: f64) -> Potential {
        Potential {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            domain: self.domain,
        }
    }

    pub fn with_domain(&self, domain: Interval) -> Potential {
        Potential {
            coeffs: self.coeffs.clone(),
            domain,
        }
    }

    /// Minimiser of a strictly convex potential over its domain, by safeguarded
    /// Newton on `V'`.
    pub(crate) fn argmin(&self) -> f64 {
        let (mut lo, mut hi) = (-1.0, 1.0);
        while self.d1(lo) > 0.0 && lo > -1e6 {
            lo *= 2.0;
        }
        while self.d1(hi) < 0.0 && hi < 1e6 {
            hi *= 2.0;
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let g = self.d1(x);
            if g == 0.0 {
                break;
            }
            if g > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let h = self.d2(x);
            let newton = if h > 0.0 { x - g / h } else { f64::NAN };
            x = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo < 1e-14 {
                break;
            }
        }
        x.clamp(
            self.domain.lo.max(-1e6),
            self.domain.hi.min(1e6),
        )
    }
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", join_floats(&self.coeffs))
    }
}

/// Gaussian pair interaction `h(t) = γ exp(−t²/(2w²))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interaction {
    gamma: f64,
    width: f64,
}

impl Interaction {
    pub fn gaussian(gamma: f64, width: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::Domain("interaction amplitude must be finite".into()));
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::Domain(format!("interaction width must be positive, got {width}")));
        }
        Ok(Interaction { gamma, width })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// The Fourier transform of a Gaussian is positive, so `h` is
    /// negative-definite exactly when the amplitude is negative.
    pub fn is_negative_definite(&self) -> bool {
        self.gamma < 0.0
    }

    pub fn is_zero(&self) -> bool {
        self.gamma == 0.0
    }

    #[inline]
    pub fn value(&self, t: f64) -> f64 {
        let w2 = self.width * self.width;
        self.gamma * (-t * t / (2.0 * w2)).exp()
    }

    pub fn eval(&self, t: f64, derivative_order: u8) -> Result<f64> {
        let w2 = self.width * self.width;
        let g = (-t * t / (2.0 * w2)).exp();
        match derivative_order {
            0 => Ok(self.gamma * g),
            1 => Ok(-self.gamma * t / w2 * g),
            2 => Ok(self.gamma * (t * t / (w2 * w2) - 1.0 / w2) * g),
            k => Err(Error::Domain(format!("derivative order {k} not supported"))),
        }
    }
}

/// Outcome of [`check_assumptions`].
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionReport {
    /// Smallest `V''` seen on the validation grid.
    pub min_second_derivative: f64,
    /// Grid point where the minimum is attained.
    pub argmin_second_derivative: f64,
    /// `V''` bounded below by a positive constant on the grid.
    pub strictly_convex: bool,
    /// `V'` strictly increasing along the grid (the weaker convexity clause).
    pub derivative_increasing: bool,
    /// `V → ∞` towards every infinite end of `J` (true for bounded `J`).
    pub confining: bool,
}

impl AssumptionReport {
    /// Convexity clause usable for the given model: strict convexity, or the
    /// weaker monotone-derivative clause when there is no `f` field.
    pub fn passes(&self, has_field: bool) -> bool {
        self.confining && (self.strictly_convex || (!has_field && self.derivative_increasing))
    }
}

/// Checks convexity and confinement of `p` on `J ∩ [−R, R]` sampled at
/// `grid_points` equispaced points.
pub fn check_assumptions(p: &Potential, grid_radius: f64, grid_points: usize) -> Result<AssumptionReport> {
    if grid_points < 2 {
        return Err(Error::Domain("need at least two grid points".into()));
    }
    let grid = validation_grid(p.domain(), grid_radius, grid_points);
    let (mut min, mut argmin) = (f64::INFINITY, grid[0]);
    let mut increasing = true;
    let mut prev = f64::NEG_INFINITY;
    for &t in &grid {
        let d2 = p.d2(t);
        if d2 < min {
            min = d2;
            argmin = t;
        }
        let d1 = p.d1(t);
        if d1 <= prev {
            increasing = false;
        }
        prev = d1;
    }
    let dom = p.domain();
    let deg = p.degree();
    let lead = p.leading_coefficient();
    let up_ok = dom.hi.is_finite() || (deg >= 1 && lead > 0.0);
    let down_ok = dom.lo.is_finite() || (deg >= 1 && if deg.is_multiple_of(2) { lead > 0.0 } else { lead < 0.0 });
    Ok(AssumptionReport {
        min_second_derivative: min,
        argmin_second_derivative: argmin,
        strictly_convex: min > 0.0,
        derivative_increasing: increasing,
        confining: up_ok && down_ok,
    })
}

/// Heuristic warning: does `|f|` exceed `|V|` somewhere on the outer part of
/// the validation grid? Large fields can destabilise the samplers.
pub fn field_dominates(v: &Potential, f: &Potential, grid_radius: f64, grid_points: usize) -> bool {
    validation_grid(v.domain(), grid_radius, grid_points.max(2))
        .into_iter()
        .filter(|t| t.abs() >= 0.5 * grid_radius)
        .any(|t| f.value(t).abs() > v.value(t).abs())
}

pub(crate) fn validation_grid(domain: Interval, radius: f64, points: usize) -> Vec<f64> {
    let lo = domain.lo.max(-radius);
    let hi = domain.hi.min(radius);
    let step = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| lo + step * i as f64).collect()
}

/// Which joint density a model describes.
#[derive(Debug, Clone, PartialEq)]
pub enum Ensemble {
    /// `∏|x_i−x_j|² exp(−NΣV(x_j) + Σf(x_j))` restricted to `J`.
    Invariant { v: Potential, f: Option<Potential> },
    /// `∏|x_i−x_j|² exp(−h(x_i−x_j)) exp(−NΣQ(x_j))` on the real line.
    Repulsive { q: Potential, h: Interaction },
}

/// A named model, as read from a model file.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub tag: String,
    pub ensemble: Ensemble,
}

impl Model {
    pub fn gue() -> Self {
        Model {
            tag: "gue".into(),
            ensemble: Ensemble::Invariant {
                v: Potential::gaussian(),
                f: None,
            },
        }
    }

    pub fn invariant(tag: impl Into<String>, v: Potential, f: Option<Potential>) -> Self {
        Model {
            tag: tag.into(),
            ensemble: Ensemble::Invariant { v, f },
        }
    }

    pub fn repulsive(tag: impl Into<String>, q: Potential, h: Interaction) -> Self {
        Model {
            tag: tag.into(),
            ensemble: Ensemble::Repulsive { q, h },
        }
    }

    /// The confining potential (`V` or `Q`).
    pub fn potential(&self) -> &Potential {
        match &self.ensemble {
            Ensemble::Invariant { v, .. } => v,
            Ensemble::Repulsive { q, .. } => q,
        }
    }

    /// True for `V(t) = t²`, `f = 0` on the real line.
    pub fn is_gaussian(&self) -> bool {
        match &self.ensemble {
            Ensemble::Invariant { v, f } => {
                *v == Potential::gaussian() && f.as_ref().is_none_or(|f| f.coeffs().iter().all(|&c| c == 0.0))
            }
            Ensemble::Repulsive { .. } => false,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut tag = None;
        let mut v = None;
        let mut f = None;
        let mut q = None;
        let mut gamma = None;
        let mut width = None;
        let mut domain = Interval::REAL_LINE;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(line_no, format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "tag" => tag = Some(value.to_string()),
                "V.coeffs" => v = Some(parse_floats(value, line_no)?),
                "f.coeffs" => f = Some(parse_floats(value, line_no)?),
                "Q.coeffs" => q = Some(parse_floats(value, line_no)?),
                "h.gamma" => gamma = Some(parse_float(value, line_no)?),
                "h.width" => width = Some(parse_float(value, line_no)?),
                "J" => {
                    let ends = parse_floats(value, line_no)?;
                    if ends.len() != 2 {
                        return Err(Error::parse(line_no, "J needs two endpoints"));
                    }
                    domain = Interval::new(ends[0], ends[1]).map_err(|e| Error::parse(line_no, e.to_string()))?;
                }
                other => return Err(Error::parse(line_no, format!("unknown key `{other}`"))),
            }
        }
        let to_potential = |c: Vec<f64>| Potential::polynomial(c, domain).map_err(|e| Error::parse(0, e.to_string()));
        let ensemble = match (v, q) {
            (Some(v), None) => {
                if gamma.is_some() || width.is_some() {
                    return Err(Error::parse(0, "h.* keys require Q.coeffs, not V.coeffs"));
                }
                Ensemble::Invariant {
                    v: to_potential(v)?,
                    f: f.map(to_potential).transpose()?,
                }
            }
            (None, Some(q)) => {
                if f.is_some() {
                    return Err(Error::parse(0, "f.coeffs is not supported for repulsive systems"));
                }
                if domain != Interval::REAL_LINE {
                    return Err(Error::parse(0, "repulsive systems live on the whole real line"));
                }
                let h = Interaction::gaussian(gamma.unwrap_or(0.0), width.unwrap_or(1.0))
                    .map_err(|e| Error::parse(0, e.to_string()))?;
                Ensemble::Repulsive { q: to_potential(q)?, h }
            }
            (Some(_), Some(_)) => return Err(Error::parse(0, "give either V.coeffs or Q.coeffs, not both")),
            (None, None) => return Err(Error::parse(0, "missing V.coeffs or Q.coeffs")),
        };
        Ok(Model {
            tag: tag.unwrap_or_else(|| "model".into()),
            ensemble,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Model::parse(&text).map_err(|e| e.with_path(path))
    }

    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "tag = {}", self.tag);
        let domain = self.potential().domain();
        match &self.ensemble {
            Ensemble::Invariant { v, f } => {
                let _ = writeln!(out, "V.coeffs = {v}");
                if let Some(f) = f {
                    let _ = writeln!(out, "f.coeffs = {f}");
                }
            }
            Ensemble::Repulsive { q, h } => {
                let _ = writeln!(out, "Q.coeffs = {q}");
                let _ = writeln!(out, "h.gamma = {:?}", h.gamma());
                let _ = writeln!(out, "h.width = {:?}", h.width());
            }
        }
        let _ = writeln!(out, "J = {}", join_floats(&[domain.lo, domain.hi]));
        out
    }
}

fn join_floats(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| {
            if x.is_infinite() {
                if *x > 0.0 { "inf".to_string() } else { "-inf".to_string() }
            } else {
                format!("{x:?}")
            }
        })
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_float(s: &str, line: usize) -> Result<f64> {
    match s.trim() {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        t => t
            .parse::<f64>()
            .map_err(|_| Error::parse(line, format!("cannot parse `{t}` as a number"))),
    }
}

fn parse_floats(s: &str, line: usize) -> Result<Vec<f64>> {
    s.split(',').map(|p| parse_float(p, line)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn poly(c: &[f64]) -> Potential {
        Potential::polynomial(c.to_vec(), Interval::REAL_LINE).unwrap()
    }

    #[test]
    fn horner_values_and_derivatives() {
        let sq = poly(&[0.0, 0.0, 1.0]);
        assert_eq!(sq.eval(1.0, 0).unwrap(), 1.0);
        assert_eq!(sq.eval(3.0, 2).unwrap(), 2.0);
        let quartic = poly(&[0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(quartic.eval(2.0, 1).unwrap(), 32.0);
    }

    #[test]
    fn eval_outside_domain_is_rejected() {
        let p = Potential::polynomial(vec![0.0, 0.0, 1.0], Interval::new(-1.0, 1.0).unwrap()).unwrap();
        assert!(matches!(p.eval(1.5, 0), Err(Error::Domain(_))));
        assert!(p.eval(1.0, 0).is_ok());
    }

    #[test]
    fn assumption_checks() {
        let r = check_assumptions(&poly(&[0.0, 0.0, 1.0]), 20.0, 10_000).unwrap();
        assert!(r.strictly_convex && r.confining && r.passes(true));
        assert_eq!(r.min_second_derivative, 2.0);

        let cubic = check_assumptions(&poly(&[0.0, 0.0, 0.0, 1.0]), 20.0, 10_000).unwrap();
        assert!(!cubic.confining);

        // odd point count puts t = 0 on the grid
        let quartic = check_assumptions(&poly(&[0.0, 0.0, 0.0, 0.0, 1.0]), 20.0, 10_001).unwrap();
        assert!(!quartic.strictly_convex);
        assert_eq!(quartic.min_second_derivative, 0.0);
        assert!(quartic.derivative_increasing);
        assert!(quartic.passes(false));
        assert!(!quartic.passes(true));
    }

    #[test]
    fn too_few_grid_points() {
        assert!(check_assumptions(&Potential::gaussian(), 1.0, 1).is_err());
    }

    #[test]
    fn interaction_values() {
        let h = Interaction::gaussian(-1.0, 1.0).unwrap();
        assert_eq!(h.eval(0.0, 0).unwrap(), -1.0);
        assert_eq!(h.eval(0.0, 2).unwrap(), 1.0);
        assert!(h.is_negative_definite());
        assert!(Interaction::gaussian(1.0, 0.0).is_err());
    }

    #[test]
    fn field_dominance_warning() {
        let v = Potential::gaussian();
        assert!(!field_dominates(&v, &poly(&[0.0, 1.0]), 20.0, 100));
        assert!(field_dominates(&v, &poly(&[0.0, 0.0, 0.0, 1.0]), 20.0, 100));
    }

    #[test]
    fn model_file_roundtrip() {
        let text = "# repulsive test\ntag = rps\nQ.coeffs = 0,0,1\nh.gamma = -0.5\nh.width = 1.0\nJ = -inf,inf\n";
        let m = Model::parse(text).unwrap();
        match &m.ensemble {
            Ensemble::Repulsive { q, h } => {
                assert_eq!(q.coeffs(), &[0.0, 0.0, 1.0]);
                assert_eq!(h.gamma(), -0.5);
            }
            _ => panic!("expected repulsive model"),
        }
        assert_eq!(Model::parse(&m.to_file_string()).unwrap(), m);
        let gue = Model::parse("V.coeffs = 0,0,1").unwrap();
        assert!(gue.is_gaussian());
    }

    #[test]
    fn model_file_errors_carry_line_numbers() {
        let err = Model::parse("tag = x\nV.coeffs = 0,zero,1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = Model::parse("tag = x\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    proptest! {
        #[test]
        fn interaction_is_symmetric(t in -50.0f64..50.0, g in -3.0f64..3.0, w in 0.1f64..5.0) {
            let h = Interaction::gaussian(g, w).unwrap();
            prop_assert_eq!(h.value(t), h.value(-t));
        }

        #[test]
        fn horner_matches_power_sum(
            coeffs in prop::collection::vec(-5.0f64..5.0, 1..11),
            t in -10.0f64..10.0,
        ) {
            let p = poly(&coeffs);
            let naive: f64 = coeffs.iter().enumerate().map(|(k, c)| c * t.powi(k as i32)).sum();
            let scale: f64 = coeffs.iter().enumerate().map(|(k, c)| (c * t.powi(k as i32)).abs()).sum();
            prop_assert!((p.value(t) - naive).abs() <= 1e-13 * scale.max(1e-300));
        }
    }
}
