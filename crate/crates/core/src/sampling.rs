//! Samplers for the invariant ensembles and the repulsive particle systems.
//!
//! The Gaussian case is sampled exactly from the β = 2 tridiagonal model;
//! every other model goes through single-particle random-walk Metropolis on
//! the unnormalised log-density.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use log::warn;
use rayon::prelude::*;

use crate::equilibrium;
use crate::models;
use crate::error::{Error, Result};
use crate::models::{Ensemble, Interaction, Model, Potential};

/// Which sampler produced a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplerKind {
    Tridiagonal,
    Mcmc,
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SamplerKind::Tridiagonal => "tridiagonal",
            SamplerKind::Mcmc => "mcmc",
        })
    }
}

impl std::str::FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tridiagonal" => Ok(SamplerKind::Tridiagonal),
            "mcmc" => Ok(SamplerKind::Mcmc),
            other => Err(Error::Domain(format!("unknown sampler `{other}`"))),
        }
    }
}

/// Sampler selection; `Auto` uses the exact sampler whenever it applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplerChoice {
    #[default]
    Auto,
    Tridiagonal,
    Mcmc,
}

impl std::str::FromStr for SamplerChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(SamplerChoice::Auto),
            "tridiagonal" => Ok(SamplerChoice::Tridiagonal),
            "mcmc" => Ok(SamplerChoice::Mcmc),
            other => Err(Error::Domain(format!("unknown sampler `{other}`"))),
        }
    }
}

/// One sampled, ordered particle configuration with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    points: Vec<f64>,
    pub model_tag: String,
    pub seed: u64,
    /// Random stream within `seed` (the replica's position in its batch).
    pub stream: u64,
    pub sampler: SamplerKind,
}

impl Configuration {
    /// Sorts `points` and rejects ties.
    pub fn new(
        mut points: Vec<f64>,
        model_tag: impl Into<String>,
        seed: u64,
        stream: u64,
        sampler: SamplerKind,
    ) -> Result<Self> {
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain("configuration contains non-finite points".into()));
        }
        points.sort_by(f64::total_cmp);
        if points.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Domain("configuration contains coincident points".into()));
        }
        Ok(Configuration {
            points,
            model_tag: model_tag.into(),
            seed,
            stream,
            sampler,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Applies a nondecreasing map to every point, keeping provenance. Ties
    /// produced by the map (e.g. clamping) are kept.
    pub fn map_points(&self, f: impl Fn(f64) -> f64) -> Configuration {
        Configuration {
            points: self.points.iter().map(|&p| f(p)).collect(),
            model_tag: self.model_tag.clone(),
            seed: self.seed,
            stream: self.stream,
            sampler: self.sampler,
        }
    }
}

/// Metropolis tuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McmcParams {
    pub burn_in: usize,
    pub thinning: usize,
    /// Initial proposal standard deviation; `None` means `1/√N`.
    pub initial_step: Option<f64>,
    pub target_acceptance: f64,
}

impl Default for McmcParams {
    fn default() -> Self {
        McmcParams {
            burn_in: 2000,
            thinning: 50,
            initial_step: None,
            target_acceptance: 0.23,
        }
    }
}

impl McmcParams {
    fn validate(&self) -> Result<()> {
        if self.burn_in == 0 || self.thinning == 0 {
            return Err(Error::Domain("burn-in and thinning must be positive".into()));
        }
        if let Some(s) = self.initial_step {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Domain("initial step must be positive".into()));
            }
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::Domain("target acceptance must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Chain diagnostics returned alongside an MCMC sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainStats {
    pub final_step: f64,
    /// Acceptance rate over the post-adaptation sweeps.
    pub acceptance: f64,
}

/// Random generator for `(seed, stream)`: ChaCha8 keyed by the seed, with
/// one independent stream per replica.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes several identifiers into one stream number (splitmix64 chaining).
pub fn derive_stream(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x243f_6a88_85a3_08d3;
    for &p in parts {
        h = splitmix64(h ^ p);
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Exact GUE sample for `V(t) = t²` (support `[−√2, √2]`), stream 0.
pub fn sample_gue(n: usize, seed: u64) -> Configuration {
    sample_gue_stream(n, seed, 0)
}

/// Exact GUE sample on a given random stream.
///
/// The β = 2 tridiagonal model has standard normal diagonal and
/// `χ_{2k}/√2` off-diagonal entries; its eigenvalues have joint density
/// `∝ Δ² exp(−Σλ²/2)`, so `x = λ/√(2N)` has density `∝ Δ² exp(−NΣx²)`.
pub fn sample_gue_stream(n: usize, seed: u64, stream: u64) -> Configuration {
    assert!(n >= 1, "need at least one eigenvalue");
    let mut rng = stream_rng(seed, stream);
    loop {
        let mut diag: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut off: Vec<f64> = (1..n)
            .map(|k| {
                let dof = 2.0 * (n - k) as f64;
                let chi2: f64 = ChiSquared::new(dof).unwrap().sample(&mut rng);
                (chi2 / 2.0).sqrt()
            })
            .collect();
        if tridiagonal_eigenvalues(&mut diag, &mut off).is_err() {
            continue;
        }
        let scale = 1.0 / (2.0 * n as f64).sqrt();
        let points: Vec<f64> = diag.iter().map(|l| l * scale).collect();
        if let Ok(c) = Configuration::new(points, "gue", seed, stream, SamplerKind::Tridiagonal) {
            return c;
        }
    }
}

/// Eigenvalues of a symmetric tridiagonal matrix (implicit QL with Wilkinson
/// shifts). `diag` is overwritten with the eigenvalues in ascending order;
/// `off[i]` couples rows `i` and `i + 1` and is destroyed.
pub fn tridiagonal_eigenvalues(diag: &mut [f64], off: &mut [f64]) -> Result<()> {
    let n = diag.len();
    if n == 0 {
        return Ok(());
    }
    assert_eq!(off.len() + 1, n);
    let mut e = Vec::with_capacity(n);
    e.extend_from_slice(off);
    e.push(0.0);
    let d = diag;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Numerical("tridiagonal QL did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(())
}

/// Unnormalised log-density of a model at `x` (any order). Returns `−∞`
/// for coincident points or points outside `J`.
pub fn log_density(model: &Ensemble, x: &[f64]) -> f64 {
    LogGas::new(model, x.len()).full(x)
}

/// The log-gas energy terms, with an O(N) single-particle update.
#[derive(Debug, Clone)]
pub struct LogGas<'a> {
    confining: &'a Potential,
    field: Option<&'a Potential>,
    interaction: Option<&'a Interaction>,
    n: f64,
}

impl<'a> LogGas<'a> {
    pub fn new(model: &'a Ensemble, n: usize) -> Self {
        match model {
            Ensemble::Invariant { v, f } => LogGas {
                confining: v,
                field: f.as_ref(),
                interaction: None,
                n: n as f64,
            },
            Ensemble::Repulsive { q, h } => LogGas {
                confining: q,
                field: None,
                interaction: if h.is_zero() { None } else { Some(h) },
                n: n as f64,
            },
        }
    }

    fn one_body(&self, t: f64) -> f64 {
        let mut e = -self.n * self.confining.value(t);
        if let Some(f) = self.field {
            e += f.value(t);
        }
        e
    }

    /// Full log-density.
    pub fn full(&self, x: &[f64]) -> f64 {
        let dom = self.confining.domain();
        if x.iter().any(|&t| !dom.contains(t)) {
            return f64::NEG_INFINITY;
        }
        let mut total = 0.0;
        for (i, &xi) in x.iter().enumerate() {
            total += self.one_body(xi);
            for &xj in &x[i + 1..] {
                let d = xi - xj;
                if d == 0.0 {
                    return f64::NEG_INFINITY;
                }
                total += 2.0 * d.abs().ln();
                if let Some(h) = self.interaction {
                    total -= h.value(d);
                }
            }
        }
        total
    }

    /// Change of the log-density when particle `i` moves to `y`.
    pub fn delta(&self, x: &[f64], i: usize, y: f64) -> f64 {
        if !self.confining.domain().contains(y) {
            return f64::NEG_INFINITY;
        }
        let xi = x[i];
        let mut log_ratio = 0.0;
        let mut prod = 1.0;
        let mut pair = 0.0;
        for (j, &xj) in x.iter().enumerate() {
            if j == i {
                continue;
            }
            let num = y - xj;
            if num == 0.0 {
                return f64::NEG_INFINITY;
            }
            prod *= num / (xi - xj);
            if !(1e-100..=1e100).contains(&prod.abs()) {
                log_ratio += prod.abs().ln();
                prod = 1.0;
            }
            if let Some(h) = self.interaction {
                pair += h.value(num) - h.value(xi - xj);
            }
        }
        log_ratio += prod.abs().ln();
        2.0 * log_ratio - pair + self.one_body(y) - self.one_body(xi)
    }
}

/// Metropolis sample from an invariant ensemble with field `v` (and `f`).
pub fn sample_invariant_mcmc(
    v: &Potential,
    f: Option<&Potential>,
    n: usize,
    params: &McmcParams,
    seed: u64,
) -> Result<Configuration> {
    let model = Model::invariant("invariant", v.clone(), f.cloned());
    sample_mcmc(&model, n, params, seed, 0).map(|(c, _)| c)
}

/// Metropolis sample from the repulsive system with field `q` and pair
/// interaction `h`.
pub fn sample_repulsive_mcmc(
    q: &Potential,
    h: &Interaction,
    n: usize,
    params: &McmcParams,
    seed: u64,
) -> Result<Configuration> {
    let model = Model::repulsive("repulsive", q.clone(), *h);
    sample_mcmc(&model, n, params, seed, 0).map(|(c, _)| c)
}

/// Runs one chain and returns its final state plus diagnostics.
pub fn sample_mcmc(
    model: &Model,
    n: usize,
    params: &McmcParams,
    seed: u64,
    stream: u64,
) -> Result<(Configuration, ChainStats)> {
    params.validate()?;
    if n < 2 {
        return Err(Error::Domain("MCMC needs at least two particles".into()));
    }
    if let Ensemble::Invariant { v, f: Some(f) } = &model.ensemble {
        if models::field_dominates(v, f, 10.0, 201) {
            warn!("model `{}`: |f| exceeds |V| far out; the chain may be unstable", model.tag);
        }
    }
    let gas = LogGas::new(&model.ensemble, n);
    let mut rng = stream_rng(seed, stream);
    let mut x = initial_state(model.potential(), n);
    let mut step = params.initial_step.unwrap_or(1.0 / (n as f64).sqrt());
    let mut log_step = step.ln();

    for sweep in 0..params.burn_in {
        let accepted = metropolis_sweep(&gas, &mut x, step, &mut rng);
        let rate = accepted as f64 / n as f64;
        let gain = 1.0 / (1.0 + sweep as f64 / 10.0).powf(0.6);
        log_step += gain * (rate - params.target_acceptance);
        step = log_step.exp();
    }
    let mut accepted = 0usize;
    for _ in 0..params.thinning {
        accepted += metropolis_sweep(&gas, &mut x, step, &mut rng);
    }
    let acceptance = accepted as f64 / (n * params.thinning) as f64;
    if accepted == 0 {
        return Err(Error::Mixing { acceptance });
    }
    let config = Configuration::new(x, model.tag.clone(), seed, stream, SamplerKind::Mcmc)?;
    Ok((
        config,
        ChainStats {
            final_step: step,
            acceptance,
        },
    ))
}

fn metropolis_sweep(gas: &LogGas<'_>, x: &mut [f64], step: f64, rng: &mut ChaCha8Rng) -> usize {
    let mut accepted = 0;
    for i in 0..x.len() {
        let z: f64 = StandardNormal.sample(rng);
        let y = x[i] + step * z;
        let delta = gas.delta(x, i, y);
        if delta >= 0.0 || rng.random::<f64>() < delta.exp() {
            x[i] = y;
            accepted += 1;
        }
    }
    accepted
}

// Quantiles of the equilibrium measure when it can be built, otherwise
// arcsine-spread points on the endpoint interval (or [-1, 1]).
fn initial_state(v: &Potential, n: usize) -> Vec<f64> {
    if let Ok(m) = equilibrium::build_measure(v, 128, 1e-10) {
        let pts: Option<Vec<f64>> = (0..n)
            .map(|i| m.cdf_inverse((i as f64 + 0.5) / n as f64).ok())
            .collect();
        if let Some(p) = pts {
            if p.windows(2).all(|w| w[0] < w[1]) {
                return p;
            }
        }
    }
    let (a, b) = equilibrium::mrs_endpoints(v, 1e-8).unwrap_or((-1.0, 1.0));
    (0..n)
        .map(|i| {
            let x = -(std::f64::consts::PI * (i as f64 + 0.5) / n as f64).cos();
            0.5 * (a + b) + 0.5 * (b - a) * x
        })
        .collect()
}

/// Draws one configuration with the requested sampler.
pub fn sample(
    model: &Model,
    n: usize,
    choice: SamplerChoice,
    params: &McmcParams,
    seed: u64,
    stream: u64,
) -> Result<Configuration> {
    let exact = model.is_gaussian();
    match choice {
        SamplerChoice::Tridiagonal if !exact => Err(Error::Domain(format!(
            "the tridiagonal sampler only covers V(t) = t², f = 0 (model `{}`)",
            model.tag
        ))),
        SamplerChoice::Tridiagonal | SamplerChoice::Auto if exact => {
            let mut c = sample_gue_stream(n, seed, stream);
            c.model_tag = model.tag.clone();
            Ok(c)
        }
        _ => sample_mcmc(model, n, params, seed, stream).map(|(c, _)| c),
    }
}

/// Independent replicas on streams `0..replicas`, computed in parallel and
/// returned in stream order.
pub fn sample_replicas(
    model: &Model,
    n: usize,
    replicas: usize,
    choice: SamplerChoice,
    params: &McmcParams,
    seed: u64,
) -> Result<Vec<Configuration>> {
    (0..replicas as u64)
        .into_par_iter()
        .map(|r| sample(model, n, choice, params, seed, r))
        .collect()
}
