//! Seeded studies over ensemble sizes and windows, with CSV reports and
//! plain-text persistence of configurations and study files.
//!
//! Every replica draws from the stream `derive_stream(N, window index,
//! replica index)` of the base seed and results are folded in replica
//! order, so reports do not depend on the number of worker threads.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use log::info;
use rayon::prelude::*;

use crate::equilibrium::{build_measure, repulsive_fixed_point, EquilibriumMeasure, FixedPointOptions};
use crate::error::{Error, Result};
use crate::gaudin::{GaudinParams, GaudinTable};
use crate::models::{Ensemble, Model};
use crate::sampling::{derive_stream, sample, Configuration, McmcParams, SamplerChoice, SamplerKind};
use crate::spacing::{
    empirical_spacing_cdf, intensity_cdf, kolmogorov_distance, length_normalized_cdf, window_spacings,
    IntervalSpec,
};

/// Version written into study files and configuration headers.
pub const FORMAT_VERSION: u32 = 1;

/// Density nodes used for limiting measures in studies.
const STUDY_DENSITY_NODES: usize = 256;

/// Everything needed to regenerate a study.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub model: Model,
    /// Where the model came from; `None` for the built-in GUE.
    pub model_path: Option<PathBuf>,
    pub sizes: Vec<usize>,
    pub intervals: Vec<IntervalSpec>,
    pub replicas: usize,
    pub seed: u64,
    pub sampler: SamplerChoice,
    pub mcmc: McmcParams,
    pub gaudin: GaudinParams,
    pub out_dir: PathBuf,
}

impl StudyConfig {
    /// GUE study with default sampler, chain and table settings.
    pub fn gue(sizes: Vec<usize>, intervals: Vec<IntervalSpec>, replicas: usize, seed: u64) -> Self {
        StudyConfig {
            model: Model::gue(),
            model_path: None,
            sizes,
            intervals,
            replicas,
            seed,
            sampler: SamplerChoice::Auto,
            mcmc: McmcParams::default(),
            gaudin: GaudinParams::default(),
            out_dir: PathBuf::from("out"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::Domain("a study needs at least one ensemble size".into()));
        }
        if self.sizes.contains(&0) {
            return Err(Error::Domain("ensemble sizes must be positive".into()));
        }
        if self.intervals.is_empty() {
            return Err(Error::Domain("a study needs at least one interval".into()));
        }
        if self.replicas == 0 {
            return Err(Error::Domain("replicas must be at least 1".into()));
        }
        Ok(())
    }

    /// Parses a flat `key = value` study file; `n` and `interval` may
    /// repeat. Relative model paths are resolved against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut model = None;
        let mut model_path = None;
        let mut sizes = Vec::new();
        let mut intervals = Vec::new();
        let mut replicas = None;
        let mut seed = None;
        let mut sampler = SamplerChoice::Auto;
        let mut mcmc = McmcParams::default();
        let mut gaudin = GaudinParams::default();
        let mut out_dir = PathBuf::from("out");
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(line_no, format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |e: &dyn fmt::Display| Error::parse(line_no, format!("{key}: {e}"));
            match key {
                "version" => {
                    let v: u32 = value.parse().map_err(|e| bad(&e))?;
                    if v != FORMAT_VERSION {
                        return Err(Error::parse(line_no, format!("unsupported study file version {v}")));
                    }
                }
                "model" if value == "gue" => {
                    model = Some(Model::gue());
                    model_path = None;
                }
                "model" => {
                    let path = base_dir.join(value);
                    model = Some(Model::load(&path).map_err(|e| bad(&e))?);
                    model_path = Some(PathBuf::from(value));
                }
                "n" => sizes.push(value.parse().map_err(|e| bad(&e))?),
                "interval" => intervals.push(value.parse().map_err(|e| bad(&e))?),
                "replicas" => replicas = Some(value.parse().map_err(|e| bad(&e))?),
                "seed" => seed = Some(value.parse().map_err(|e| bad(&e))?),
                "sampler" => sampler = value.parse().map_err(|e| bad(&e))?,
                "mcmc.burn_in" => mcmc.burn_in = value.parse().map_err(|e| bad(&e))?,
                "mcmc.thinning" => mcmc.thinning = value.parse().map_err(|e| bad(&e))?,
                "mcmc.step" => mcmc.initial_step = Some(value.parse().map_err(|e| bad(&e))?),
                "gaudin.smax" => gaudin.s_max = value.parse().map_err(|e| bad(&e))?,
                "gaudin.step" => gaudin.step = value.parse().map_err(|e| bad(&e))?,
                "gaudin.order" => gaudin.order = value.parse().map_err(|e| bad(&e))?,
                "out_dir" => out_dir = PathBuf::from(value),
                other => return Err(Error::parse(line_no, format!("unknown key `{other}`"))),
            }
        }
        let config = StudyConfig {
            model: model.ok_or_else(|| Error::parse(0, "missing `model`"))?,
            model_path,
            sizes,
            intervals,
            replicas: replicas.ok_or_else(|| Error::parse(0, "missing `replicas`"))?,
            seed: seed.ok_or_else(|| Error::parse(0, "missing `seed`"))?,
            sampler,
            mcmc,
            gaudin,
            out_dir,
        };
        config.validate().map_err(|e| Error::parse(0, e.to_string()))?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        StudyConfig::parse(&text, base).map_err(|e| e.with_path(path))
    }

    /// Study file text; parsing it back (from the same directory) gives an
    /// equal config.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "version = {FORMAT_VERSION}");
        match &self.model_path {
            Some(p) => {
                let _ = writeln!(out, "model = {}", p.display());
            }
            None => out.push_str("model = gue\n"),
        }
        for n in &self.sizes {
            let _ = writeln!(out, "n = {n}");
        }
        for i in &self.intervals {
            let _ = writeln!(out, "interval = {i}");
        }
        let _ = writeln!(out, "replicas = {}", self.replicas);
        let _ = writeln!(out, "seed = {}", self.seed);
        let sampler = match self.sampler {
            SamplerChoice::Auto => "auto",
            SamplerChoice::Tridiagonal => "tridiagonal",
            SamplerChoice::Mcmc => "mcmc",
        };
        let _ = writeln!(out, "sampler = {sampler}");
        let _ = writeln!(out, "mcmc.burn_in = {}", self.mcmc.burn_in);
        let _ = writeln!(out, "mcmc.thinning = {}", self.mcmc.thinning);
        if let Some(step) = self.mcmc.initial_step {
            let _ = writeln!(out, "mcmc.step = {step:?}");
        }
        let _ = writeln!(out, "gaudin.smax = {:?}", self.gaudin.s_max);
        let _ = writeln!(out, "gaudin.step = {:?}", self.gaudin.step);
        let _ = writeln!(out, "gaudin.order = {}", self.gaudin.order);
        let _ = writeln!(out, "out_dir = {}", self.out_dir.display());
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_file_string())?;
        Ok(())
    }
}

/// Limiting measure used for unfolding: the equilibrium measure of `V` for
/// invariant ensembles (the field `f` only shifts it at order `1/N`), the
/// self-consistent measure for repulsive systems.
pub fn limiting_measure(model: &Model) -> Result<EquilibriumMeasure> {
    match &model.ensemble {
        Ensemble::Invariant { v, .. } => build_measure(v, STUDY_DENSITY_NODES, 1e-12),
        Ensemble::Repulsive { q, h } => Ok(repulsive_fixed_point(q, h, &FixedPointOptions::default())?.measure),
    }
}

/// Stream of replica `replica` in window `interval_index` at size `n`.
pub fn replica_stream(n: usize, interval_index: usize, replica: usize) -> u64 {
    derive_stream(&[n as u64, interval_index as u64, replica as u64])
}

/// How the spacing measure is turned into a distribution function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// Divide by the number of spacings (`σ̂`).
    Count,
    /// Divide by the window length (`σ/|I|`).
    Length,
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::Count => "count",
            Normalization::Length => "length",
        })
    }
}

/// Spacings of every replica for one `(N, window)` cell, in replica order.
#[derive(Debug, Clone)]
pub struct ReplicaSpacings {
    pub n: usize,
    pub interval: IntervalSpec,
    pub interval_length: f64,
    pub spacings: Vec<Vec<f64>>,
}

/// Samples and unfolds the replicas of one cell.
pub fn collect_spacings(
    c: &StudyConfig,
    measure: &EquilibriumMeasure,
    n: usize,
    interval_index: usize,
) -> Result<ReplicaSpacings> {
    let spec = c.intervals[interval_index];
    let per_replica: Vec<(Vec<f64>, f64)> = (0..c.replicas)
        .into_par_iter()
        .map(|r| {
            let stream = replica_stream(n, interval_index, r);
            let x = sample(&c.model, n, c.sampler, &c.mcmc, c.seed, stream)?;
            window_spacings(&x, measure, &spec)
        })
        .collect::<Result<_>>()?;
    let interval_length = per_replica.first().map_or(0.0, |p| p.1);
    Ok(ReplicaSpacings {
        n,
        interval: spec,
        interval_length,
        spacings: per_replica.into_iter().map(|p| p.0).collect(),
    })
}

/// Kolmogorov distance of each non-empty replica; the second value counts
/// replicas without spacings.
pub fn replica_distances(cell: &ReplicaSpacings, table: &GaudinTable, norm: Normalization) -> (Vec<f64>, usize) {
    let mut out = Vec::with_capacity(cell.spacings.len());
    let mut excluded = 0;
    for s in &cell.spacings {
        let e = match norm {
            Normalization::Count => empirical_spacing_cdf(s),
            Normalization::Length => length_normalized_cdf(s, cell.interval_length),
        };
        match e {
            Ok(e) => out.push(kolmogorov_distance(&e, table)),
            Err(_) => excluded += 1,
        }
    }
    (out, excluded)
}

/// Mean, standard error and median of a sample (`NaN` when empty).
pub fn summarize(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let se = if n > 1 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    (mean, se, median)
}

/// One row of a convergence report.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub model_tag: String,
    pub n: usize,
    pub interval: IntervalSpec,
    pub interval_length: f64,
    pub replicas: usize,
    pub normalization: Normalization,
    pub seed: u64,
    pub mean_distance: f64,
    pub std_error: f64,
    pub median_distance: f64,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub const HEADER: &'static str = "model_tag,n,interval,interval_length,replicas,normalization,seed,mean_distance,std_error,median_distance,excluded";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:?},{},{},{},{:?},{:?},{:?},{}",
                r.model_tag,
                r.n,
                r.interval,
                r.interval_length,
                r.replicas,
                r.normalization,
                r.seed,
                r.mean_distance,
                r.std_error,
                r.median_distance,
                r.excluded
            );
        }
        out
    }

    /// Row for `(n, interval index)` and normalisation, in study order.
    pub fn find(&self, n: usize, interval: &IntervalSpec, norm: Normalization) -> Option<&ConvergenceRow> {
        self.rows
            .iter()
            .find(|r| r.n == n && r.interval == *interval && r.normalization == norm)
    }
}

/// Mean Kolmogorov distance to the Gaudin law per `(N, window)` in both
/// normalisations.
pub fn run_convergence_study(c: &StudyConfig, table: &GaudinTable) -> Result<ConvergenceReport> {
    c.validate()?;
    let measure = limiting_measure(&c.model)?;
    let mut report = ConvergenceReport::default();
    for &n in &c.sizes {
        for idx in 0..c.intervals.len() {
            let cell = collect_spacings(c, &measure, n, idx)?;
            for norm in [Normalization::Count, Normalization::Length] {
                let (d, excluded) = replica_distances(&cell, table, norm);
                let (mean, se, median) = summarize(&d);
                info!("N = {n}, {}: {norm} mean {mean:.4} ± {se:.4}", cell.interval);
                report.rows.push(ConvergenceRow {
                    model_tag: c.model.tag.clone(),
                    n,
                    interval: cell.interval,
                    interval_length: cell.interval_length,
                    replicas: c.replicas,
                    normalization: norm,
                    seed: c.seed,
                    mean_distance: mean,
                    std_error: se,
                    median_distance: median,
                    excluded,
                });
            }
        }
    }
    Ok(report)
}

/// Least-squares line through `(log size, log distance)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateFit {
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Fits below this `r²` are reported as inconclusive.
pub const MIN_R2: f64 = 0.8;

impl RateFit {
    pub fn is_conclusive(&self) -> bool {
        self.r2 >= MIN_R2
    }
}

/// Fits `log d = intercept + slope · log L` to `(L, d)` pairs.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::Domain(format!("a rate fit needs at least 3 sizes, got {}", points.len())));
    }
    if points.iter().any(|&(l, d)| !(l > 0.0) || !(d > 0.0)) {
        return Err(Error::Domain("rate fits need positive sizes and distances".into()));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(l, d)| (l.ln(), d.ln())).collect();
    let k = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / k;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("rate fits need at least two distinct sizes".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    // A constant response is fitted exactly.
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(RateFit {
        points: logs,
        slope,
        intercept,
        r2,
    })
}

/// Convergence report plus one log–log fit per ensemble size.
#[derive(Debug, Clone, PartialEq)]
pub struct RateStudy {
    pub report: ConvergenceReport,
    pub fits: Vec<(usize, RateFit)>,
}

impl RateStudy {
    pub fn fit_csv(&self) -> String {
        let mut out = String::from("model_tag,n,normalization,seed,replicas,slope,intercept,r2,status\n");
        let tag = self.report.rows.first().map_or("", |r| r.model_tag.as_str());
        let (seed, replicas) = self.report.rows.first().map_or((0, 0), |r| (r.seed, r.replicas));
        for (n, f) in &self.fits {
            let status = if f.is_conclusive() { "conclusive" } else { "inconclusive" };
            let _ = writeln!(
                out,
                "{tag},{n},{},{seed},{replicas},{:?},{:?},{:?},{status}",
                Normalization::Count,
                f.slope,
                f.intercept,
                f.r2
            );
        }
        out
    }
}

/// Convergence study followed by a fit of mean `σ̂` distance against window
/// length for each `N`.
pub fn run_rate_study(c: &StudyConfig, table: &GaudinTable) -> Result<RateStudy> {
    let report = run_convergence_study(c, table)?;
    let mut fits = Vec::new();
    for &n in &c.sizes {
        let pts: Vec<(f64, f64)> = report
            .rows
            .iter()
            .filter(|r| r.n == n && r.normalization == Normalization::Count)
            .map(|r| (r.interval_length, r.mean_distance))
            .collect();
        let fit = fit_rate(&pts)?;
        if fit.is_conclusive() {
            info!("N = {n}: slope {:.3} (r² = {:.3})", fit.slope, fit.r2);
        } else {
            info!("N = {n}: fit inconclusive (r² = {:.3})", fit.r2);
        }
        fits.push((n, fit));
    }
    Ok(RateStudy { report, fits })
}

/// Smallest replica count accepted by [`run_intensity_study`].
pub const MIN_INTENSITY_REPLICAS: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct IntensityRow {
    pub model_tag: String,
    pub n: usize,
    pub interval: IntervalSpec,
    pub interval_length: f64,
    pub replicas: usize,
    pub seed: u64,
    /// Distance of the pooled `R·|I|`-normalised measure to the Gaudin law.
    pub pooled_distance: f64,
    /// Total mass of the pooled measure.
    pub pooled_mass: f64,
    /// Single-replica distances in the same (length) normalisation.
    pub single_mean: f64,
    pub single_median: f64,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntensityReport {
    pub rows: Vec<IntensityRow>,
}

impl IntensityReport {
    pub const HEADER: &'static str = "model_tag,n,interval,interval_length,replicas,normalization,seed,pooled_distance,pooled_mass,single_mean,single_median,excluded";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:?},{},{},{},{:?},{:?},{:?},{:?},{}",
                r.model_tag,
                r.n,
                r.interval,
                r.interval_length,
                r.replicas,
                Normalization::Length,
                r.seed,
                r.pooled_distance,
                r.pooled_mass,
                r.single_mean,
                r.single_median,
                r.excluded
            );
        }
        out
    }
}

/// Pooled spacing distribution against single replicas per `(N, window)`.
pub fn run_intensity_study(c: &StudyConfig, table: &GaudinTable) -> Result<IntensityReport> {
    c.validate()?;
    if c.replicas < MIN_INTENSITY_REPLICAS {
        return Err(Error::Domain(format!(
            "intensity studies need at least {MIN_INTENSITY_REPLICAS} replicas"
        )));
    }
    let measure = limiting_measure(&c.model)?;
    let mut report = IntensityReport::default();
    for &n in &c.sizes {
        for idx in 0..c.intervals.len() {
            let cell = collect_spacings(c, &measure, n, idx)?;
            let pooled = intensity_cdf(&cell.spacings, cell.interval_length)?;
            let (single, excluded) = replica_distances(&cell, table, Normalization::Length);
            let (single_mean, _, single_median) = summarize(&single);
            let pooled_distance = kolmogorov_distance(&pooled, table);
            info!("N = {n}, {}: pooled {pooled_distance:.4}, single median {single_median:.4}", cell.interval);
            report.rows.push(IntensityRow {
                model_tag: c.model.tag.clone(),
                n,
                interval: cell.interval,
                interval_length: cell.interval_length,
                replicas: c.replicas,
                seed: c.seed,
                pooled_distance,
                pooled_mass: pooled.total_mass(),
                single_mean,
                single_median,
                excluded,
            });
        }
    }
    Ok(report)
}

const CONFIGURATION_MAGIC: &str = "spacing-lab-configuration";

/// Configuration file text: a header line with provenance, then one point
/// per line in round-trip precision.
pub fn configuration_to_text(x: &Configuration) -> Result<String> {
    if x.model_tag.is_empty() || x.model_tag.contains(char::is_whitespace) {
        return Err(Error::Domain(format!("model tag `{}` must be one non-empty word", x.model_tag)));
    }
    let mut out = format!(
        "{CONFIGURATION_MAGIC} v{FORMAT_VERSION} model_tag={} seed={} stream={} sampler={} n={}\n",
        x.model_tag,
        x.seed,
        x.stream,
        x.sampler,
        x.len()
    );
    for p in x.points() {
        let _ = writeln!(out, "{p:?}");
    }
    Ok(out)
}

pub fn configuration_from_text(text: &str) -> Result<Configuration> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::parse(1, "empty configuration file"))?;
    let mut fields = header.split_whitespace();
    if fields.next() != Some(CONFIGURATION_MAGIC) {
        return Err(Error::parse(1, "not a spacing-lab configuration file"));
    }
    let version = fields.next().unwrap_or("");
    if version != format!("v{FORMAT_VERSION}") {
        return Err(Error::parse(1, format!("unsupported configuration version `{version}`")));
    }
    let (mut tag, mut seed, mut stream, mut sampler, mut n) = (None, None, None, None, None);
    for field in fields {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| Error::parse(1, format!("malformed header field `{field}`")))?;
        let bad = |_| Error::parse(1, format!("bad value in `{field}`"));
        match k {
            "model_tag" => tag = Some(v.to_string()),
            "seed" => seed = Some(v.parse::<u64>().map_err(bad)?),
            "stream" => stream = Some(v.parse::<u64>().map_err(bad)?),
            "sampler" => sampler = Some(v.parse::<SamplerKind>().map_err(|e| Error::parse(1, e.to_string()))?),
            "n" => n = Some(v.parse::<usize>().map_err(bad)?),
            other => return Err(Error::parse(1, format!("unknown header field `{other}`"))),
        }
    }
    let missing = |name: &str| Error::parse(1, format!("header lacks `{name}`"));
    let mut points = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let p: f64 = line
            .parse()
            .map_err(|_| Error::parse(idx + 2, format!("cannot parse point `{line}`")))?;
        points.push(p);
    }
    let n = n.ok_or_else(|| missing("n"))?;
    if points.len() != n {
        return Err(Error::parse(1, format!("header announces {n} points, file has {}", points.len())));
    }
    Configuration::new(
        points,
        tag.ok_or_else(|| missing("model_tag"))?,
        seed.ok_or_else(|| missing("seed"))?,
        stream.ok_or_else(|| missing("stream"))?,
        sampler.ok_or_else(|| missing("sampler"))?,
    )
    .map_err(|e| Error::parse(0, e.to_string()))
}

pub fn save_configuration(x: &Configuration, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, configuration_to_text(x)?)?;
    Ok(())
}

pub fn load_configuration(path: impl AsRef<Path>) -> Result<Configuration> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    configuration_from_text(&text).map_err(|e| e.with_path(path))
}
