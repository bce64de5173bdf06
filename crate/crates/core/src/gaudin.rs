//! The universal bulk spacing law: sine kernel, gap probability `E(s)` as a
//! Fredholm determinant, the Gaudin distribution `G = 1 + E'`, its
//! truncated determinant series, and the Wigner surmise.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use log::info;
use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::quadrature::gauss_legendre;

pub const TABLE_FORMAT_VERSION: u32 = 1;

/// `sin(πd)/(πd)`.
pub fn sine_kernel(d: f64) -> f64 {
    let x = PI * d;
    if d.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `det[S(t_i − t_j)]`.
pub fn sine_det(points: &[f64]) -> f64 {
    let k = points.len();
    if k == 0 {
        return 1.0;
    }
    DMatrix::from_fn(k, k, |i, j| sine_kernel(points[i] - points[j])).determinant()
}

/// Probability `E(s)` that an interval of length `s` contains no point of the
/// unit-density sine process, computed as `det(I − K_s)` by an `m`-point
/// Gauss–Legendre Nyström discretisation.
pub fn gap_probability(s: f64, m: usize) -> Result<f64> {
    if !(s >= 0.0) {
        return Err(Error::Domain(format!("gap length must be nonnegative, got {s}")));
    }
    if m < 4 {
        return Err(Error::Domain("quadrature order must be at least 4".into()));
    }
    if s == 0.0 {
        return Ok(1.0);
    }
    let rule = gauss_legendre(m).mapped(0.0, s);
    let sw: Vec<f64> = rule.weights.iter().map(|w| w.sqrt()).collect();
    let mat = DMatrix::from_fn(m, m, |i, j| {
        let a = sw[i] * sine_kernel(rule.nodes[i] - rule.nodes[j]) * sw[j];
        if i == j { 1.0 - a } else { -a }
    });
    Ok(mat.determinant())
}

/// Parameters identifying a Gaudin table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaudinParams {
    pub s_max: f64,
    pub step: f64,
    pub order: usize,
}

impl Default for GaudinParams {
    fn default() -> Self {
        GaudinParams {
            s_max: 5.0,
            step: 0.005,
            order: 40,
        }
    }
}

/// Tabulated `E(s)` and `G(s)` on a uniform grid, with monotone
/// interpolation. Beyond `s_max`, `G` is taken to be 1.
#[derive(Debug, Clone)]
pub struct GaudinTable {
    params: GaudinParams,
    s_grid: Vec<f64>,
    e_values: Vec<f64>,
    g_values: Vec<f64>,
    interp: MonotoneCubic,
}

/// Largest correction allowed when clamping/monotonising the tabulated `G`.
pub const MAX_MONOTONE_CORRECTION: f64 = 1e-6;

/// Builds the table: `E` on the grid, `G = 1 + E'` by fifth-order finite
/// differences (one-sided near the ends), then clamped and monotonised.
pub fn build_gaudin_table(s_max: f64, step: f64, m: usize) -> Result<GaudinTable> {
    if !(step > 0.0) || !(s_max > 0.0) {
        return Err(Error::Domain("s_max and step must be positive".into()));
    }
    let n = (s_max / step).round() as usize;
    if n < 4 || ((n as f64) * step - s_max).abs() > 1e-9 * s_max {
        return Err(Error::Domain(format!(
            "s_max = {s_max} must be a multiple (≥ 4) of step = {step}"
        )));
    }
    let s_grid: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
    let e_values = s_grid
        .par_iter()
        .map(|&s| gap_probability(s, m))
        .collect::<Result<Vec<f64>>>()?;
    let raw: Vec<f64> = (0..=n).map(|i| 1.0 + derivative(&e_values, i, step)).collect();
    let mut g_values = Vec::with_capacity(raw.len());
    let mut running = 0.0f64;
    let mut worst = 0.0f64;
    for &g in &raw {
        running = running.max(g.clamp(0.0, 1.0));
        worst = worst.max((running - g).abs());
        g_values.push(running);
    }
    if worst > MAX_MONOTONE_CORRECTION {
        return Err(Error::Numerical(format!(
            "monotonising G needed a correction of {worst:e}; increase the order or refine the step"
        )));
    }
    Ok(GaudinTable::from_parts(
        GaudinParams {
            s_max,
            step,
            order: m,
        },
        s_grid,
        e_values,
        g_values,
    ))
}

fn derivative(f: &[f64], i: usize, h: f64) -> f64 {
    let n = f.len() - 1;
    let d = if i >= 2 && i + 2 <= n {
        f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]
    } else if i == 0 {
        -25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]
    } else if i == 1 {
        -3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]
    } else if i == n - 1 {
        -f[n - 4] + 6.0 * f[n - 3] - 18.0 * f[n - 2] + 10.0 * f[n - 1] + 3.0 * f[n]
    } else {
        3.0 * f[n - 4] - 16.0 * f[n - 3] + 36.0 * f[n - 2] - 48.0 * f[n - 1] + 25.0 * f[n]
    };
    d / (12.0 * h)
}

/// Whether [`GaudinTable::load_or_build`] reused a cached file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Built,
}

impl GaudinTable {
    fn from_parts(params: GaudinParams, s_grid: Vec<f64>, e_values: Vec<f64>, g_values: Vec<f64>) -> Self {
        let interp = MonotoneCubic::new(s_grid.clone(), g_values.clone());
        GaudinTable {
            params,
            s_grid,
            e_values,
            g_values,
            interp,
        }
    }

    pub fn params(&self) -> GaudinParams {
        self.params
    }

    pub fn s_max(&self) -> f64 {
        self.params.s_max
    }

    pub fn s_grid(&self) -> &[f64] {
        &self.s_grid
    }

    pub fn e_values(&self) -> &[f64] {
        &self.e_values
    }

    pub fn g_values(&self) -> &[f64] {
        &self.g_values
    }

    /// `G(s)`; errors for negative `s`.
    pub fn eval(&self, s: f64) -> Result<f64> {
        if s < 0.0 || s.is_nan() {
            return Err(Error::Domain(format!("G is only defined for s ≥ 0, got {s}")));
        }
        Ok(self.cdf(s))
    }

    /// `G(s)` with `G = 0` for `s < 0` and `G = 1` beyond the table.
    pub fn cdf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else if s > self.params.s_max {
            1.0
        } else {
            self.interp.eval(s).clamp(0.0, 1.0)
        }
    }

    /// `∫_0^{s_max} (1 − G(s)) ds` by the trapezoid rule on the grid: the
    /// mean spacing, which must be 1.
    pub fn mean_spacing(&self) -> f64 {
        let h = self.params.step;
        let n = self.g_values.len() - 1;
        let inner: f64 = self.g_values[1..n].iter().map(|g| 1.0 - g).sum();
        h * (inner + 0.5 * (2.0 - self.g_values[0] - self.g_values[n]))
    }

    pub fn header(&self) -> String {
        format!(
            "gaudin-table v{TABLE_FORMAT_VERSION} smax={:?} step={:?} m={}",
            self.params.s_max, self.params.step, self.params.order
        )
    }

    /// Text form: the header line, then `s,E,G` rows.
    pub fn to_text(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for i in 0..self.s_grid.len() {
            let _ = writeln!(out, "{:?},{:?},{:?}", self.s_grid[i], self.e_values[i], self.g_values[i]);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "empty Gaudin table"))?;
        let params = parse_header(header)?;
        let mut s_grid = Vec::new();
        let mut e_values = Vec::new();
        let mut g_values = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 3 {
                return Err(Error::parse(line_no, format!("expected 3 columns, got {}", cols.len())));
            }
            let mut vals = [0.0; 3];
            for (v, c) in vals.iter_mut().zip(&cols) {
                *v = c
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(line_no, format!("cannot parse `{c}`")))?;
            }
            s_grid.push(vals[0]);
            e_values.push(vals[1]);
            g_values.push(vals[2]);
        }
        let expected = (params.s_max / params.step).round() as usize + 1;
        if s_grid.len() != expected {
            return Err(Error::parse(
                s_grid.len() + 1,
                format!("expected {expected} rows, found {}", s_grid.len()),
            ));
        }
        if s_grid.windows(2).any(|w| w[1] <= w[0]) || g_values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::parse(0, "grid or G values are not monotone"));
        }
        Ok(GaudinTable::from_parts(params, s_grid, e_values, g_values))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        GaudinTable::from_text(&text).map_err(|e| e.with_path(path))
    }

    /// Loads the table cached at `path` if its header matches `params`,
    /// otherwise builds it and writes the cache.
    pub fn load_or_build(path: impl AsRef<Path>, params: GaudinParams) -> Result<(Self, CacheStatus)> {
        let path = path.as_ref();
        if path.exists() {
            match GaudinTable::load(path) {
                Ok(t) if t.params == params => {
                    info!("reusing cached Gaudin table {}", path.display());
                    return Ok((t, CacheStatus::Hit));
                }
                Ok(_) => info!("cached Gaudin table {} has other parameters; rebuilding", path.display()),
                Err(e) => info!("ignoring unreadable Gaudin cache {}: {e}", path.display()),
            }
        }
        let t = build_gaudin_table(params.s_max, params.step, params.order)?;
        t.save(path)?;
        info!("built Gaudin table and cached it at {}", path.display());
        Ok((t, CacheStatus::Built))
    }

    /// Default cache file name for `params` inside `dir`.
    pub fn cache_path(dir: impl AsRef<Path>, params: GaudinParams) -> std::path::PathBuf {
        dir.as_ref().join(format!(
            "gaudin-v{TABLE_FORMAT_VERSION}-smax{}-step{}-m{}.csv",
            params.s_max, params.step, params.order
        ))
    }
}

fn parse_header(header: &str) -> Result<GaudinParams> {
    let mut parts = header.split_whitespace();
    if parts.next() != Some("gaudin-table") {
        return Err(Error::parse(1, "missing `gaudin-table` header"));
    }
    let version = parts.next().unwrap_or("");
    if version != format!("v{TABLE_FORMAT_VERSION}") {
        return Err(Error::parse(1, format!("unsupported table version `{version}`")));
    }
    let (mut s_max, mut step, mut order) = (None, None, None);
    for kv in parts {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::parse(1, format!("malformed header field `{kv}`")))?;
        let bad = |_| Error::parse(1, format!("cannot parse header value `{v}`"));
        match k {
            "smax" => s_max = Some(v.parse::<f64>().map_err(bad)?),
            "step" => step = Some(v.parse::<f64>().map_err(bad)?),
            "m" => order = Some(v.parse::<usize>().map_err(|_| Error::parse(1, format!("cannot parse `{v}`")))?),
            other => return Err(Error::parse(1, format!("unknown header field `{other}`"))),
        }
    }
    match (s_max, step, order) {
        (Some(s_max), Some(step), Some(order)) => Ok(GaudinParams { s_max, step, order }),
        _ => Err(Error::parse(1, "header must give smax, step and m")),
    }
}

/// Builds a table with default parameters.
pub fn default_table() -> Result<GaudinTable> {
    let p = GaudinParams::default();
    build_gaudin_table(p.s_max, p.step, p.order)
}

/// Partial sum `Σ_{k=2}^{k_max} (−1)^k/(k−1)! ∫_{[0,s]^{k−1}} det[S(z_i − z_j)]|_{z₁=0}`
/// with 12-point Gauss–Legendre per axis.
pub fn gaudin_series_truncated(s: f64, k_max: usize) -> Result<f64> {
    if k_max > 5 {
        return Err(Error::Complexity(format!(
            "k_max = {k_max}: the tensor quadrature costs 12^(k−1) determinants"
        )));
    }
    if k_max < 2 {
        return Err(Error::Domain("k_max must be at least 2".into()));
    }
    if !(0.0..=1.5).contains(&s) {
        return Err(Error::Domain(format!("series is only used for 0 ≤ s ≤ 1.5, got {s}")));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let rule = gauss_legendre(12).mapped(0.0, s);
    let mut total = 0.0;
    let mut factorial = 1.0;
    for k in 2..=k_max {
        factorial *= (k - 1) as f64;
        let dims = k - 1;
        let mut idx = vec![0usize; dims];
        let mut pts = vec![0.0; k];
        let mut integral = 0.0;
        loop {
            let mut w = 1.0;
            for (d, &i) in idx.iter().enumerate() {
                pts[d + 1] = rule.nodes[i];
                w *= rule.weights[i];
            }
            integral += w * sine_det(&pts);
            // odometer increment
            let mut d = 0;
            while d < dims {
                idx[d] += 1;
                if idx[d] < rule.len() {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == dims {
                break;
            }
        }
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * integral / factorial;
    }
    Ok(total)
}

/// Normalised Wigner surmise `p(s) = (32/π²) s² exp(−4s²/π)`.
pub fn wigner_surmise(s: f64) -> f64 {
    if s < 0.0 {
        return 0.0;
    }
    32.0 / (PI * PI) * s * s * (-4.0 * s * s / PI).exp()
}
