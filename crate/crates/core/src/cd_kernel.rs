//! Christoffel–Darboux kernel of the invariant ensemble with weight
//! `e^{−N V + f}`, built from three-term recurrence coefficients, and the
//! unfolded comparison against the sine kernel.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::equilibrium::{mrs_endpoints, EquilibriumMeasure};
use crate::error::{Error, Result};
use crate::gaudin::sine_kernel;
use crate::models::Potential;
use crate::quadrature::{gauss_legendre, KahanSum};

/// Largest matrix size accepted by [`recurrence_coefficients`].
pub const MAX_KERNEL_SIZE: usize = 128;

/// Default Gauss–Legendre grid size for the Stieltjes procedure.
pub const DEFAULT_QUAD_POINTS: usize = 4096;

/// Three-term recurrence `t p_j = b_{j+1} p_{j+1} + a_j p_j + b_j p_{j−1}`
/// for the orthonormal polynomials of `e^{−N V + f}`.
///
/// The weight is stored shifted by its maximum on the grid, so `m0` is the
/// zeroth moment of `e^{−N V + f − shift}`.
#[derive(Debug, Clone)]
pub struct RecurrenceTable {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    m0: f64,
    shift: f64,
    v: Potential,
    f: Option<Potential>,
    window: (f64, f64),
}

impl RecurrenceTable {
    /// Number of orthonormal polynomials carried, which is also the number of
    /// terms in the kernel sum.
    pub fn n_max(&self) -> usize {
        self.a.len()
    }

    /// Matrix size `N` in the weight.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self, j: usize) -> f64 {
        self.a[j]
    }

    /// Off-diagonal coefficient `b_j`, `1 ≤ j ≤ n_max`.
    pub fn b(&self, j: usize) -> f64 {
        assert!(j >= 1, "b_0 is not part of the recurrence");
        self.b[j - 1]
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.a
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.b
    }

    pub fn zeroth_moment(&self) -> f64 {
        self.m0
    }

    /// Interval covered by the quadrature grid.
    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    /// `(−N V(t) + f(t) − shift) / 2`.
    fn half_log_weight(&self, t: f64) -> f64 {
        let f = self.f.as_ref().map_or(0.0, |f| f.value(t));
        0.5 * (-(self.n as f64) * self.v.value(t) + f - self.shift)
    }

    /// Weighted orthonormal functions `φ_j(t) = p_j(t) e^{(−N V(t) + f(t))/2}`
    /// for `j < n_max`.
    pub fn weighted_functions(&self, t: f64) -> Result<Vec<f64>> {
        let k = self.n_max();
        let mut phi = Vec::with_capacity(k);
        let phi0 = self.half_log_weight(t).exp() / self.m0.sqrt();
        phi.push(phi0);
        let mut prev = 0.0;
        for j in 0..k.saturating_sub(1) {
            let bj = if j == 0 { 0.0 } else { self.b[j - 1] };
            let next = ((t - self.a[j]) * phi[j] - bj * prev) / self.b[j];
            if !next.is_finite() {
                return Err(Error::Precision(format!("weighted recurrence overflowed at t = {t}, j = {}", j + 1)));
            }
            prev = phi[j];
            phi.push(next);
        }
        Ok(phi)
    }
}

/// Recurrence coefficients by the discretized Stieltjes procedure on a
/// Gauss–Legendre grid over `[a − 1, b + 1]`, widened if the weight has not
/// decayed by `e^{−100}` at the ends.
pub fn recurrence_coefficients(
    v: &Potential,
    f: Option<&Potential>,
    n: usize,
    n_max: usize,
    quad_points: usize,
) -> Result<RecurrenceTable> {
    if n == 0 || n_max == 0 {
        return Err(Error::Domain("matrix size and polynomial count must be positive".into()));
    }
    if n_max > n {
        return Err(Error::Domain(format!("n_max = {n_max} exceeds N = {n}")));
    }
    if n > MAX_KERNEL_SIZE {
        return Err(Error::Precision(format!(
            "N = {n} exceeds the supported kernel size {MAX_KERNEL_SIZE}"
        )));
    }
    if quad_points < 2 * n_max + 2 {
        return Err(Error::Domain(format!("{quad_points} quadrature points cannot resolve {n_max} polynomials")));
    }
    let (a, b) = mrs_endpoints(v, 1e-12)?;
    let log_w = |t: f64| -(n as f64) * v.value(t) + f.map_or(0.0, |f| f.value(t));
    let center_log = log_w(0.5 * (a + b));
    let domain = v.domain();
    let mut margin = 1.0;
    let (mut lo, mut hi);
    loop {
        lo = (a - margin).max(domain.lo);
        hi = (b + margin).min(domain.hi);
        let lo_ok = lo == domain.lo || log_w(lo) < center_log - 100.0;
        let hi_ok = hi == domain.hi || log_w(hi) < center_log - 100.0;
        if lo_ok && hi_ok {
            break;
        }
        margin *= 2.0;
        if margin > 1e6 {
            return Err(Error::Domain("weight does not decay; is V confining?".into()));
        }
    }
    let rule = gauss_legendre(quad_points).mapped(lo, hi);
    let logs: Vec<f64> = rule.nodes.iter().map(|&t| log_w(t)).collect();
    let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lambda: Vec<f64> = rule
        .weights
        .iter()
        .zip(&logs)
        .map(|(w, l)| w * (l - shift).exp())
        .collect();
    let m0: f64 = lambda.iter().copied().collect::<KahanSum>().total();

    let nodes = &rule.nodes;
    let mut p_prev = vec![0.0; nodes.len()];
    let mut p = vec![1.0 / m0.sqrt(); nodes.len()];
    let mut alpha = Vec::with_capacity(n_max);
    let mut beta = Vec::with_capacity(n_max);
    let mut b_prev = 0.0;
    for j in 0..n_max {
        let aj: f64 = (0..nodes.len())
            .map(|i| lambda[i] * nodes[i] * p[i] * p[i])
            .collect::<KahanSum>()
            .total();
        let q: Vec<f64> = (0..nodes.len())
            .map(|i| (nodes[i] - aj) * p[i] - b_prev * p_prev[i])
            .collect();
        let norm2: f64 = (0..nodes.len()).map(|i| lambda[i] * q[i] * q[i]).collect::<KahanSum>().total();
        if !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(Error::Precision(format!(
                "b_{} lost positivity ({norm2:e}); n_max too large for {quad_points} points",
                j + 1
            )));
        }
        let bj = norm2.sqrt();
        alpha.push(aj);
        beta.push(bj);
        p_prev = std::mem::replace(&mut p, q.into_iter().map(|x| x / bj).collect());
        b_prev = bj;
    }
    Ok(RecurrenceTable {
        n,
        a: alpha,
        b: beta,
        m0,
        shift,
        v: v.clone(),
        f: f.cloned(),
        window: (lo, hi),
    })
}

/// `K_N(t, s) = Σ_{j<n_max} φ_j(t) φ_j(s)`.
pub fn cd_kernel_eval(r: &RecurrenceTable, t: f64, s: f64) -> Result<f64> {
    let pt = r.weighted_functions(t)?;
    if t == s {
        return Ok(pt.iter().map(|x| x * x).sum());
    }
    let ps = r.weighted_functions(s)?;
    Ok(pt.iter().zip(&ps).map(|(x, y)| x * y).sum())
}

/// Kernel matrix `K(t_i, t_j)`.
pub fn gram_matrix(r: &RecurrenceTable, points: &[f64]) -> Result<DMatrix<f64>> {
    let phis = points
        .iter()
        .map(|&t| r.weighted_functions(t))
        .collect::<Result<Vec<_>>>()?;
    let k = points.len();
    Ok(DMatrix::from_fn(k, k, |i, j| {
        phis[i].iter().zip(&phis[j]).map(|(x, y)| x * y).sum()
    }))
}

/// `k`-point correlation function `det(K(t_i, t_j))`. Small negative
/// round-off is clipped to zero; anything below `−1e-6` relative to the
/// Hadamard bound is reported.
pub fn correlation_det(r: &RecurrenceTable, points: &[f64]) -> Result<f64> {
    if points.is_empty() {
        return Err(Error::Domain("correlation needs at least one point".into()));
    }
    let g = gram_matrix(r, points)?;
    let det = g.clone().determinant();
    let scale = g.diagonal().iter().product::<f64>().max(1.0);
    if det < -1e-6 * scale {
        return Err(Error::Precision(format!("kernel determinant {det:e} is negative")));
    }
    Ok(det.max(0.0))
}

/// Largest deviation of the unfolded kernel from the sine kernel over a
/// `grid × grid` lattice of the unfolded window `[lo, hi]`.
pub fn unfolded_kernel_error(
    r: &RecurrenceTable,
    m: &EquilibriumMeasure,
    interval: (f64, f64),
    grid: usize,
) -> Result<f64> {
    let n = r.n() as f64;
    let (lo, hi) = interval;
    if grid < 2 {
        return Err(Error::Domain("grid needs at least two points".into()));
    }
    if !(lo < hi) || lo < 0.05 * n || hi > 0.95 * n {
        return Err(Error::Domain(format!(
            "window [{lo}, {hi}] must stay 0.05·N away from 0 and N = {n}"
        )));
    }
    let ts: Vec<f64> = (0..grid).map(|i| lo + (hi - lo) * i as f64 / (grid - 1) as f64).collect();
    let xs = ts.iter().map(|&t| m.cdf_inverse(t / n)).collect::<Result<Vec<_>>>()?;
    let phis = xs
        .par_iter()
        .map(|&x| r.weighted_functions(x))
        .collect::<Result<Vec<_>>>()?;
    let worst = (0..grid)
        .into_par_iter()
        .map(|i| {
            let scale = n * m.density(xs[i]);
            (0..grid)
                .map(|j| {
                    let k: f64 = phis[i].iter().zip(&phis[j]).map(|(x, y)| x * y).sum();
                    (k / scale - sine_kernel(ts[i] - ts[j])).abs()
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}
