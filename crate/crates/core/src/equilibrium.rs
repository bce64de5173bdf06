//! Equilibrium measures of convex polynomial fields, their distribution
//! functions, the unfolding map `x ↦ N·F(x)`, and the self-consistent
//! measure of a repulsive particle system.
//!
//! The support `[a, b]` is found from the two endpoint conditions
//!
//! ```text
//! ∫_a^b V'(t) / √((b−t)(t−a)) dt = 0,     ∫_a^b t V'(t) / √((b−t)(t−a)) dt = 2π,
//! ```
//!
//! which under `t = c + r cos θ` become smooth periodic integrals over
//! `[0, π]`. On the reference interval `[-1, 1]` the density is
//! `ρ(x) = √(1−x²) G(x) / (2π)` with
//! `G(x) = (1/π) ∫ h(t,x)/√(1−t²) dt` and `h` the divided difference of
//! `(V∘λ)'`.

use std::f64::consts::PI;

use log::debug;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;
use crate::models::{Interaction, Potential};
use crate::quadrature::{self, barycentric_lobatto, chebyshev_lobatto, cumulative_cosine_integral, ksum};
use crate::sampling::Configuration;

const MAX_NEWTON: usize = 100;
const DIAGONAL_SWITCH: f64 = 1e-6;

/// Support endpoints of an equilibrium measure together with the final
/// residual of the endpoint equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Endpoints {
    pub a: f64,
    pub b: f64,
    pub residual: f64,
    pub iterations: usize,
}

/// Number of trapezoid nodes used for the endpoint integrals of `p`.
pub fn default_trapezoid_nodes(p: &Potential) -> usize {
    (4 * p.degree() + 16).max(64)
}

/// Residuals `(F₁, F₂ − 2π)` of the endpoint equations at `(a, b)`, using the
/// trapezoid rule with `n` panels in the angular variable.
pub fn endpoint_residuals(p: &Potential, a: f64, b: f64, n: usize) -> (f64, f64) {
    let (f, _) = endpoint_system(p, 0.5 * (a + b), 0.5 * (b - a), n);
    (f[0], f[1] - 2.0 * PI)
}

// Returns (F, J) in the (center, radius) parametrisation.
fn endpoint_system(p: &Potential, c: f64, r: f64, n: usize) -> ([f64; 2], [[f64; 2]; 2]) {
    let h = PI / n as f64;
    let mut f = [quadrature::KahanSum::default(); 2];
    let mut jac = [[0.0; 2]; 2];
    for j in 0..=n {
        let w = if j == 0 || j == n { 0.5 * h } else { h };
        let cs = (j as f64 * h).cos();
        let t = c + r * cs;
        let d1 = p.d1(t);
        let d2 = p.d2(t);
        f[0].add(w * d1);
        f[1].add(w * t * d1);
        jac[0][0] += w * d2;
        jac[0][1] += w * d2 * cs;
        jac[1][0] += w * (d1 + t * d2);
        jac[1][1] += w * (cs * d1 + t * d2 * cs);
    }
    ([f[0].total(), f[1].total()], jac)
}

/// Solves the endpoint equations for the support `[a, b]` of the equilibrium
/// measure of `p`, to residual below `tol`.
pub fn mrs_endpoints(p: &Potential, tol: f64) -> Result<(f64, f64)> {
    solve_endpoints(p, tol, None).map(|e| (e.a, e.b))
}

/// Like [`mrs_endpoints`] but returns the full solver report, optionally
/// starting Newton from a previous solution.
pub fn solve_endpoints(p: &Potential, tol: f64, guess: Option<(f64, f64)>) -> Result<Endpoints> {
    let n = default_trapezoid_nodes(p);
    let (mut c, mut r) = match guess {
        Some((a, b)) if b > a => (0.5 * (a + b), 0.5 * (b - a)),
        _ => {
            let c0 = p.argmin();
            let curv = p.d2(c0);
            let r0 = if curv > 0.0 { 2.0 / curv.sqrt() } else { 1.0 };
            (c0, r0)
        }
    };
    let norm = |f: [f64; 2]| f[0].abs() + (f[1] - 2.0 * PI).abs();
    let (mut f, mut jac) = endpoint_system(p, c, r, n);
    let mut res = norm(f);
    for it in 0..MAX_NEWTON {
        if res < tol {
            return finish(p, c, r, res, it);
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let g = [f[0], f[1] - 2.0 * PI];
        let dc = (jac[1][1] * g[0] - jac[0][1] * g[1]) / det;
        let dr = (-jac[1][0] * g[0] + jac[0][0] * g[1]) / det;
        let mut step = 1.0;
        loop {
            let (nc, nr) = (c - step * dc, r - step * dr);
            if nr > 0.0 {
                let (nf, nj) = endpoint_system(p, nc, nr, n);
                let nres = norm(nf);
                if nres.is_finite() && (nres < res || step < 1e-3) {
                    c = nc;
                    r = nr;
                    f = nf;
                    jac = nj;
                    res = nres;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-10 {
                return Err(Error::Solve {
                    iterations: it,
                    residual: res,
                });
            }
        }
    }
    if res < tol {
        return finish(p, c, r, res, MAX_NEWTON);
    }
    Err(Error::Solve {
        iterations: MAX_NEWTON,
        residual: res,
    })
}

fn finish(p: &Potential, c: f64, r: f64, residual: f64, iterations: usize) -> Result<Endpoints> {
    let (a, b) = (c - r, c + r);
    let dom = p.domain();
    if !(dom.lo < a && b < dom.hi) {
        return Err(Error::Domain(format!(
            "support [{a}, {b}] touches the boundary of J = [{}, {}]; hard edges are not supported",
            dom.lo, dom.hi
        )));
    }
    Ok(Endpoints {
        a,
        b,
        residual,
        iterations,
    })
}

/// The field `W = V∘λ` on the reference interval, with `λ(s) = c + r s`.
struct Rescaled<'a> {
    p: &'a Potential,
    c: f64,
    r: f64,
}

impl Rescaled<'_> {
    fn d1(&self, s: f64) -> f64 {
        self.r * self.p.d1(self.c + self.r * s)
    }

    fn d2(&self, s: f64) -> f64 {
        self.r * self.r * self.p.d2(self.c + self.r * s)
    }

    /// Divided difference of `W'`, switching to the integral of `W''` near
    /// the diagonal.
    fn divided_difference(&self, t: f64, x: f64, gl5: &quadrature::Rule) -> f64 {
        if (t - x).abs() < DIAGONAL_SWITCH {
            gl5.integrate(|u| self.d2(x + u * (t - x)))
        } else {
            (self.d1(t) - self.d1(x)) / (t - x)
        }
    }
}

fn g_values(p: &Potential, a: f64, b: f64, xs: &[f64]) -> Vec<f64> {
    let w = Rescaled {
        p,
        c: 0.5 * (a + b),
        r: 0.5 * (b - a),
    };
    let m = (p.degree() + 8).max(32);
    let cheb = quadrature::gauss_chebyshev(m);
    let gl5 = quadrature::gauss_legendre(5).mapped(0.0, 1.0);
    xs.iter()
        .map(|&x| cheb.integrate(|t| w.divided_difference(t, x, &gl5)) / PI)
        .collect()
}

/// Equilibrium density rescaled to `[-1, 1]`, sampled at `n_nodes`
/// Chebyshev–Lobatto points.
pub fn rescaled_density(p: &Potential, a: f64, b: f64, n_nodes: usize) -> Result<Vec<(f64, f64)>> {
    rescaled_density_checked(p, a, b, n_nodes, 1e-10).map(|(pairs, _)| pairs)
}

// `(x, ρ(x))` pairs and the matching `G(x)` values.
type DensityAndG = (Vec<(f64, f64)>, Vec<f64>);

fn rescaled_density_checked(
    p: &Potential,
    a: f64,
    b: f64,
    n_nodes: usize,
    tol: f64,
) -> Result<DensityAndG> {
    if n_nodes < 3 {
        return Err(Error::Domain("need at least three density nodes".into()));
    }
    if !(a < b) {
        return Err(Error::Domain(format!("invalid support [{a}, {b}]")));
    }
    let xs = chebyshev_lobatto(n_nodes - 1);
    let gs = g_values(p, a, b, &xs);
    let mut out = Vec::with_capacity(xs.len());
    for (&x, &g) in xs.iter().zip(&gs) {
        let rho = (1.0 - x * x).max(0.0).sqrt() * g / (2.0 * PI);
        if rho < -tol || g < -tol {
            return Err(Error::DensityNegative { x, value: rho.min(g) });
        }
        out.push((x, rho.max(0.0)));
    }
    Ok((out, gs))
}

/// Equilibrium measure on `[a, b]` with its distribution function.
#[derive(Debug, Clone)]
pub struct EquilibriumMeasure {
    a: f64,
    b: f64,
    ref_nodes: Vec<f64>,
    g_values: Vec<f64>,
    density_nodes: Vec<(f64, f64)>,
    cdf_nodes: Vec<(f64, f64)>,
    rescaled: Vec<(f64, f64)>,
    cdf: MonotoneCubic,
    mass: f64,
}

/// Builds the equilibrium measure of `p` with `n_nodes` density nodes; `tol`
/// is the endpoint-equation tolerance.
pub fn build_measure(p: &Potential, n_nodes: usize, tol: f64) -> Result<EquilibriumMeasure> {
    let ends = solve_endpoints(p, tol, None)?;
    EquilibriumMeasure::from_endpoints(p, ends.a, ends.b, n_nodes)
}

impl EquilibriumMeasure {
    pub fn from_endpoints(p: &Potential, a: f64, b: f64, n_nodes: usize) -> Result<Self> {
        let (rescaled, g_values) = rescaled_density_checked(p, a, b, n_nodes, 1e-10)?;
        let ref_nodes: Vec<f64> = rescaled.iter().map(|&(x, _)| x).collect();
        let n = ref_nodes.len() - 1;
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);

        // Samples of (1−x²)G(x)/(2π) at θ_j = jπ/n, i.e. x = cos θ_j (descending).
        let samples: Vec<f64> = (0..=n)
            .map(|j| {
                let k = n - j;
                let x = ref_nodes[k];
                (1.0 - x * x).max(0.0) * g_values[k] / (2.0 * PI)
            })
            .collect();
        let cum = cumulative_cosine_integral(&samples);
        let mass = cum[0];

        let mut cdf_vals: Vec<f64> = (0..=n).map(|k| cum[n - k].clamp(0.0, 1.0)).collect();
        cdf_vals[0] = 0.0;
        for k in 1..=n {
            if cdf_vals[k] < cdf_vals[k - 1] {
                cdf_vals[k] = cdf_vals[k - 1];
            }
        }
        let ts: Vec<f64> = ref_nodes.iter().map(|&x| mid + half * x).collect();
        let dens: Vec<f64> = rescaled.iter().map(|&(_, rho)| rho / half).collect();
        let cdf = MonotoneCubic::with_slopes(ts.clone(), cdf_vals.clone(), dens.clone());
        Ok(EquilibriumMeasure {
            a,
            b,
            density_nodes: ts.iter().copied().zip(dens).collect(),
            cdf_nodes: ts.into_iter().zip(cdf_vals).collect(),
            ref_nodes,
            g_values,
            rescaled,
            cdf,
            mass,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    /// `(t, μ(t))` at the Chebyshev nodes mapped to `[a, b]`.
    pub fn density_nodes(&self) -> &[(f64, f64)] {
        &self.density_nodes
    }

    /// `(t, F(t))` at the same nodes.
    pub fn cdf_nodes(&self) -> &[(f64, f64)] {
        &self.cdf_nodes
    }

    /// `(x, ρ(x))` on the reference interval.
    pub fn rescaled_density(&self) -> &[(f64, f64)] {
        &self.rescaled
    }

    /// Total mass of the density before clamping the CDF.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// Maps `t ∈ [a, b]` to the reference interval.
    pub fn to_reference(&self, t: f64) -> f64 {
        (2.0 * t - (self.a + self.b)) / (self.b - self.a)
    }

    pub fn to_physical(&self, x: f64) -> f64 {
        0.5 * (self.b - self.a) * x + 0.5 * (self.a + self.b)
    }

    /// `G` of the rescaled problem at `x ∈ [-1, 1]`, by barycentric
    /// interpolation (exact for polynomial fields).
    pub fn g_function(&self, x: f64) -> f64 {
        barycentric_lobatto(&self.ref_nodes, &self.g_values, x)
    }

    pub fn rescaled_density_at(&self, x: f64) -> f64 {
        if !(-1.0..=1.0).contains(&x) {
            return 0.0;
        }
        ((1.0 - x * x).sqrt() * self.g_function(x) / (2.0 * PI)).max(0.0)
    }

    /// Equilibrium density `μ(t)`; zero off the support.
    pub fn density(&self, t: f64) -> f64 {
        if t <= self.a || t >= self.b {
            return 0.0;
        }
        2.0 / (self.b - self.a) * self.rescaled_density_at(self.to_reference(t))
    }

    /// Distribution function `F(t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= self.a {
            0.0
        } else if t >= self.b {
            1.0
        } else {
            self.cdf.eval(t).clamp(0.0, 1.0)
        }
    }

    /// Quantile function: the `t` with `F(t) = u`.
    pub fn cdf_inverse(&self, u: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&u) {
            return Err(Error::Domain(format!("quantile level {u} outside [0, 1]")));
        }
        if u == 0.0 {
            return Ok(self.a);
        }
        if u == 1.0 {
            return Ok(self.b);
        }
        let vals = self.cdf.values();
        let ts = self.cdf.nodes();
        let k = vals.partition_point(|&v| v < u);
        let (mut lo, mut hi) = if k == 0 {
            (ts[0], ts[0])
        } else if k >= ts.len() {
            (ts[ts.len() - 1], ts[ts.len() - 1])
        } else {
            (ts[k - 1], ts[k])
        };
        if vals.get(k) == Some(&u) {
            return Ok(ts[k]);
        }
        let mut t = 0.5 * (lo + hi);
        for _ in 0..200 {
            let diff = self.cdf(t) - u;
            if diff.abs() < 1e-13 {
                break;
            }
            if diff > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            let d = self.density(t);
            let newton = if d > 0.0 { t - diff / d } else { f64::NAN };
            t = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if hi - lo <= 4.0 * f64::EPSILON * t.abs().max(1.0) {
                break;
            }
        }
        Ok(t)
    }

    /// Unfolds a configuration: `x_i ↦ N·F(x_i)`. Points outside the support
    /// are clamped to `0` or `N`.
    pub fn unfold(&self, x: &Configuration) -> Configuration {
        let n = x.len() as f64;
        x.map_points(|p| n * self.cdf(p))
    }

    /// Convolution `(h ∗ μ)(t)` on `n` Gauss–Legendre nodes in the angular
    /// variable `u = λ(cos φ)`.
    pub fn convolution_rule(&self, n: usize) -> Vec<(f64, f64)> {
        let rule = quadrature::gauss_legendre(n).mapped(0.0, PI);
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&phi, &w)| {
                let x = phi.cos();
                let s = phi.sin();
                let u = self.to_physical(x);
                (u, w * s * s * self.g_function(x) / (2.0 * PI))
            })
            .collect()
    }
}

/// Convenience wrapper around [`EquilibriumMeasure::unfold`].
pub fn unfold(m: &EquilibriumMeasure, x: &Configuration) -> Configuration {
    m.unfold(x)
}

/// Tuning for [`repulsive_fixed_point`].
#[derive(Debug, Clone, Copy)]
pub struct FixedPointOptions {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Degree of the polynomial refit of `Q + h∗μ`.
    pub fit_degree: usize,
    pub convolution_nodes: usize,
    pub density_nodes: usize,
    pub endpoint_tol: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        FixedPointOptions {
            damping: 0.5,
            tol: 1e-8,
            max_iter: 200,
            fit_degree: 10,
            convolution_nodes: 512,
            density_nodes: 256,
            endpoint_tol: 1e-12,
        }
    }
}

/// Result of the repulsive fixed-point iteration.
#[derive(Debug, Clone)]
pub struct FixedPoint {
    /// Polynomial refit of the effective field `Q + h∗μ`.
    pub effective: Potential,
    pub measure: EquilibriumMeasure,
    pub iterations: usize,
    /// Sup-norm density change per iteration.
    pub residual_history: Vec<f64>,
    /// Largest pointwise error of the last polynomial refit.
    pub fit_residual: f64,
    /// Interval over which `Q + h∗μ` is refit.
    pub fit_window: (f64, f64),
}

/// Effective field `Q + h∗μ` refit to a polynomial of the given degree over
/// `window`. Returns the fit and its max residual on the sample points.
pub fn effective_potential(
    q: &Potential,
    h: &Interaction,
    m: &EquilibriumMeasure,
    window: (f64, f64),
    degree: usize,
    convolution_nodes: usize,
) -> Result<(Potential, f64)> {
    let rule = m.convolution_rule(convolution_nodes);
    let conv = |t: f64| ksum(rule.iter().map(|&(u, w)| w * h.value(t - u)));
    fit_polynomial(|t| q.value(t) + conv(t), window.0, window.1, degree)
}

/// Damped iteration for the self-consistent measure of the repulsive system:
/// the damped measure `μ̄ ← (1−d)μ̄ + d·μ` enters only through `h∗μ̄`, which
/// is linear, so the damping is carried on the convolution values.
pub fn repulsive_fixed_point(q: &Potential, h: &Interaction, opts: &FixedPointOptions) -> Result<FixedPoint> {
    if !(opts.damping > 0.0 && opts.damping <= 1.0) {
        return Err(Error::Domain(format!("damping {} outside (0, 1]", opts.damping)));
    }
    let mut measure = build_measure(q, opts.density_nodes, opts.endpoint_tol)?;
    let (a0, b0) = measure.support();
    let r0 = 0.5 * (b0 - a0);
    // The fit window is fixed so that damping can act on sampled values.
    let (lo, hi) = (a0 - r0, b0 + r0);
    let samples = fit_samples(lo, hi, opts.fit_degree);
    let conv_at = |m: &EquilibriumMeasure| -> Vec<f64> {
        let rule = m.convolution_rule(opts.convolution_nodes);
        samples
            .iter()
            .map(|&t| ksum(rule.iter().map(|&(u, w)| w * h.value(t - u))))
            .collect()
    };
    let mut damped = conv_at(&measure);
    let mut history = Vec::new();
    let mut guess = (a0, b0);
    for it in 1..=opts.max_iter {
        let target: Vec<f64> = samples.iter().zip(&damped).map(|(&t, c)| q.value(t) + c).collect();
        let (effective, fit_residual) = fit_from_samples(&samples, &target, lo, hi, opts.fit_degree)?;
        let ends = solve_endpoints(&effective, opts.endpoint_tol, Some(guess))?;
        let next = EquilibriumMeasure::from_endpoints(&effective, ends.a, ends.b, opts.density_nodes)?;
        guess = (ends.a, ends.b);
        let change = sup_density_change(&measure, &next);
        history.push(change);
        debug!("fixed point iteration {it}: change {change:e}, support [{}, {}]", ends.a, ends.b);
        measure = next;
        if change < opts.tol {
            return Ok(FixedPoint {
                effective,
                measure,
                iterations: it,
                residual_history: history,
                fit_residual,
                fit_window: (lo, hi),
            });
        }
        if !change.is_finite() {
            break;
        }
        let fresh = conv_at(&measure);
        for (d, f) in damped.iter_mut().zip(fresh) {
            *d = (1.0 - opts.damping) * *d + opts.damping * f;
        }
    }
    Err(Error::FixedPoint { history })
}

/// Largest density difference over the nodes of both measures.
pub fn sup_density_change(old: &EquilibriumMeasure, new: &EquilibriumMeasure) -> f64 {
    let a = new.density_nodes().iter().map(|&(t, d)| (d - old.density(t)).abs());
    let b = old.density_nodes().iter().map(|&(t, d)| (d - new.density(t)).abs());
    a.chain(b).fold(0.0, f64::max)
}

fn fit_samples(lo: f64, hi: f64, degree: usize) -> Vec<f64> {
    let m = 4 * (degree + 1);
    chebyshev_lobatto(m - 1)
        .into_iter()
        .map(|x| 0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        .collect()
}

/// Least-squares polynomial fit of `f` on `[lo, hi]` (Chebyshev basis,
/// converted to monomials).
pub fn fit_polynomial(f: impl Fn(f64) -> f64, lo: f64, hi: f64, degree: usize) -> Result<(Potential, f64)> {
    let ts = fit_samples(lo, hi, degree);
    let ys: Vec<f64> = ts.iter().map(|&t| f(t)).collect();
    fit_from_samples(&ts, &ys, lo, hi, degree)
}

fn fit_from_samples(ts: &[f64], ys: &[f64], lo: f64, hi: f64, degree: usize) -> Result<(Potential, f64)> {
    let mid = 0.5 * (hi + lo);
    let half = 0.5 * (hi - lo);
    let design = DMatrix::from_fn(ts.len(), degree + 1, |i, k| chebyshev_t(k, (ts[i] - mid) / half));
    let rhs = DVector::from_column_slice(ys);
    let svd = design.clone().svd(true, true);
    let cheb = svd
        .solve(&rhs, 1e-14)
        .map_err(|e| Error::Numerical(format!("polynomial fit failed: {e}")))?;
    // Chebyshev series in s = (t − mid)/half  →  monomials in t.
    let mut in_s = vec![0.0; degree + 1];
    for (k, c) in cheb.iter().enumerate() {
        for (j, m) in chebyshev_monomials(k).into_iter().enumerate() {
            in_s[j] += c * m;
        }
    }
    let coeffs = compose_affine(&in_s, -mid / half, 1.0 / half);
    let p = Potential::polynomial(coeffs, crate::models::Interval::REAL_LINE)?;
    let residual = ts.iter().zip(ys).map(|(&t, &y)| (p.value(t) - y).abs()).fold(0.0, f64::max);
    Ok((p, residual))
}

fn chebyshev_t(k: usize, x: f64) -> f64 {
    let (mut t0, mut t1) = (1.0, x);
    if k == 0 {
        return 1.0;
    }
    for _ in 1..k {
        let t2 = 2.0 * x * t1 - t0;
        t0 = t1;
        t1 = t2;
    }
    t1
}

fn chebyshev_monomials(k: usize) -> Vec<f64> {
    let mut t0 = vec![1.0];
    if k == 0 {
        return t0;
    }
    let mut t1 = vec![0.0, 1.0];
    for _ in 1..k {
        let mut t2 = vec![0.0; t1.len() + 1];
        for (j, c) in t1.iter().enumerate() {
            t2[j + 1] += 2.0 * c;
        }
        for (j, c) in t0.iter().enumerate() {
            t2[j] -= c;
        }
        t0 = t1;
        t1 = t2;
    }
    t1
}

/// Coefficients of `p(α + β t)` given those of `p(s)`.
fn compose_affine(p: &[f64], alpha: f64, beta: f64) -> Vec<f64> {
    let mut out = vec![0.0; p.len()];
    // Horner in polynomial arithmetic.
    for &c in p.iter().rev() {
        let mut next = vec![0.0; out.len()];
        for (j, &o) in out.iter().enumerate() {
            next[j] += alpha * o;
            if j + 1 < next.len() {
                next[j + 1] += beta * o;
            }
        }
        next[0] += c;
        out = next;
    }
    out
}
